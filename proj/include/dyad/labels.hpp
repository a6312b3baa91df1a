#pragma once

namespace dyad {

/// Binary dyadic label. The numeric values are the forest class indices, so
/// class 1 (dyadic) is the positive class everywhere.
enum class DyadicLabel : int { NonDyadic = 0, Dyadic = 1 };

inline int to_class(DyadicLabel l) noexcept { return static_cast<int>(l); }
inline DyadicLabel from_class(int c) noexcept {
  return c == 1 ? DyadicLabel::Dyadic : DyadicLabel::NonDyadic;
}

}  // namespace dyad
