#include "dyad/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "dyad/error.hpp"

namespace dyad {

namespace {

constexpr double kCfTolerance = 1e-12;
constexpr int kCfMaxIterations = 1000;

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kCfTolerance) return h;
  }
  return h;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::InvalidArgument, "beta parameters must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(Errc::InvalidArgument, "degrees of freedom must be > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "x and y differ in length");
  if (x.size() < 3) throw Error(Errc::TooFewPoints, std::to_string(x.size()) + " point(s)");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ConstantInput, "an input is constant");

  CorrelationResult res;
  res.n = static_cast<int>(x.size());
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = res.n - 2.0;
  if (std::abs(res.r) == 1.0) {
    res.p_two_sided = 0.0;
  } else {
    const double t = res.r * std::sqrt(df / (1.0 - res.r * res.r));
    res.p_two_sided = student_t_two_sided_p(t, df);
  }
  return res;
}

TTestResult t_test_welch(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(Errc::TooFewPoints, "each group needs at least 2 values");
  }
  TTestResult res;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  res.mean_a = mean_of(a);
  res.mean_b = mean_of(b);
  const double va = sample_variance(a, res.mean_a);
  const double vb = sample_variance(b, res.mean_b);
  res.std_a = std::sqrt(va);
  res.std_b = std::sqrt(vb);

  const double qa = va / na;
  const double qb = vb / nb;
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    if (res.mean_a == res.mean_b) {
      throw Error(Errc::BothConstantEqual, "zero variance and equal means");
    }
    res.t = res.mean_a > res.mean_b ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
    res.df = na + nb - 2.0;
    res.p_two_sided = 0.0;
    return res;
  }
  res.t = (res.mean_a - res.mean_b) / std::sqrt(se2);
  res.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  res.p_two_sided = student_t_two_sided_p(res.t, res.df);
  return res;
}

GroupSummary group_summary(std::span<const double> values) {
  if (values.size() < 2) throw Error(Errc::TooFewPoints, std::to_string(values.size()) + " value(s)");
  GroupSummary g;
  g.n = static_cast<int>(values.size());
  g.mean = mean_of(values);
  g.std = std::sqrt(sample_variance(values, g.mean));
  return g;
}

namespace {

template <typename Fn>
auto capture(Fn&& fn) -> Outcome<decltype(fn())> {
  Outcome<decltype(fn())> out;
  try {
    out.value = fn();
  } catch (const Error& e) {
    out.error = std::string(errc_name(e.code()));
  }
  return out;
}

}  // namespace

SplitCorrelation split_correlation(std::span<const ParticipantProfile> profiles, int cut) {
  std::vector<double> sev_lo, ratio_lo, sev_hi, ratio_hi;
  for (const auto& p : profiles) {
    if (!p.severity) continue;
    auto& sev = *p.severity < cut ? sev_lo : sev_hi;
    auto& ratio = *p.severity < cut ? ratio_lo : ratio_hi;
    sev.push_back(*p.severity);
    ratio.push_back(p.dyadic_ratio);
  }
  SplitCorrelation out;
  out.below = capture([&] { return pearson(sev_lo, ratio_lo); });
  out.at_above = capture([&] { return pearson(sev_hi, ratio_hi); });
  return out;
}

namespace {

StatRow correlation_row(std::string name, const Outcome<CorrelationResult>& c, int n) {
  StatRow row;
  row.analysis = std::move(name);
  row.n = n;
  if (c.value) {
    row.statistic = c.value->r;
    row.p_value = c.value->p_two_sided;
  } else {
    row.note = c.error;
  }
  return row;
}

}  // namespace

std::vector<StatRow> cohort_statistics(std::span<const ParticipantProfile> profiles) {
  std::vector<StatRow> rows;

  std::vector<double> sev_all, ratio_all;
  std::vector<double> sev_rt, rt;
  std::vector<double> sev_pt, pt;
  for (const auto& p : profiles) {
    if (!p.severity) continue;
    sev_all.push_back(*p.severity);
    ratio_all.push_back(p.dyadic_ratio);
    if (p.timing_available && p.timing.response_time) {
      sev_rt.push_back(*p.severity);
      rt.push_back(*p.timing.response_time);
    }
    if (p.timing_available && p.timing.pause_time) {
      sev_pt.push_back(*p.severity);
      pt.push_back(*p.timing.pause_time);
    }
  }

  rows.push_back(correlation_row("dyadic_ratio~severity",
                                 capture([&] { return pearson(sev_all, ratio_all); }),
                                 static_cast<int>(sev_all.size())));
  const auto split = split_correlation(profiles);
  int n_lo = 0;
  for (double s : sev_all) n_lo += s < kSeverityCut ? 1 : 0;
  rows.push_back(correlation_row("dyadic_ratio~severity[<10]", split.below, n_lo));
  rows.push_back(correlation_row("dyadic_ratio~severity[>=10]", split.at_above,
                                 static_cast<int>(sev_all.size()) - n_lo));
  rows.push_back(correlation_row("response_time~severity",
                                 capture([&] { return pearson(sev_rt, rt); }),
                                 static_cast<int>(rt.size())));
  rows.push_back(correlation_row("pause_time~severity",
                                 capture([&] { return pearson(sev_pt, pt); }),
                                 static_cast<int>(pt.size())));

  for (int item = 0; item < kItemCount; ++item) {
    std::vector<double> nonzero, zero;
    for (const auto& p : profiles) {
      if (!p.items || !p.timing_available || !p.timing.response_time) continue;
      ((*p.items)[item] > 0 ? nonzero : zero).push_back(*p.timing.response_time);
    }
    const auto t = capture([&] { return t_test_welch(nonzero, zero); });
    StatRow row;
    row.analysis = "response_time:item" + std::to_string(item + 1) + "[>0 vs 0]";
    row.n = static_cast<int>(nonzero.size() + zero.size());
    if (t.value) {
      row.statistic = t.value->t;
      row.p_value = t.value->p_two_sided;
      row.detail = t.value->df;
    } else {
      row.note = t.error;
    }
    rows.push_back(std::move(row));
  }

  for (Group g : {Group::Healthy, Group::Depression, Group::Psychosis}) {
    std::vector<double> sev, resp;
    for (const auto& p : profiles) {
      if (p.group != g) continue;
      if (p.severity) sev.push_back(*p.severity);
      if (p.timing_available && p.timing.response_time) resp.push_back(*p.timing.response_time);
    }
    const std::string name(group_name(g));
    for (auto [label, values] : {std::pair<const char*, const std::vector<double>*>{"severity", &sev},
                                 {"response_time", &resp}}) {
      const auto s = capture([&] { return group_summary(*values); });
      StatRow row;
      row.analysis = std::string(label) + ":group[" + name + "]";
      row.n = static_cast<int>(values->size());
      if (s.value) {
        row.statistic = s.value->mean;
        row.detail = s.value->std;
      } else {
        row.note = s.error;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

}  // namespace

std::string stat_rows_to_csv(std::span<const StatRow> rows) {
  std::string out = "analysis,n,statistic,p_value,detail,note\n";
  for (const auto& r : rows) {
    out += r.analysis + ',' + std::to_string(r.n) + ',' + num(r.statistic) + ',' + num(r.p_value) +
           ',' + num(r.detail) + ',' + r.note + '\n';
  }
  return out;
}

std::string stat_rows_summary(std::span<const StatRow> rows) {
  std::string out;
  char buf[256];
  for (const auto& r : rows) {
    if (!r.note.empty()) {
      std::snprintf(buf, sizeof buf, "%-40s n=%-3d unavailable (%s)\n", r.analysis.c_str(), r.n,
                    r.note.c_str());
    } else if (r.p_value) {
      std::snprintf(buf, sizeof buf, "%-40s n=%-3d stat=%8.3f p=%.3f\n", r.analysis.c_str(), r.n,
                    *r.statistic, *r.p_value);
    } else {
      std::snprintf(buf, sizeof buf, "%-40s n=%-3d %.2f +/- %.2f\n", r.analysis.c_str(), r.n,
                    *r.statistic, r.detail.value_or(0.0));
    }
    out += buf;
  }
  return out;
}

}  // namespace dyad
