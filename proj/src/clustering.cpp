#include "dyad/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyad/error.hpp"

namespace dyad {

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::DimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(Errc::ZeroVector, "cosine distance undefined");
  return std::clamp(1.0 - dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 2.0);
}

std::vector<double> l2_normalized(std::span<const double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) throw Error(Errc::ZeroVector, "cannot normalize");
  norm = std::sqrt(norm);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

std::vector<std::vector<std::string>> ClusterAssignment::members() const {
  std::vector<std::vector<std::string>> out(n_clusters);
  for (const auto& [id, k] : assignment) out[k].push_back(id);
  return out;
}

Dendrogram build_dendrogram(const EmbeddingTable& table) {
  if (table.empty()) throw Error(Errc::EmptyTable, "nothing to cluster");
  Dendrogram d;
  for (const auto& [id, vec] : table.entries()) {
    d.ids.push_back(id);
    d.unit.push_back(l2_normalized(vec));
  }
  const std::size_t n = d.ids.size();

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < table.dim(); ++k) dot += d.unit[i][k] * d.unit[j][k];
      const double dij = std::clamp(1.0 - dot, 0.0, 2.0);
      dist[i * n + j] = dij;
      dist[j * n + i] = dij;
    }
  }

  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<double> size(n, 1.0);
  d.merges.reserve(n - 1);
  while (active.size() > 1) {
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    double best = dist[active[0] * n + active[1]];
    for (std::size_t x = 0; x < active.size(); ++x) {
      const double* row = &dist[active[x] * n];
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        if (row[active[y]] < best) {
          best = row[active[y]];
          best_a = x;
          best_b = y;
        }
      }
    }
    const std::size_t a = active[best_a];
    const std::size_t b = active[best_b];
    d.merges.push_back({static_cast<int>(a), static_cast<int>(b), best});

    // Lance-Williams update for average linkage.
    const double wa = size[a];
    const double wb = size[b];
    for (std::size_t k : active) {
      if (k == a || k == b) continue;
      const double merged = (wa * dist[a * n + k] + wb * dist[b * n + k]) / (wa + wb);
      dist[a * n + k] = merged;
      dist[k * n + a] = merged;
    }
    size[a] = wa + wb;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return d;
}

namespace {

std::vector<double> mean_direction(const std::vector<const std::vector<double>*>& members) {
  std::vector<double> sum(members.front()->size(), 0.0);
  for (const auto* m : members) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*m)[k];
  }
  double norm = 0.0;
  for (double x : sum) norm += x * x;
  if (norm == 0.0) return *members.front();  // antipodal members cancel out
  norm = std::sqrt(norm);
  for (double& x : sum) x /= norm;
  return sum;
}

}  // namespace

ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, double threshold) {
  const std::size_t n = dendrogram.ids.size();
  std::vector<std::size_t> slot(n);
  std::iota(slot.begin(), slot.end(), 0);
  for (const auto& m : dendrogram.merges) {
    if (m.height > threshold) break;
    for (auto& s : slot) {
      if (s == static_cast<std::size_t>(m.b)) s = static_cast<std::size_t>(m.a);
    }
  }

  std::vector<int> dense(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dense[slot[i]] < 0) dense[slot[i]] = next++;
  }
  ClusterAssignment c;
  c.n_clusters = next;
  std::vector<std::vector<const std::vector<double>*>> members(next);
  for (std::size_t i = 0; i < n; ++i) {
    const int k = dense[slot[i]];
    c.assignment.emplace(dendrogram.ids[i], k);
    members[k].push_back(&dendrogram.unit[i]);
  }
  c.centroids.reserve(next);
  for (const auto& m : members) c.centroids.push_back(mean_direction(m));
  return c;
}

ClusterAssignment cluster_segments(const EmbeddingTable& table, double threshold) {
  if (!(threshold > 0.0)) throw Error(Errc::InvalidArgument, "threshold must be > 0");
  return cut_dendrogram(build_dendrogram(table), threshold);
}

void recompute_centroids(ClusterAssignment& c, const EmbeddingTable& table) {
  std::vector<std::vector<std::vector<double>>> units(c.n_clusters);
  for (const auto& [id, k] : c.assignment) {
    const auto* v = table.find(id);
    if (!v) throw Error(Errc::InconsistentInputs, "no embedding for segment '" + id + "'");
    units[k].push_back(l2_normalized(*v));
  }
  c.centroids.clear();
  for (const auto& u : units) {
    if (u.empty()) throw Error(Errc::InconsistentInputs, "empty cluster");
    std::vector<const std::vector<double>*> ptrs;
    for (const auto& v : u) ptrs.push_back(&v);
    c.centroids.push_back(mean_direction(ptrs));
  }
}

}  // namespace dyad
