#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "uavplan/error.hpp"
#include "uavplan/geometry.hpp"
#include "uavplan/random.hpp"

namespace uavplan {

using Labels = std::vector<std::size_t>;

struct Cluster {
  std::vector<std::size_t> members;  // user indices, ascending
  Ellipse ellipse;
};

/// Users plus a set of clusters over (a subset of) them.
struct ClusterSet {
  std::vector<Point2> users;
  std::vector<Cluster> clusters;

  std::vector<Point2> member_points(const Cluster& c) const {
    std::vector<Point2> pts;
    pts.reserve(c.members.size());
    for (auto i : c.members) pts.push_back(users[i]);
    return pts;
  }
};

struct ClusteringConfig {
  int k_max = 8;
  int silhouette_buffer = 2;
  int max_outer_iterations = 50;
  std::uint64_t rng_seed = 1;
  FitConfig fit;

  void validate() const {
    if (k_max < 1) throw InvalidArgument("clustering: k_max must be >= 1");
    if (max_outer_iterations < 1) throw InvalidArgument("clustering: max_outer_iterations must be >= 1");
  }

  friend bool operator==(const ClusteringConfig& a, const ClusteringConfig& b) {
    return a.k_max == b.k_max && a.silhouette_buffer == b.silhouette_buffer &&
           a.max_outer_iterations == b.max_outer_iterations && a.rng_seed == b.rng_seed &&
           a.fit.tolerance == b.fit.tolerance && a.fit.max_iterations == b.fit.max_iterations &&
           a.fit.min_semi_axis == b.fit.min_semi_axis;
  }
};

/// One outer pass of the ellipse-clustering loop.
struct IterationRecord {
  std::size_t input_users = 0;  // |U_cond| entering the pass
  std::size_t remaining = 0;    // |U_cond| after intersection removal
  std::size_t k_origin = 0;
  std::size_t clusters_formed = 0;
  int phase = 1;
  std::vector<std::size_t> intersecting;  // indices into this pass's clusters
};

struct AlgorithmTrace {
  std::vector<IterationRecord> iterations;
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(AlgorithmTrace trace)
      : Error("no convergence"), trace_(std::move(trace)) {}
  const AlgorithmTrace& trace() const noexcept { return trace_; }

 private:
  AlgorithmTrace trace_;
};

// ---------------------------------------------------------------------------
// Hierarchical clustering

struct Merge {
  std::size_t a;
  std::size_t b;
  double height;
};

/// Ward dendrogram (n - 1 merges, ascending height) by the nearest-neighbour
/// chain algorithm on squared Euclidean distances.
inline std::vector<Merge> ward_dendrogram(std::span<const Point2> points) {
  const std::size_t n = points.size();
  std::vector<Merge> merges;
  if (n < 2) return merges;

  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Point2 d = points[i] - points[j];
      dist[i * n + j] = dot(d, d);
    }
  std::vector<double> size(n, 1.0);
  std::vector<char> active(n, 1);
  std::vector<std::size_t> chain;
  merges.reserve(n - 1);

  for (std::size_t remaining = n; remaining > 1;) {
    if (chain.empty()) {
      std::size_t first = 0;
      while (!active[first]) ++first;
      chain.push_back(first);
    }
    const std::size_t top = chain.back();
    const std::size_t prev = chain.size() > 1 ? chain[chain.size() - 2] : n;
    std::size_t nearest = prev;
    double best = prev < n ? dist[top * n + prev] : std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == top) continue;
      if (dist[top * n + k] < best) {
        best = dist[top * n + k];
        nearest = k;
      }
    }
    if (nearest != prev) {
      chain.push_back(nearest);
      continue;
    }
    chain.pop_back();
    chain.pop_back();
    const std::size_t keep = std::min(top, prev);
    const std::size_t gone = std::max(top, prev);
    merges.push_back({keep, gone, best});
    const double si = size[keep], sj = size[gone];
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == keep || k == gone) continue;
      const double sk = size[k];
      const double updated =
          ((si + sk) * dist[keep * n + k] + (sj + sk) * dist[gone * n + k] - sk * best) /
          (si + sj + sk);
      dist[keep * n + k] = dist[k * n + keep] = updated;
    }
    active[gone] = 0;
    size[keep] = si + sj;
    --remaining;
  }
  std::stable_sort(merges.begin(), merges.end(),
                   [](const Merge& x, const Merge& y) { return x.height < y.height; });
  return merges;
}

/// Labels 0..k-1 from cutting a dendrogram of `n` points; labels are
/// numbered in order of first appearance.
inline Labels cut_dendrogram(std::span<const Merge> merges, std::size_t n, std::size_t k) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m + k < n; ++m) {
    const auto ra = find(merges[m].a), rb = find(merges[m].b);
    parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  Labels labels(n);
  std::vector<std::size_t> label_of(n, n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (label_of[r] == n) label_of[r] = next++;
    labels[i] = label_of[r];
  }
  return labels;
}

inline Labels ward_linkage(std::span<const Point2> points, std::size_t k) {
  if (k < 1 || k > points.size()) throw InvalidArgument("ward_linkage: k out of range");
  const auto merges = ward_dendrogram(points);
  return cut_dendrogram(merges, points.size(), k);
}

namespace detail {

inline std::vector<double> pairwise_distances(std::span<const Point2> points) {
  const std::size_t n = points.size();
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = distance(points[i], points[j]);
  return d;
}

inline double silhouette(std::span<const double> dist, std::size_t n, const Labels& labels) {
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);
  std::vector<std::size_t> count(k, 0);
  for (auto l : labels) ++count[l];
  std::size_t used = 0;
  for (auto c : count) used += c > 0;
  if (used < 2) throw InvalidArgument("silhouette_index: need at least two clusters");

  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (count[labels[i]] < 2) continue;  // singleton: contributes 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) sums[labels[j]] += dist[i * n + j];
    const double a = sums[labels[i]] / static_cast<double>(count[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != labels[i] && count[c] > 0) b = std::min(b, sums[c] / static_cast<double>(count[c]));
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace detail

/// Mean silhouette width in [-1, 1].
inline double silhouette_index(std::span<const Point2> points, const Labels& labels) {
  if (labels.size() != points.size()) throw InvalidArgument("silhouette_index: label count mismatch");
  const auto dist = detail::pairwise_distances(points);
  return detail::silhouette(dist, points.size(), labels);
}

/// Number of clusters in {2, ..., min(k_limit, n)} whose Ward cut has the
/// largest silhouette; the smaller k wins ties. Returns 1 for fewer than two
/// points.
inline std::size_t select_k(std::span<const Point2> points, std::size_t k_limit) {
  const std::size_t n = points.size();
  if (n < 2) return 1;
  const std::size_t upper = std::max<std::size_t>(2, std::min(k_limit, n));
  const auto merges = ward_dendrogram(points);
  const auto dist = detail::pairwise_distances(points);
  std::size_t best_k = 2;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= upper; ++k) {
    const double s = detail::silhouette(dist, n, cut_dendrogram(merges, n, k));
    if (s > best) {
      best = s;
      best_k = k;
    }
  }
  return best_k;
}

// ---------------------------------------------------------------------------
// Divisive refinement

/// Local indices of a two-way split.
struct Split {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

/// 2-means with farthest-pair seeding. Returns nothing when the points cannot
/// be separated (fewer than two, or all coincident).
inline std::optional<Split> split_cluster(std::span<const Point2> points, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (n < 2) return std::nullopt;

  const auto farthest_from = [&](Point2 from) {
    std::size_t idx = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = distance(points[i], from);
      if (d > best) {
        best = d;
        idx = i;
      }
    }
    return idx;
  };
  Rng rng(seed);
  const std::size_t start = rng.index(n);
  const std::size_t s1 = farthest_from(points[start]);
  const std::size_t s2 = farthest_from(points[s1]);
  if (!(distance(points[s1], points[s2]) > 0.0)) return std::nullopt;

  Point2 centers[2] = {points[s1], points[s2]};
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int a = distance(points[i], centers[1]) < distance(points[i], centers[0]) ? 1 : 0;
      changed |= a != assign[i];
      assign[i] = a;
    }
    if (!changed) break;
    Point2 sum[2] = {};
    std::size_t cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] = sum[assign[i]] + points[i];
      ++cnt[assign[i]];
    }
    for (int c = 0; c < 2; ++c) {
      if (cnt[c] == 0) {
        // Re-seed an empty side with the point farthest from the other center.
        const std::size_t far = farthest_from(centers[1 - c]);
        assign[far] = c;
        centers[c] = points[far];
      } else {
        centers[c] = (1.0 / static_cast<double>(cnt[c])) * sum[c];
      }
    }
  }
  Split split;
  for (std::size_t i = 0; i < n; ++i) (assign[i] == 0 ? split.first : split.second).push_back(i);
  if (split.first.empty() || split.second.empty()) return std::nullopt;
  return split;
}

inline Point2 centroid(std::span<const Point2> points, std::span<const std::size_t> subset) {
  Point2 sum{};
  for (auto i : subset) sum = sum + points[i];
  return (1.0 / static_cast<double>(subset.size())) * sum;
}

/// Separation score of a split: centroid distance of the two parts over the
/// full major-axis length of the cluster ellipse.
inline double normalized_distance(std::span<const Point2> points, const Split& split,
                                  const Ellipse& ellipse) {
  const double gap = distance(centroid(points, split.first), centroid(points, split.second));
  return gap / (2.0 * ellipse.semi_axes().major);
}

inline double normalized_distance(std::span<const Point2> points, const Ellipse& ellipse,
                                  std::uint64_t seed) {
  const auto split = split_cluster(points, seed);
  if (!split) return -std::numeric_limits<double>::infinity();
  return normalized_distance(points, *split, ellipse);
}

namespace detail {

inline Cluster make_cluster(std::span<const Point2> users, std::vector<std::size_t> members,
                            const FitConfig& fit) {
  std::sort(members.begin(), members.end());
  std::vector<Point2> pts;
  pts.reserve(members.size());
  for (auto i : members) pts.push_back(users[i]);
  Ellipse e = mvee(pts, fit);
  return {std::move(members), e};
}

}  // namespace detail

/// Starting from one cluster over `subset`, repeatedly splits the cluster with
/// the largest normalized distance until `k_origin` clusters exist or nothing
/// can be split.
inline std::vector<Cluster> grow_to_k(std::span<const Point2> users,
                                      std::vector<std::size_t> subset, std::size_t k_origin,
                                      const ClusteringConfig& cfg) {
  struct Candidate {
    double score;
    std::optional<Split> split;  // member positions within the cluster
  };
  const auto evaluate = [&](const Cluster& c) {
    std::vector<Point2> pts;
    pts.reserve(c.members.size());
    for (auto i : c.members) pts.push_back(users[i]);
    auto split = split_cluster(pts, hash_indices(cfg.rng_seed, c.members));
    const double score = split ? normalized_distance(pts, *split, c.ellipse)
                               : -std::numeric_limits<double>::infinity();
    return Candidate{score, std::move(split)};
  };

  std::vector<Cluster> clusters;
  std::vector<Candidate> candidates;
  if (subset.empty()) return clusters;
  clusters.push_back(detail::make_cluster(users, std::move(subset), cfg.fit));
  candidates.push_back(evaluate(clusters.back()));

  while (clusters.size() < k_origin) {
    std::size_t target = 0;
    for (std::size_t m = 1; m < clusters.size(); ++m)
      if (candidates[m].score > candidates[target].score) target = m;
    if (!candidates[target].split) break;

    const Split& split = *candidates[target].split;
    std::vector<std::size_t> first, second;
    for (auto i : split.first) first.push_back(clusters[target].members[i]);
    for (auto i : split.second) second.push_back(clusters[target].members[i]);
    clusters[target] = detail::make_cluster(users, std::move(first), cfg.fit);
    candidates[target] = evaluate(clusters[target]);
    clusters.push_back(detail::make_cluster(users, std::move(second), cfg.fit));
    candidates.push_back(evaluate(clusters.back()));
  }
  return clusters;
}

inline ClusterSet grow_to_k(const std::vector<Point2>& points, std::size_t k_origin,
                            const ClusteringConfig& cfg = {}) {
  std::vector<std::size_t> all(points.size());
  std::iota(all.begin(), all.end(), 0);
  ClusterSet cs{points, {}};
  cs.clusters = grow_to_k(cs.users, std::move(all), k_origin, cfg);
  return cs;
}

// ---------------------------------------------------------------------------
// Intersection removal

/// Indices of clusters whose ellipse shares a user with some other cluster's
/// ellipse, considering the users of each pair.
inline std::vector<std::size_t> find_intersections(std::span<const Point2> users,
                                                   std::span<const Cluster> clusters) {
  const std::size_t k = clusters.size();
  std::vector<char> hit(k, 0);
  const auto shared = [&](const Cluster& from, const Ellipse& e1, const Ellipse& e2) {
    for (auto u : from.members)
      if (contains(e1, users[u]) && contains(e2, users[u])) return true;
    return false;
  };
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t n = m + 1; n < k; ++n) {
      if (hit[m] && hit[n]) continue;
      const auto& em = clusters[m].ellipse;
      const auto& en = clusters[n].ellipse;
      if (shared(clusters[m], em, en) || shared(clusters[n], em, en)) hit[m] = hit[n] = 1;
    }
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < k; ++m)
    if (hit[m]) out.push_back(m);
  return out;
}

inline std::vector<std::size_t> find_intersections(const ClusterSet& cs) {
  return find_intersections(cs.users, cs.clusters);
}

/// True when no user lies inside two different ellipses of `cs`.
inline bool footprints_disjoint(const ClusterSet& cs) {
  for (const auto& u : cs.users) {
    int inside = 0;
    for (const auto& c : cs.clusters) inside += contains(c.ellipse, u);
    if (inside > 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Full algorithm

struct ClusteringResult {
  std::size_t num_uavs = 0;
  ClusterSet clusters;
  AlgorithmTrace trace;
};

/// Partitions `users` into clusters whose fitted ellipses share no user.
///
/// Each pass picks a target cluster count (silhouette-guided in phase 1,
/// previous overlap count plus one in phase 2), grows that many clusters over
/// the still-unassigned users, finalizes the clusters that overlap nothing and
/// sends the users of the rest back for another pass. A new cluster whose
/// ellipse would swallow an already-finalized user also counts as overlapping.
inline ClusteringResult ellipse_clustering(const std::vector<Point2>& users,
                                           const ClusteringConfig& cfg = {}) {
  cfg.validate();
  if (users.empty()) throw InvalidArgument("ellipse_clustering: no users");
  for (const auto& p : users)
    if (!is_finite(p)) throw InvalidArgument("invalid point");

  ClusteringResult result;
  result.clusters.users = users;
  auto& finalized = result.clusters.clusters;
  std::vector<char> is_final(users.size(), 0);

  std::vector<std::size_t> pending(users.size());
  std::iota(pending.begin(), pending.end(), 0);
  std::size_t k_max = static_cast<std::size_t>(cfg.k_max);
  int phase = 1;

  for (int pass = 0; !pending.empty(); ++pass) {
    if (pass >= cfg.max_outer_iterations) throw NoConvergence(result.trace);

    IterationRecord rec;
    rec.input_users = pending.size();
    rec.phase = phase;
    if (phase == 1) {
      std::vector<Point2> pts;
      for (auto i : pending) pts.push_back(users[i]);
      rec.k_origin = select_k(pts, k_max + static_cast<std::size_t>(cfg.silhouette_buffer));
    } else {
      rec.k_origin = k_max + 1;
    }

    auto current = grow_to_k(users, pending, rec.k_origin, cfg);
    rec.clusters_formed = current.size();

    auto overlapping = find_intersections(users, current);
    std::vector<char> flagged(current.size(), 0);
    for (auto m : overlapping) flagged[m] = 1;
    for (std::size_t m = 0; m < current.size(); ++m) {
      if (flagged[m]) continue;
      for (std::size_t u = 0; u < users.size() && !flagged[m]; ++u)
        if (is_final[u] && contains(current[m].ellipse, users[u])) flagged[m] = 1;
    }
    rec.intersecting.clear();
    for (std::size_t m = 0; m < current.size(); ++m)
      if (flagged[m]) rec.intersecting.push_back(m);

    pending.clear();
    for (std::size_t m = 0; m < current.size(); ++m) {
      if (flagged[m]) {
        pending.insert(pending.end(), current[m].members.begin(), current[m].members.end());
      } else {
        for (auto u : current[m].members) is_final[u] = 1;
        finalized.push_back(std::move(current[m]));
      }
    }
    std::sort(pending.begin(), pending.end());
    rec.remaining = pending.size();

    const std::size_t overlap_count = rec.intersecting.size();
    phase = (overlap_count > 0 && overlap_count == rec.clusters_formed) ? 2 : 1;
    k_max = overlap_count;
    result.trace.iterations.push_back(std::move(rec));
  }
  result.num_uavs = finalized.size();
  return result;
}

}  // namespace uavplan
