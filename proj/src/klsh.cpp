#include "erblock/klsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "erblock/error.hpp"
#include "erblock/hashing.hpp"
#include "erblock/parallel.hpp"

namespace erblock::klsh {

namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) noexcept {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - y[d];
    s += diff * diff;
  }
  return s;
}

// Nearest centroid with ties to the lowest id.
std::pair<std::uint32_t, double> nearest(std::span<const double> x, const PointSet& centroids,
                                         std::size_t c) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c; ++j) {
    const double d = squared_distance(x, centroids.point(j));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return {best, best_d};
}

double objective(const PointSet& points, const PointSet& centroids,
                 std::span<const std::uint32_t> assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points.point(i), centroids.point(assignment[i]));
  }
  return total;
}

PointSet seed_centroids(const PointSet& points, std::size_t c, std::uint64_t seed) {
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  PointSet centroids{points.dim, {}};
  centroids.coords.reserve(c * points.dim);
  auto take = [&](std::size_t i) {
    const auto p = points.point(i);
    centroids.coords.insert(centroids.coords.end(), p.begin(), p.end());
  };

  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(to_unit(rng()) * static_cast<double>(n));
  first = std::min(first, n - 1);
  take(first);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.point(i), points.point(first));

  for (std::size_t j = 1; j < c; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = to_unit(rng()) * total;
      double run = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        run += d2[i];
        if (d2[i] > 0.0 && run > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every remaining point coincides with a chosen centroid.
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    take(pick);
    chosen[pick] = true;
    const auto center = points.point(pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.point(i), center));
    }
  }
  return centroids;
}

}  // namespace

ProjectionMatrix::ProjectionMatrix(std::size_t p, std::uint64_t seed) : p_(p), seed_(seed) {
  if (p == 0) fail(ErrorCode::Parameter, "number of projections must be >= 1");
}

double ProjectionMatrix::entry(std::size_t projection, TokenId token) const noexcept {
  // Box-Muller on two counter-based uniforms.
  const std::uint64_t base = derive_seed(seed_, projection);
  const double u1 = 1.0 - to_unit(seeded_hash(base, 2 * token));
  const double u2 = to_unit(seeded_hash(base, 2 * token + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> project(const ShingleBag& bag, const ProjectionMatrix& proj) {
  std::vector<double> out(proj.dimensions(), 0.0);
  for (const auto& e : bag.entries()) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += e.weight * proj.entry(j, e.token);
  }
  return out;
}

Partition ClusterModel::partition() const {
  std::vector<std::int64_t> block_of(assignment.begin(), assignment.end());
  return Partition(std::move(block_of));
}

void ClusterModel::write_dump(std::ostream& out, std::span<const RecordId> ids) const {
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out << ids[i] << '\t' << assignment[i] << '\n';
  }
}

ClusterModel kmeans_block(const PointSet& points, std::size_t c, std::uint64_t seed,
                          const KMeansOptions& options) {
  const std::size_t n = points.size();
  if (c == 0 || c > n) {
    fail(ErrorCode::Parameter, "cluster count " + std::to_string(c) +
                                   " must lie in [1, " + std::to_string(n) + "]");
  }
  const std::size_t dim = points.dim;

  ClusterModel model;
  model.clusters = c;
  model.centroids = seed_centroids(points, c, seed);
  model.assignment.assign(n, 0);

  std::vector<double> dist(n);
  auto assign = [&]() {
    bool changed = false;
    std::vector<char> moved(n, 0);
    parallel_for(n, options.workers, [&](std::size_t i) {
      const auto [best, d] = nearest(points.point(i), model.centroids, c);
      if (best != model.assignment[i]) moved[i] = 1;
      model.assignment[i] = best;
      dist[i] = d;
    });
    for (char m : moved) changed |= (m != 0);
    return changed;
  };

  // Reseed each empty cluster at the farthest point of a cluster that can
  // spare one; returns whether anything moved.
  auto reseed_empty = [&]() {
    bool reseeded = false;
    std::vector<std::size_t> sizes(c, 0);
    for (std::uint32_t a : model.assignment) ++sizes[a];
    for (std::size_t j = 0; j < c; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[model.assignment[i]] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      --sizes[model.assignment[far]];
      model.assignment[far] = static_cast<std::uint32_t>(j);
      ++sizes[j];
      dist[far] = 0.0;
      const auto p = points.point(far);
      std::copy(p.begin(), p.end(), model.centroids.coords.begin() + j * dim);
      reseeded = true;
    }
    return reseeded;
  };

  auto update = [&]() {
    std::vector<double> sums(c * dim, 0.0);
    std::vector<std::size_t> sizes(c, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t a = model.assignment[i];
      const auto p = points.point(i);
      for (std::size_t d = 0; d < dim; ++d) sums[a * dim + d] += p[d];
      ++sizes[a];
    }
    for (std::size_t j = 0; j < c; ++j) {
      for (std::size_t d = 0; d < dim; ++d) {
        model.centroids.coords[j * dim + d] = sums[j * dim + d] / static_cast<double>(sizes[j]);
      }
    }
  };

  assign();
  reseed_empty();
  model.objective.push_back(objective(points, model.centroids, model.assignment));
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    update();
    const bool changed = assign();
    const bool reseeded = reseed_empty();
    model.objective.push_back(objective(points, model.centroids, model.assignment));
    model.iterations = it + 1;
    if (!changed && !reseeded) {
      model.converged = true;
      break;
    }
  }
  return model;
}

ClusterModel klsh_assign(const Corpus& corpus, const KlshParams& params) {
  const Vocabulary vocab = Vocabulary::build(corpus, params.shingle, params.fields);
  const std::vector<ShingleBag> bags =
      corpus_bags(corpus, vocab, Weighting::Idf, params.kmeans.workers);
  const ProjectionMatrix proj(params.projections, derive_seed(params.seed, 0x9B07));
  PointSet points{params.projections, std::vector<double>(corpus.size() * params.projections)};
  parallel_for(corpus.size(), params.kmeans.workers, [&](std::size_t i) {
    const auto x = project(bags[i], proj);
    std::copy(x.begin(), x.end(), points.coords.begin() + i * params.projections);
  });
  return kmeans_block(points, params.clusters, derive_seed(params.seed, 0x3EA5), params.kmeans);
}

}  // namespace erblock::klsh
