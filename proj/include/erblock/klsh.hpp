#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "erblock/candidates.hpp"
#include "erblock/record.hpp"
#include "erblock/shingling.hpp"

namespace erblock::klsh {

/// p Gaussian random directions over token ids. Entries are generated on
/// demand from (seed, projection, token), so no D x p matrix is stored.
class ProjectionMatrix {
 public:
  /// Throws Error(Parameter) for p == 0.
  ProjectionMatrix(std::size_t p, std::uint64_t seed);

  std::size_t dimensions() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Standard-normal entry g_j(token).
  double entry(std::size_t projection, TokenId token) const noexcept;

 private:
  std::size_t p_;
  std::uint64_t seed_;
};

/// Coordinate j = Σ weight(t) * g_j(t). The empty bag maps to the origin.
std::vector<double> project(const ShingleBag& bag, const ProjectionMatrix& proj);

/// Row-major n x dim point set.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
  unsigned workers = 1;
};

struct ClusterModel {
  std::size_t clusters = 0;
  PointSet centroids;
  std::vector<std::uint32_t> assignment;  // by record position
  /// Sum of squared distances to the assigned centroid: entry 0 after the
  /// initial assignment, then one entry per Lloyd iteration.
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;

  double mean_cluster_size() const noexcept {
    return clusters == 0 ? 0.0 : static_cast<double>(assignment.size()) / clusters;
  }
  Partition partition() const;
  /// Lines `record_id<TAB>cluster_id`.
  void write_dump(std::ostream& out, std::span<const RecordId> ids) const;
};

/// Lloyd's algorithm from seeded k-means++ initialization. Nearest-centroid
/// ties go to the lowest cluster id; a cluster left empty is reseeded at the
/// point farthest from its centroid. Throws Error(Parameter) unless
/// 1 <= c <= n.
ClusterModel kmeans_block(const PointSet& points, std::size_t c, std::uint64_t seed,
                          const KMeansOptions& options = {});

struct KlshParams {
  std::size_t shingle = 1;
  std::size_t projections = 20;
  std::size_t clusters = 1;
  std::uint64_t seed = 0;
  std::vector<Field> fields = default_fields();
  KMeansOptions kmeans;
};

/// shingle -> IDF weight -> project -> k-means.
ClusterModel klsh_assign(const Corpus& corpus, const KlshParams& params);

}  // namespace erblock::klsh
