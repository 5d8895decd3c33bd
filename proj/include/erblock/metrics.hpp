#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "erblock/candidates.hpp"
#include "erblock/record.hpp"
#include "erblock/shingling.hpp"

namespace erblock {

struct BlockingMetrics {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  std::optional<double> recall;  // missing without labeled matches
  double precision = 1.0;        // 1 when nothing labeled was proposed
  std::optional<double> rr;      // missing without labeled pairs
  std::uint64_t candidate_count = 0;
  std::uint64_t total_pairs = 0;  // n(n-1)/2

  std::optional<double> fnr() const {
    if (!recall) return std::nullopt;
    return 1.0 - *recall;
  }
  double fpr() const { return 1.0 - precision; }
};

/// Fills recall, precision and rr from the four counts.
void finish_metrics(BlockingMetrics& m);

/// Candidate pairs in id space, canonical, sorted and unique. Unlabeled
/// candidates count toward candidate_count only.
BlockingMetrics confusion(std::span<const Pair> candidates, const TruthSet& truth,
                          std::uint64_t records);

/// 1 - (s_M + s_N) / (n_M + n_N); missing when nothing is labeled.
std::optional<double> reduction_ratio(std::span<const Pair> candidates, const TruthSet& truth);

/// Truth translated to corpus positions.
struct IndexedTruth {
  std::vector<IndexPair> matches;
  std::vector<IndexPair> nonmatches;
};

/// Throws Error(Referential) for an id outside the corpus.
IndexedTruth index_truth(const TruthSet& truth, const Corpus& corpus);

BlockingMetrics evaluate(const CandidateSource& candidates, const IndexedTruth& truth);

enum class SweepMethod { Classical, Doph, WeightedDoph, Klsh, Rules };

std::string_view sweep_method_name(SweepMethod method) noexcept;

/// Cells run in the order shingle, K, L, seed. For klsh the K axis holds the
/// projection count p and the L axis the cluster count c; rules cells run
/// once per scheme.
struct SweepGrid {
  SweepMethod method = SweepMethod::Doph;
  std::vector<std::uint32_t> K;
  std::vector<std::uint32_t> L;
  std::vector<std::size_t> shingles;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> schemes;
  std::vector<Field> fields = default_fields();
  Weighting weighting = Weighting::Counts;  // weighted-doph bags
  std::size_t kmeans_iterations = 100;
  unsigned workers = 1;
  /// Cells for which this returns false are neither computed nor emitted.
  std::function<bool(const std::string& method, std::size_t shingle, std::uint32_t K,
                     std::uint32_t L, std::uint64_t seed)>
      include;

  /// Throws Error(Parameter) for an empty axis or zero entry.
  void validate() const;
  std::size_t cell_count() const;
};

/// K, L and shingle axes used in the hashing experiments, L divided by
/// `divisor` (rounded, at least 1) for desk-scale runs.
SweepGrid reference_grid(SweepMethod method, std::uint32_t divisor);

struct SweepRow {
  std::string method;
  std::size_t shingle = 0;
  std::uint32_t K = 0;
  std::uint32_t L = 0;
  std::uint64_t seed = 0;
  std::optional<BlockingMetrics> metrics;  // empty when the cell failed
  std::string error;
  double millis = 0.0;
};

/// Evaluates every cell and passes rows to `emit` in grid order. Classical
/// cells sharing (shingle, K, seed) come from one signature pass at the
/// largest L and report the time of that pass plus evaluation. A failing
/// cell produces a row carrying the error and the sweep continues.
void sweep(const Corpus& corpus, const TruthSet& truth, const SweepGrid& grid,
           const std::function<void(const SweepRow&)>& emit);

void write_sweep_header(std::ostream& out);
/// NA fills metric columns of failed cells and missing values.
void write_sweep_row(std::ostream& out, const SweepRow& row);

}  // namespace erblock
