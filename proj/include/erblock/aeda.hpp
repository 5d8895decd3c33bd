#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "erblock/candidates.hpp"
#include "erblock/record.hpp"

namespace erblock::aeda {

/// Relative weights of the phonetic, letter-form and keyboard terms.
struct Weights {
  double omega = 1.0 / 3.0;
  double lambda = 1.0 / 3.0;
  double sigma = 1.0 / 3.0;
};

/// Counts lookups that fell back to similarity 0 for an unmapped character.
struct Warnings {
  std::uint64_t unmapped = 0;
};

/// Character similarity tables. Pairs not listed have similarity 0; a
/// character is always fully similar to itself.
class CostTables {
 public:
  /// Bundled defaults: Arabic 101 keyboard, confusable-class phonetic and
  /// letter-form tables, psi = 12, equal weights.
  static CostTables defaults();

  /// Reads the three table files. Throws Error(Io), Error(Parse) for a
  /// malformed line, Error(Config) for conflicting duplicate entries or a
  /// broken invariant.
  static CostTables load(const std::filesystem::path& phonetic,
                         const std::filesystem::path& letterform,
                         const std::filesystem::path& keyboard, double psi, Weights weights);
  static CostTables parse(std::istream& phonetic, std::istream& letterform,
                          std::istream& keyboard, double psi, Weights weights);

  double phonetic(char32_t a, char32_t b) const noexcept { return lookup(phonetic_, a, b); }
  double letterform(char32_t a, char32_t b) const noexcept { return lookup(letterform_, a, b); }
  std::optional<std::pair<double, double>> key(char32_t c) const;

  double psi() const noexcept { return psi_; }
  const Weights& weights() const noexcept { return weights_; }
  /// Throws Error(Parameter) unless weights are non-negative, finite and not
  /// all zero.
  void set_weights(Weights weights);
  /// Throws Error(Config) if psi <= 0 or two mapped keys lie farther apart.
  void set_psi(double psi);

  void set_phonetic(char32_t a, char32_t b, double similarity);
  void set_letterform(char32_t a, char32_t b, double similarity);
  void set_key(char32_t c, double x, double y);

  /// Largest distance between two mapped keys.
  double max_key_distance() const noexcept;
  std::span<const char32_t> keyboard_chars() const noexcept { return key_chars_; }

 private:
  using PairMap = std::unordered_map<std::uint64_t, double>;
  static double lookup(const PairMap& map, char32_t a, char32_t b) noexcept;
  static void put(PairMap& map, char32_t a, char32_t b, double similarity);

  PairMap phonetic_;
  PairMap letterform_;
  std::unordered_map<char32_t, std::pair<double, double>> keyboard_;
  std::vector<char32_t> key_chars_;
  double psi_ = 12.0;
  Weights weights_;
};

/// 1 - euclidean key distance / psi; 0 (with a warning) if either character
/// has no key.
double keyboard_sim(char32_t a, char32_t b, const CostTables& tables,
                    Warnings* warnings = nullptr);

/// Replacement cost: 0 for a == b, otherwise the weighted mean of the three
/// costs (1 - similarity).
double frc(char32_t a, char32_t b, const CostTables& tables, Warnings* warnings = nullptr);

/// Edit distance with substitution cost frc and unit insertion/deletion,
/// divided by the longer length (0 for two empty strings).
double name_cost(std::u32string_view s, std::u32string_view t, const CostTables& tables,
                 Warnings* warnings = nullptr);
/// UTF-8 convenience overload.
double name_cost(std::string_view s, std::string_view t, const CostTables& tables,
                 Warnings* warnings = nullptr);

struct ScoredPair {
  IndexPair pair;
  double cost = 0.0;
};

/// Keeps the within-block pairs whose name cost is at or below the
/// nearest-rank `percentile` of the block's costs. Blocks of fewer than two
/// records yield nothing. Throws Error(Parameter) unless 0 < percentile <= 100.
std::vector<ScoredPair> refine_block(std::span<const std::uint32_t> block, const Corpus& corpus,
                                     const CostTables& tables, double percentile,
                                     Warnings* warnings = nullptr);

struct RefineOptions {
  double percentile = 10.0;
  unsigned workers = 1;
  /// Error(SizeGuard) if the partition holds more within-block pairs.
  std::uint64_t max_pairs = 200'000'000;
};

/// refine_block over every block of a partition; sorted by pair.
std::vector<ScoredPair> refine_partition(const Partition& partition, const Corpus& corpus,
                                         const CostTables& tables, const RefineOptions& options,
                                         Warnings* warnings = nullptr);

/// 50 equal bins over [0, 1]; zero costs are left out.
struct Histogram {
  static constexpr std::size_t kBins = 50;
  std::array<std::uint64_t, kBins> counts{};
  std::uint64_t total = 0;
  std::uint64_t excluded_zero = 0;
  std::optional<double> mean;  // over the non-zero costs

  /// CSV `bin_low,bin_high,count`.
  void write_csv(std::ostream& out) const;
};

Histogram cost_histogram(std::span<const double> costs);

}  // namespace erblock::aeda
