#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "erblock/candidates.hpp"
#include "erblock/record.hpp"

namespace erblock::rules {

enum class FieldKey { Name, DateOfDeath, Governorate, Sex, Year, Month, Day };

inline constexpr std::size_t kFieldKeyCount = 7;

std::string_view key_name(FieldKey key) noexcept;
std::optional<FieldKey> parse_key(std::string_view name) noexcept;

/// Value of `key` for a record, or nullopt for missing data (empty field,
/// unknown sex, or a date component of an empty date).
std::optional<std::string_view> key_value(const Record& record, FieldKey key) noexcept;

/// Records are co-blocked iff they agree on every key. Keys are kept sorted
/// and unique.
class ConjunctionRule {
 public:
  /// Throws Error(Parameter) for an empty key list.
  explicit ConjunctionRule(std::vector<FieldKey> keys);

  const std::vector<FieldKey>& keys() const noexcept { return keys_; }
  std::uint32_t mask() const noexcept;
  std::string text() const;

  friend bool operator==(const ConjunctionRule&, const ConjunctionRule&) = default;

 private:
  std::vector<FieldKey> keys_;
};

/// Union of the candidate pairs of its rules.
class DisjunctionScheme {
 public:
  /// Throws Error(Parameter) for an empty rule list.
  explicit DisjunctionScheme(std::vector<ConjunctionRule> rules);

  /// Parses `year+governorate | month+year+governorate`.
  /// Throws Error(Parameter) on unknown keys or empty terms.
  static DisjunctionScheme parse(std::string_view text);

  const std::vector<ConjunctionRule>& rules() const noexcept { return rules_; }
  std::string text() const;

 private:
  std::vector<ConjunctionRule> rules_;
};

/// Groups records by their key tuple. A record missing any key is its own
/// singleton block.
Partition apply_conjunction(const Corpus& corpus, const ConjunctionRule& rule);

/// All within-block pairs, sorted.
std::vector<IndexPair> candidate_pairs(const Partition& partition);

/// Deduplicated union of every rule's pairs.
std::vector<IndexPair> apply_disjunction(const Corpus& corpus, const DisjunctionScheme& scheme);

/// Disjunction candidates answered by membership per rule; the distinct pair
/// count comes from inclusion-exclusion over rule subsets, whose
/// intersections are themselves conjunctions over the merged keys.
class DisjunctionBlocking final : public CandidateSource {
 public:
  DisjunctionBlocking(const Corpus& corpus, const DisjunctionScheme& scheme);

  std::size_t record_count() const noexcept override { return records_; }
  bool contains(std::uint32_t a, std::uint32_t b) const override;
  std::uint64_t count() const override { return count_; }
  std::vector<IndexPair> pairs() const override;

  const std::vector<Partition>& partitions() const noexcept { return partitions_; }

 private:
  std::size_t records_;
  std::vector<Partition> partitions_;
  std::uint64_t count_ = 0;
};

/// Schemes enumerate_schemes would return for `key_count` distinct keys:
/// C conjunctions plus C(C-1)/2 pairs.
std::uint64_t scheme_count(std::size_t key_count, std::size_t max_rule_size);

/// Every conjunction over `keys` of size 1..max_rule_size (as single-rule
/// schemes), followed by every unordered pair of distinct such conjunctions.
/// Throws Error(Parameter) if max_rule_size is 0 or exceeds |keys|, and
/// Error(SizeGuard) if the result would exceed 10^5 schemes.
std::vector<DisjunctionScheme> enumerate_schemes(std::vector<FieldKey> keys,
                                                 std::size_t max_rule_size);

}  // namespace erblock::rules
