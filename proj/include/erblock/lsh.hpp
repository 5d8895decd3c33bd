#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "erblock/candidates.hpp"
#include "erblock/record.hpp"
#include "erblock/shingling.hpp"

namespace erblock {

/// Sorted, duplicate-free token ids.
using TokenSet = std::vector<TokenId>;
TokenSet make_token_set(std::vector<TokenId> tokens);

enum class HashMode { Classical, Doph, WeightedDoph };

std::string_view hash_mode_name(HashMode mode) noexcept;

/// (K, L) banding parameters: L tables, each keyed by K consecutive hash
/// values, for k = K*L values per record.
struct HashScheme {
  std::uint32_t K = 1;
  std::uint32_t L = 1;
  std::uint64_t seed = 0;
  HashMode mode = HashMode::Doph;

  std::size_t num_bins() const noexcept {
    return static_cast<std::size_t>(K) * static_cast<std::size_t>(L);
  }
  /// Throws Error(Parameter) if K or L is zero or k exceeds half the DOPH
  /// hash range.
  void validate() const;
};

/// Exactly K*L hash values. A sentinel signature stands for a record whose
/// weighted sample came out empty; it never collides with anything.
class HashSignature {
 public:
  static constexpr std::uint64_t kSentinelValue = std::numeric_limits<std::uint64_t>::max();

  HashSignature() = default;
  explicit HashSignature(std::vector<std::uint64_t> values) : values_(std::move(values)) {}
  static HashSignature sentinel(std::size_t length);

  std::span<const std::uint64_t> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint64_t operator[](std::size_t i) const { return values_[i]; }
  bool is_sentinel() const noexcept { return sentinel_; }

  friend bool operator==(const HashSignature&, const HashSignature&) = default;

 private:
  std::vector<std::uint64_t> values_;
  bool sentinel_ = false;
};

/// |a ∩ b| / |a ∪ b| over sorted sets; 1 when both are empty.
double jaccard(std::span<const TokenId> a, std::span<const TokenId> b);

/// Σ min / Σ max over the union of supports; 1 when both are empty.
double weighted_jaccard(const ShingleBag& x, const ShingleBag& y);

/// k independent seeded hashes, each minimized over the set.
/// Throws Error(Domain) for an empty set.
HashSignature minhash_classical(std::span<const TokenId> set, const HashScheme& scheme);

/// Instrumentation for the one-pass property.
struct DophCounters {
  std::uint64_t hash_calls = 0;
  std::uint64_t empty_bins = 0;
};

/// Densified one-permutation hashing: one seeded hash per token, the 63-bit
/// hash range cut into k equal bins keeping each bin's minimum offset, then
/// every empty bin takes the value of the nearest non-empty bin to its right
/// (circularly) plus steps * C, with C = ceil(2^63 / k) the bin width.
/// Throws Error(Domain) for an empty set.
HashSignature doph(std::span<const TokenId> set, const HashScheme& scheme,
                   DophCounters* counters = nullptr);

/// Bin width C used by doph for k bins.
std::uint64_t doph_bin_width(std::size_t k) noexcept;

/// Includes each token independently with probability weight / normalizer.
/// The uniform draw for a token depends only on (seed, token), so records
/// sharing a token share the draw. Throws Error(Parameter) unless normalizer
/// is positive and no weight exceeds it.
TokenSet sample_weighted(const ShingleBag& bag, double normalizer, std::uint64_t seed);

/// doph of sample_weighted(bag, normalizer, scheme.seed); a sentinel signature
/// when the sample is empty.
HashSignature weighted_doph(const ShingleBag& bag, double normalizer,
                            const HashScheme& scheme, DophCounters* counters = nullptr);

/// Exact binary expansion of an integer-multiple weighted bag: token i with
/// weight I*delta becomes composite ids (i, 1) .. (i, I), encoded as
/// (i << 32) | j. Test oracle for the weighted Jaccard identity; throws
/// Error(Domain) if a weight is not a multiple of delta and Error(SizeGuard)
/// past 10^6 composite ids.
TokenSet expand_exact(const ShingleBag& bag, double delta);

/// Digest of K consecutive signature values.
std::uint64_t band_key(std::span<const std::uint64_t> slots) noexcept;

/// L band keys of a signature (sentinels get a per-record unique key).
void band_keys(const HashSignature& signature, std::uint32_t K, std::uint32_t L,
               std::uint32_t record, std::span<std::uint64_t> out);

/// Overlapping blocks: one hash table per band, every record in exactly one
/// bucket per table.
class BlockAssignment final : public CandidateSource {
 public:
  /// `keys` is record-major, keys[record * tables + table].
  BlockAssignment(std::size_t records, std::uint32_t tables, std::vector<std::uint64_t> keys);

  std::uint32_t tables() const noexcept { return tables_; }
  std::uint64_t key(std::uint32_t record, std::uint32_t table) const {
    return keys_[static_cast<std::size_t>(record) * tables_ + table];
  }

  /// Calls fn(key, members) for every bucket of `table`, in key order.
  template <typename Fn>
  void for_each_bucket(std::uint32_t table, Fn&& fn) const {
    const std::uint32_t* order = order_.data() + static_cast<std::size_t>(table) * records_;
    std::size_t start = 0;
    while (start < records_) {
      const std::uint64_t k = key(order[start], table);
      std::size_t end = start + 1;
      while (end < records_ && key(order[end], table) == k) ++end;
      fn(k, std::span<const std::uint32_t>(order + start, end - start));
      start = end;
    }
  }

  std::size_t record_count() const noexcept override { return records_; }
  bool contains(std::uint32_t a, std::uint32_t b) const override;
  std::uint64_t count() const override;
  std::vector<IndexPair> pairs() const override;

  /// Index of the first table where a and b share a bucket.
  std::optional<std::uint32_t> first_table(std::uint32_t a, std::uint32_t b) const;
  /// Entry t counts the pairs whose first shared table is t; the prefix sums
  /// are the candidate counts of every table prefix.
  std::vector<std::uint64_t> first_collisions(unsigned workers = 1) const;

  /// Same keys restricted to the first `tables` tables.
  BlockAssignment prefix(std::uint32_t tables) const;

  /// Lines `table_index<TAB>band_key_hex<TAB>record_id`.
  void write_dump(std::ostream& out, std::span<const RecordId> ids) const;

 private:
  std::size_t records_;
  std::uint32_t tables_;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> order_;  // table-major, sorted by (key, record)
};

/// Throws Error(Parameter) if a signature length differs from K*L.
BlockAssignment build_blocks(std::span<const HashSignature> signatures,
                             const HashScheme& scheme);

/// Corpus-level pipeline: shingle sets (or weighted bags) to band keys
/// without keeping whole signatures in memory.
BlockAssignment hash_blocks(std::span<const TokenSet> sets, const HashScheme& scheme,
                            unsigned workers = 1);
BlockAssignment weighted_hash_blocks(std::span<const ShingleBag> bags, double normalizer,
                                     const HashScheme& scheme, unsigned workers = 1);

/// Largest component over all bags; the sampling normalizer.
double corpus_max_weight(std::span<const ShingleBag> bags) noexcept;

}  // namespace erblock
