#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace erblock {

/// Unordered pair of corpus positions, smaller position first.
struct IndexPair {
  std::uint32_t a = 0;
  std::uint32_t b = 0;

  static IndexPair canonical(std::uint32_t x, std::uint32_t y) noexcept {
    return x < y ? IndexPair{x, y} : IndexPair{y, x};
  }

  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

/// Candidate pairs produced by a blocking method, addressed by corpus
/// position. Implementations answer membership without materializing the
/// full pair set, which can be quadratic.
class CandidateSource {
 public:
  virtual ~CandidateSource() = default;

  virtual std::size_t record_count() const noexcept = 0;
  virtual bool contains(std::uint32_t a, std::uint32_t b) const = 0;
  /// Number of distinct candidate pairs.
  virtual std::uint64_t count() const = 0;
  /// All distinct candidate pairs, sorted.
  virtual std::vector<IndexPair> pairs() const = 0;
};

/// Explicit sorted pair list.
class PairList final : public CandidateSource {
 public:
  PairList(std::size_t records, std::vector<IndexPair> pairs);

  std::size_t record_count() const noexcept override { return records_; }
  bool contains(std::uint32_t a, std::uint32_t b) const override;
  std::uint64_t count() const override { return pairs_.size(); }
  std::vector<IndexPair> pairs() const override { return pairs_; }
  std::span<const IndexPair> view() const noexcept { return pairs_; }

 private:
  std::size_t records_;
  std::vector<IndexPair> pairs_;
};

/// Disjoint blocks covering every record (KLSH clusters, conjunction rules).
class Partition final : public CandidateSource {
 public:
  /// `block_of[i]` is the block of record i; negative marks a singleton.
  explicit Partition(std::vector<std::int64_t> block_of);

  std::size_t record_count() const noexcept override { return block_of_.size(); }
  bool contains(std::uint32_t a, std::uint32_t b) const override;
  std::uint64_t count() const override;
  std::vector<IndexPair> pairs() const override;

  /// Blocks as member lists, ordered by smallest member; singletons included.
  std::vector<std::vector<std::uint32_t>> blocks() const;
  std::int64_t block_of(std::uint32_t record) const { return block_of_[record]; }
  std::size_t block_count() const;

 private:
  std::vector<std::int64_t> block_of_;
};

/// Sum over blocks of size*(size-1)/2.
std::uint64_t within_block_pairs(std::span<const std::vector<std::uint32_t>> blocks);

}  // namespace erblock
