#include "erblock/candidates.hpp"

#include <algorithm>
#include <unordered_map>

#include "erblock/error.hpp"

namespace erblock {

PairList::PairList(std::size_t records, std::vector<IndexPair> pairs)
    : records_(records), pairs_(std::move(pairs)) {
  for (IndexPair& p : pairs_) {
    if (p.a == p.b || p.b >= records_ || p.a >= records_) {
      fail(ErrorCode::Domain, "pair outside corpus or self-pair");
    }
    p = IndexPair::canonical(p.a, p.b);
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

bool PairList::contains(std::uint32_t a, std::uint32_t b) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), IndexPair::canonical(a, b));
}

Partition::Partition(std::vector<std::int64_t> block_of) : block_of_(std::move(block_of)) {}

bool Partition::contains(std::uint32_t a, std::uint32_t b) const {
  return a != b && block_of_[a] >= 0 && block_of_[a] == block_of_[b];
}

std::uint64_t Partition::count() const {
  std::unordered_map<std::int64_t, std::uint64_t> sizes;
  for (std::int64_t id : block_of_) {
    if (id >= 0) ++sizes[id];
  }
  std::uint64_t total = 0;
  for (const auto& [id, size] : sizes) total += size * (size - 1) / 2;
  return total;
}

std::vector<std::vector<std::uint32_t>> Partition::blocks() const {
  std::vector<std::vector<std::uint32_t>> out;
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::uint32_t i = 0; i < block_of_.size(); ++i) {
    const std::int64_t id = block_of_[i];
    if (id < 0) {
      out.push_back({i});
      continue;
    }
    auto [it, inserted] = slot.emplace(id, out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(i);
  }
  return out;
}

std::size_t Partition::block_count() const {
  std::size_t singletons = 0;
  std::unordered_map<std::int64_t, bool> seen;
  for (std::int64_t id : block_of_) {
    if (id < 0) {
      ++singletons;
    } else {
      seen.emplace(id, true);
    }
  }
  return singletons + seen.size();
}

std::vector<IndexPair> Partition::pairs() const {
  std::vector<IndexPair> out;
  for (const auto& block : blocks()) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      for (std::size_t j = i + 1; j < block.size(); ++j) {
        out.push_back(IndexPair::canonical(block[i], block[j]));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t within_block_pairs(std::span<const std::vector<std::uint32_t>> blocks) {
  std::uint64_t total = 0;
  for (const auto& b : blocks) {
    const std::uint64_t s = b.size();
    total += s * (s - 1) / 2;
  }
  return total;
}

}  // namespace erblock
