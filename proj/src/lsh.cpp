#include "erblock/lsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>

#include "erblock/error.hpp"
#include "erblock/hashing.hpp"
#include "erblock/parallel.hpp"

namespace erblock {

namespace {

constexpr std::uint64_t kEmptyBin = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kHashRange = 1ULL << 63;
constexpr std::uint64_t kSentinelDomain = 0x5E471E1B10C4ULL;
constexpr std::size_t kExpansionGuard = 1'000'000;

void require_mode(const HashScheme& scheme, HashMode mode) {
  if (scheme.mode != mode) {
    fail(ErrorCode::Parameter, "hash scheme mode is " +
                                   std::string(hash_mode_name(scheme.mode)) + ", expected " +
                                   std::string(hash_mode_name(mode)));
  }
}

HashSignature doph_unchecked(std::span<const TokenId> set, const HashScheme& scheme,
                             DophCounters* counters) {
  if (set.empty()) fail(ErrorCode::Domain, "cannot hash an empty set");
  const std::size_t k = scheme.num_bins();
  const std::uint64_t width = doph_bin_width(k);

  std::vector<std::uint64_t> bins(k, kEmptyBin);
  for (TokenId t : set) {
    const std::uint64_t h = seeded_hash(scheme.seed, t) >> 1;
    const std::size_t bin = static_cast<std::size_t>(h / width);
    bins[bin] = std::min(bins[bin], h % width);
  }
  if (counters != nullptr) counters->hash_calls += set.size();

  // Walk leftwards from a non-empty bin so `next` is always the nearest
  // originally non-empty bin to the right of j.
  std::size_t start = k;
  for (std::size_t j = k; j-- > 0;) {
    if (bins[j] != kEmptyBin) {
      start = j;
      break;
    }
  }
  std::vector<std::uint64_t> values = bins;
  std::size_t next = start;
  std::uint64_t empties = 0;
  for (std::size_t step = 1; step < k; ++step) {
    const std::size_t j = (start + k - step) % k;
    if (bins[j] != kEmptyBin) {
      next = j;
      continue;
    }
    const std::uint64_t distance = (next + k - j) % k;
    values[j] = bins[next] + distance * width;
    ++empties;
  }
  if (counters != nullptr) counters->empty_bins += empties;
  return HashSignature(std::move(values));
}

// seen |= row, returning the number of bits that were new.
__attribute__((target_clones("avx2", "popcnt", "default")))
std::uint64_t absorb(const std::uint64_t* row, std::uint64_t* seen, std::size_t words) {
  std::uint64_t fresh = 0;
  for (std::size_t i = 0; i < words; ++i) {
    const std::uint64_t x = row[i] & ~seen[i];
    seen[i] |= x;
    fresh += static_cast<std::uint64_t>(__builtin_popcountll(x));
  }
  return fresh;
}

}  // namespace

TokenSet make_token_set(std::vector<TokenId> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

std::string_view hash_mode_name(HashMode mode) noexcept {
  switch (mode) {
    case HashMode::Classical: return "classical";
    case HashMode::Doph: return "doph";
    case HashMode::WeightedDoph: return "weighted-doph";
  }
  return "";
}

void HashScheme::validate() const {
  if (K == 0 || L == 0) fail(ErrorCode::Parameter, "K and L must be >= 1");
  if (num_bins() > kHashRange / 2) {
    fail(ErrorCode::Parameter, "K*L exceeds half the hash range");
  }
}

HashSignature HashSignature::sentinel(std::size_t length) {
  HashSignature s(std::vector<std::uint64_t>(length, kSentinelValue));
  s.sentinel_ = true;
  return s;
}

double jaccard(std::span<const TokenId> a, std::span<const TokenId> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double weighted_jaccard(const ShingleBag& x, const ShingleBag& y) {
  const auto xs = x.entries();
  const auto ys = y.entries();
  double lo = 0.0, hi = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() || j < ys.size()) {
    if (j == ys.size() || (i < xs.size() && xs[i].token < ys[j].token)) {
      hi += xs[i++].weight;
    } else if (i == xs.size() || ys[j].token < xs[i].token) {
      hi += ys[j++].weight;
    } else {
      lo += std::min(xs[i].weight, ys[j].weight);
      hi += std::max(xs[i].weight, ys[j].weight);
      ++i;
      ++j;
    }
  }
  if (hi == 0.0) return 1.0;
  return lo / hi;
}

HashSignature minhash_classical(std::span<const TokenId> set, const HashScheme& scheme) {
  require_mode(scheme, HashMode::Classical);
  scheme.validate();
  if (set.empty()) fail(ErrorCode::Domain, "cannot minhash an empty set");
  const std::size_t k = scheme.num_bins();
  std::vector<std::uint64_t> values(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::uint64_t seed = derive_seed(scheme.seed, j);
    std::uint64_t m = kEmptyBin;
    for (TokenId t : set) m = std::min(m, seeded_hash(seed, t));
    values[j] = m;
  }
  return HashSignature(std::move(values));
}

std::uint64_t doph_bin_width(std::size_t k) noexcept {
  return (kHashRange - 1) / k + 1;
}

HashSignature doph(std::span<const TokenId> set, const HashScheme& scheme,
                   DophCounters* counters) {
  require_mode(scheme, HashMode::Doph);
  scheme.validate();
  return doph_unchecked(set, scheme, counters);
}

TokenSet sample_weighted(const ShingleBag& bag, double normalizer, std::uint64_t seed) {
  if (!(normalizer > 0.0)) fail(ErrorCode::Parameter, "sampling normalizer must be positive");
  const std::uint64_t stream = derive_seed(seed, 0x5A3D1E);
  TokenSet sample;
  for (const auto& e : bag.entries()) {
    const double p = e.weight / normalizer;
    if (p > 1.0 + 1e-12) {
      fail(ErrorCode::Parameter, "weight exceeds the sampling normalizer");
    }
    if (to_unit(seeded_hash(stream, e.token)) < p) sample.push_back(e.token);
  }
  return sample;
}

HashSignature weighted_doph(const ShingleBag& bag, double normalizer,
                            const HashScheme& scheme, DophCounters* counters) {
  require_mode(scheme, HashMode::WeightedDoph);
  scheme.validate();
  const TokenSet sample = sample_weighted(bag, normalizer, scheme.seed);
  if (sample.empty()) return HashSignature::sentinel(scheme.num_bins());
  return doph_unchecked(sample, scheme, counters);
}

TokenSet expand_exact(const ShingleBag& bag, double delta) {
  if (!(delta > 0.0)) fail(ErrorCode::Parameter, "delta must be positive");
  std::size_t total = 0;
  std::vector<std::pair<TokenId, std::uint64_t>> multiples;
  for (const auto& e : bag.entries()) {
    const double ratio = e.weight / delta;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
      fail(ErrorCode::Domain, "weight " + std::to_string(e.weight) +
                                  " is not an integer multiple of delta");
    }
    if (e.token > 0xFFFFFFFFULL) fail(ErrorCode::Domain, "token id too large to expand");
    const auto count = static_cast<std::uint64_t>(rounded);
    total += count;
    if (total > kExpansionGuard) {
      fail(ErrorCode::SizeGuard, "expansion exceeds 10^6 composite tokens");
    }
    multiples.emplace_back(e.token, count);
  }
  TokenSet out;
  out.reserve(total);
  for (auto [token, count] : multiples) {
    for (std::uint64_t j = 1; j <= count; ++j) out.push_back((token << 32) | j);
  }
  return out;
}

std::uint64_t band_key(std::span<const std::uint64_t> slots) noexcept {
  std::uint64_t h = 0x243F6A8885A308D3ULL ^ slots.size();
  for (std::uint64_t v : slots) h = mix64(h ^ mix64(v + 0x13198A2E03707344ULL));
  return h;
}

void band_keys(const HashSignature& signature, std::uint32_t K, std::uint32_t L,
               std::uint32_t record, std::span<std::uint64_t> out) {
  if (signature.is_sentinel()) {
    const std::uint64_t unique = mix64(kSentinelDomain ^ (static_cast<std::uint64_t>(record) << 20));
    for (std::uint32_t t = 0; t < L; ++t) out[t] = unique;
    return;
  }
  const auto values = signature.values();
  for (std::uint32_t t = 0; t < L; ++t) {
    out[t] = band_key(values.subspan(static_cast<std::size_t>(t) * K, K));
  }
}

BlockAssignment::BlockAssignment(std::size_t records, std::uint32_t tables,
                                 std::vector<std::uint64_t> keys)
    : records_(records), tables_(tables), keys_(std::move(keys)) {
  if (keys_.size() != records_ * tables_) {
    fail(ErrorCode::Parameter, "band key array has the wrong size");
  }
  if (records_ > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::Parameter, "too many records");
  }
  order_.resize(records_ * tables_);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> scratch(records_);
  for (std::uint32_t t = 0; t < tables_; ++t) {
    for (std::uint32_t r = 0; r < records_; ++r) scratch[r] = {key(r, t), r};
    std::sort(scratch.begin(), scratch.end());
    std::uint32_t* order = order_.data() + static_cast<std::size_t>(t) * records_;
    for (std::size_t i = 0; i < records_; ++i) order[i] = scratch[i].second;
  }
}

bool BlockAssignment::contains(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return false;
  const std::uint64_t* ka = keys_.data() + static_cast<std::size_t>(a) * tables_;
  const std::uint64_t* kb = keys_.data() + static_cast<std::size_t>(b) * tables_;
  for (std::uint32_t t = 0; t < tables_; ++t) {
    if (ka[t] == kb[t]) return true;
  }
  return false;
}

std::optional<std::uint32_t> BlockAssignment::first_table(std::uint32_t a,
                                                          std::uint32_t b) const {
  if (a == b) return std::nullopt;
  const std::uint64_t* ka = keys_.data() + static_cast<std::size_t>(a) * tables_;
  const std::uint64_t* kb = keys_.data() + static_cast<std::size_t>(b) * tables_;
  for (std::uint32_t t = 0; t < tables_; ++t) {
    if (ka[t] == kb[t]) return t;
  }
  return std::nullopt;
}

// A pair is attributed to the first table in which it shares a bucket. Each
// record a walks its buckets in table order and counts the partners b > a not
// seen in an earlier table. Buckets larger than a bitset row are kept as
// bitsets so dense tables cost O(n / 64) per record and table instead of one
// step per co-member.
std::vector<std::uint64_t> BlockAssignment::first_collisions(unsigned workers) const {
  std::vector<std::uint64_t> per_table(tables_, 0);
  if (records_ < 2) return per_table;
  const std::size_t words = (records_ + 63) / 64;
  const std::size_t dense_size = std::max<std::size_t>(64, words);

  // Per table and record: bucket start offset in order_, bucket size and,
  // for large buckets, the index of its bitset.
  struct Slot {
    std::uint32_t start = 0;
    std::uint32_t size = 0;
    std::int32_t bits = -1;
  };
  std::vector<Slot> slot(records_ * tables_);
  std::vector<std::uint64_t> bitsets;
  for (std::uint32_t t = 0; t < tables_; ++t) {
    const std::uint32_t* order = order_.data() + static_cast<std::size_t>(t) * records_;
    for_each_bucket(t, [&](std::uint64_t, std::span<const std::uint32_t> members) {
      Slot s;
      s.start = static_cast<std::uint32_t>(members.data() - order);
      s.size = static_cast<std::uint32_t>(members.size());
      if (members.size() >= dense_size) {
        s.bits = static_cast<std::int32_t>(bitsets.size() / words);
        bitsets.resize(bitsets.size() + words, 0);
        std::uint64_t* row = bitsets.data() + static_cast<std::size_t>(s.bits) * words;
        for (std::uint32_t m : members) row[m >> 6] |= 1ULL << (m & 63);
      }
      for (std::uint32_t m : members) slot[static_cast<std::size_t>(m) * tables_ + t] = s;
    });
  }

  std::mutex merge;
  parallel_chunks(records_, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint64_t> counts(tables_, 0);
    std::vector<std::uint64_t> seen(words, 0);
    for (std::size_t a = begin; a < end; ++a) {
      const std::size_t first_word = a >> 6;
      // Bits of b > a within a's own word.
      const std::uint64_t above = (a & 63) == 63 ? 0 : ~0ULL << ((a & 63) + 1);
      const std::uint64_t partners = records_ - 1 - a;
      std::uint64_t seen_count = 0;
      for (std::uint32_t t = 0; t < tables_; ++t) {
        const Slot& s = slot[a * tables_ + t];
        if (s.size < 2) continue;
        std::uint64_t fresh = 0;
        if (s.bits >= 0) {
          const std::uint64_t* row = bitsets.data() + static_cast<std::size_t>(s.bits) * words;
          std::uint64_t x = row[first_word] & above & ~seen[first_word];
          seen[first_word] |= x;
          fresh += static_cast<std::uint64_t>(std::popcount(x));
          fresh += absorb(row + first_word + 1, seen.data() + first_word + 1,
                          words - first_word - 1);
        } else {
          const std::uint32_t* members =
              order_.data() + static_cast<std::size_t>(t) * records_ + s.start;
          // Members are ascending, so the partners b > a form a suffix.
          const std::uint32_t* from =
              std::upper_bound(members, members + s.size, static_cast<std::uint32_t>(a));
          for (const std::uint32_t* m = from; m != members + s.size; ++m) {
            const std::uint64_t bit = 1ULL << (*m & 63);
            if (!(seen[*m >> 6] & bit)) {
              seen[*m >> 6] |= bit;
              ++fresh;
            }
          }
        }
        counts[t] += fresh;
        seen_count += fresh;
        if (seen_count == partners) break;
      }
      std::fill(seen.begin() + static_cast<std::ptrdiff_t>(first_word), seen.end(), 0);
    }
    std::lock_guard lock(merge);
    for (std::uint32_t t = 0; t < tables_; ++t) per_table[t] += counts[t];
  });
  return per_table;
}

std::uint64_t BlockAssignment::count() const {
  std::uint64_t total = 0;
  for (std::uint64_t c : first_collisions()) total += c;
  return total;
}

std::vector<IndexPair> BlockAssignment::pairs() const {
  std::vector<IndexPair> out;
  for (std::uint32_t t = 0; t < tables_; ++t) {
    for_each_bucket(t, [&](std::uint64_t, std::span<const std::uint32_t> members) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          std::uint32_t first = 0;
          while (key(members[i], first) != key(members[j], first)) ++first;
          if (first == t) out.push_back(IndexPair::canonical(members[i], members[j]));
        }
      }
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

BlockAssignment BlockAssignment::prefix(std::uint32_t tables) const {
  if (tables == 0 || tables > tables_) fail(ErrorCode::Parameter, "invalid table prefix");
  std::vector<std::uint64_t> keys(records_ * tables);
  for (std::size_t r = 0; r < records_; ++r) {
    std::copy_n(keys_.data() + r * tables_, tables, keys.data() + r * tables);
  }
  return BlockAssignment(records_, tables, std::move(keys));
}

void BlockAssignment::write_dump(std::ostream& out, std::span<const RecordId> ids) const {
  char hex[17];
  for (std::uint32_t t = 0; t < tables_; ++t) {
    for_each_bucket(t, [&](std::uint64_t k, std::span<const std::uint32_t> members) {
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(k));
      for (std::uint32_t m : members) out << t << '\t' << hex << '\t' << ids[m] << '\n';
    });
  }
}

BlockAssignment build_blocks(std::span<const HashSignature> signatures,
                             const HashScheme& scheme) {
  scheme.validate();
  const std::size_t n = signatures.size();
  std::vector<std::uint64_t> keys(n * scheme.L);
  for (std::size_t r = 0; r < n; ++r) {
    if (signatures[r].size() != scheme.num_bins()) {
      fail(ErrorCode::Parameter, "signature " + std::to_string(r) + " has length " +
                                     std::to_string(signatures[r].size()) + ", expected " +
                                     std::to_string(scheme.num_bins()));
    }
    band_keys(signatures[r], scheme.K, scheme.L, static_cast<std::uint32_t>(r),
              std::span(keys).subspan(r * scheme.L, scheme.L));
  }
  return BlockAssignment(n, scheme.L, std::move(keys));
}

BlockAssignment hash_blocks(std::span<const TokenSet> sets, const HashScheme& scheme,
                            unsigned workers) {
  scheme.validate();
  if (scheme.mode == HashMode::WeightedDoph) {
    fail(ErrorCode::Parameter, "weighted-doph needs weighted bags");
  }
  const std::size_t n = sets.size();
  std::vector<std::uint64_t> keys(n * scheme.L);
  parallel_for(n, workers, [&](std::size_t r) {
    const HashSignature sig = scheme.mode == HashMode::Doph
                                  ? doph_unchecked(sets[r], scheme, nullptr)
                                  : minhash_classical(sets[r], scheme);
    band_keys(sig, scheme.K, scheme.L, static_cast<std::uint32_t>(r),
              std::span(keys).subspan(r * scheme.L, scheme.L));
  });
  return BlockAssignment(n, scheme.L, std::move(keys));
}

BlockAssignment weighted_hash_blocks(std::span<const ShingleBag> bags, double normalizer,
                                     const HashScheme& scheme, unsigned workers) {
  require_mode(scheme, HashMode::WeightedDoph);
  scheme.validate();
  const std::size_t n = bags.size();
  std::vector<std::uint64_t> keys(n * scheme.L);
  parallel_for(n, workers, [&](std::size_t r) {
    const HashSignature sig = weighted_doph(bags[r], normalizer, scheme);
    band_keys(sig, scheme.K, scheme.L, static_cast<std::uint32_t>(r),
              std::span(keys).subspan(r * scheme.L, scheme.L));
  });
  return BlockAssignment(n, scheme.L, std::move(keys));
}

double corpus_max_weight(std::span<const ShingleBag> bags) noexcept {
  double m = 0.0;
  for (const auto& b : bags) m = std::max(m, b.max_weight());
  return m;
}

}  // namespace erblock
