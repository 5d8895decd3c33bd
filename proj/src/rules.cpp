#include "erblock/rules.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

#include "erblock/error.hpp"

namespace erblock::rules {

namespace {

constexpr FieldKey kAllKeys[] = {FieldKey::Name,  FieldKey::DateOfDeath, FieldKey::Governorate,
                                 FieldKey::Sex,   FieldKey::Year,        FieldKey::Month,
                                 FieldKey::Day};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end == std::string_view::npos ? s.size() - start : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

std::vector<FieldKey> keys_of_mask(std::uint32_t mask) {
  std::vector<FieldKey> keys;
  for (FieldKey k : kAllKeys) {
    if (mask & (1u << static_cast<unsigned>(k))) keys.push_back(k);
  }
  return keys;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::string_view key_name(FieldKey key) noexcept {
  switch (key) {
    case FieldKey::Name: return "name";
    case FieldKey::DateOfDeath: return "date_of_death";
    case FieldKey::Governorate: return "governorate";
    case FieldKey::Sex: return "sex";
    case FieldKey::Year: return "year";
    case FieldKey::Month: return "month";
    case FieldKey::Day: return "day";
  }
  return "";
}

std::optional<FieldKey> parse_key(std::string_view name) noexcept {
  for (FieldKey k : kAllKeys) {
    if (key_name(k) == name) return k;
  }
  if (name == "dod") return FieldKey::DateOfDeath;
  return std::nullopt;
}

std::optional<std::string_view> key_value(const Record& record, FieldKey key) noexcept {
  std::string_view v;
  switch (key) {
    case FieldKey::Name: v = record.name; break;
    case FieldKey::DateOfDeath: v = record.date_of_death; break;
    case FieldKey::Governorate: v = record.governorate; break;
    case FieldKey::Sex: v = sex_code(record.sex); break;
    case FieldKey::Year:
      if (record.date_of_death.size() == 10) v = std::string_view(record.date_of_death).substr(0, 4);
      break;
    case FieldKey::Month:
      if (record.date_of_death.size() == 10) v = std::string_view(record.date_of_death).substr(5, 2);
      break;
    case FieldKey::Day:
      if (record.date_of_death.size() == 10) v = std::string_view(record.date_of_death).substr(8, 2);
      break;
  }
  if (v.empty()) return std::nullopt;
  return v;
}

ConjunctionRule::ConjunctionRule(std::vector<FieldKey> keys) : keys_(std::move(keys)) {
  if (keys_.empty()) fail(ErrorCode::Parameter, "a conjunction needs at least one key");
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
}

std::uint32_t ConjunctionRule::mask() const noexcept {
  std::uint32_t m = 0;
  for (FieldKey k : keys_) m |= 1u << static_cast<unsigned>(k);
  return m;
}

std::string ConjunctionRule::text() const {
  std::string out;
  for (FieldKey k : keys_) {
    if (!out.empty()) out += '+';
    out += key_name(k);
  }
  return out;
}

DisjunctionScheme::DisjunctionScheme(std::vector<ConjunctionRule> rules)
    : rules_(std::move(rules)) {
  if (rules_.empty()) fail(ErrorCode::Parameter, "a scheme needs at least one rule");
}

DisjunctionScheme DisjunctionScheme::parse(std::string_view text) {
  std::vector<ConjunctionRule> rules;
  for (std::string_view term : split(text, '|')) {
    std::vector<FieldKey> keys;
    for (std::string_view name : split(term, '+')) {
      name = trim(name);
      auto key = parse_key(name);
      if (!key) {
        fail(ErrorCode::Parameter, "unknown blocking key '" + std::string(name) + "'");
      }
      keys.push_back(*key);
    }
    rules.emplace_back(std::move(keys));
  }
  return DisjunctionScheme(std::move(rules));
}

std::string DisjunctionScheme::text() const {
  std::string out;
  for (const auto& r : rules_) {
    if (!out.empty()) out += " | ";
    out += r.text();
  }
  return out;
}

Partition apply_conjunction(const Corpus& corpus, const ConjunctionRule& rule) {
  std::vector<std::int64_t> block_of(corpus.size(), -1);
  std::unordered_map<std::string, std::int64_t> groups;
  std::string tuple;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    tuple.clear();
    bool missing = false;
    for (FieldKey k : rule.keys()) {
      auto v = key_value(corpus[i], k);
      if (!v) {
        missing = true;
        break;
      }
      tuple.append(*v);
      tuple.push_back('\x1F');
    }
    if (missing) continue;
    auto [it, inserted] = groups.emplace(tuple, static_cast<std::int64_t>(groups.size()));
    block_of[i] = it->second;
  }
  return Partition(std::move(block_of));
}

std::vector<IndexPair> candidate_pairs(const Partition& partition) {
  return partition.pairs();
}

std::vector<IndexPair> apply_disjunction(const Corpus& corpus, const DisjunctionScheme& scheme) {
  std::vector<IndexPair> out;
  for (const auto& rule : scheme.rules()) {
    auto pairs = candidate_pairs(apply_conjunction(corpus, rule));
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DisjunctionBlocking::DisjunctionBlocking(const Corpus& corpus, const DisjunctionScheme& scheme)
    : records_(corpus.size()) {
  std::vector<std::uint32_t> masks;
  for (const auto& rule : scheme.rules()) {
    if (std::find(masks.begin(), masks.end(), rule.mask()) != masks.end()) continue;
    masks.push_back(rule.mask());
    partitions_.push_back(apply_conjunction(corpus, rule));
  }
  const std::size_t r = masks.size();
  if (r > 16) {
    count_ = pairs().size();
    return;
  }
  // |∪ A_i| = Σ_{S≠∅} (-1)^{|S|+1} |∩_{i∈S} A_i|, and pairs agreeing on two
  // rules are exactly the pairs of the conjunction over their merged keys.
  std::unordered_map<std::uint32_t, std::uint64_t> by_mask;
  std::int64_t total = 0;
  for (std::uint32_t subset = 1; subset < (1u << r); ++subset) {
    std::uint32_t merged = 0;
    for (std::size_t i = 0; i < r; ++i) {
      if (subset & (1u << i)) merged |= masks[i];
    }
    auto it = by_mask.find(merged);
    if (it == by_mask.end()) {
      it = by_mask.emplace(merged, apply_conjunction(corpus, ConjunctionRule(keys_of_mask(merged))).count()).first;
    }
    const auto size = static_cast<std::int64_t>(it->second);
    total += (std::popcount(subset) % 2 == 1) ? size : -size;
  }
  count_ = static_cast<std::uint64_t>(total);
}

bool DisjunctionBlocking::contains(std::uint32_t a, std::uint32_t b) const {
  for (const auto& p : partitions_) {
    if (p.contains(a, b)) return true;
  }
  return false;
}

std::vector<IndexPair> DisjunctionBlocking::pairs() const {
  std::vector<IndexPair> out;
  for (const auto& p : partitions_) {
    auto pairs = p.pairs();
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t scheme_count(std::size_t key_count, std::size_t max_rule_size) {
  std::uint64_t conjunctions = 0;
  for (std::size_t s = 1; s <= std::min(max_rule_size, key_count); ++s) {
    conjunctions += binomial(key_count, s);
  }
  return conjunctions + conjunctions * (conjunctions - 1) / 2;
}

std::vector<DisjunctionScheme> enumerate_schemes(std::vector<FieldKey> keys,
                                                 std::size_t max_rule_size) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (max_rule_size == 0 || max_rule_size > keys.size()) {
    fail(ErrorCode::Parameter, "max_rule_size must lie in [1, number of keys]");
  }
  constexpr std::uint64_t kGuard = 100'000;
  const std::uint64_t total = scheme_count(keys.size(), max_rule_size);
  if (total > kGuard) {
    fail(ErrorCode::SizeGuard, std::to_string(total) + " schemes exceed the limit of 100000");
  }

  // Conjunctions by size, then lexicographic over key positions.
  std::vector<ConjunctionRule> rules;
  const std::size_t m = keys.size();
  for (std::size_t size = 1; size <= max_rule_size; ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      std::vector<FieldKey> chosen;
      for (std::size_t i : idx) chosen.push_back(keys[i]);
      rules.emplace_back(std::move(chosen));
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == m - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < size; ++i) idx[i] = idx[i - 1] + 1;
    }
  }

  std::vector<DisjunctionScheme> schemes;
  schemes.reserve(total);
  for (const auto& r : rules) schemes.emplace_back(std::vector<ConjunctionRule>{r});
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      schemes.emplace_back(std::vector<ConjunctionRule>{rules[i], rules[j]});
    }
  }
  return schemes;
}

}  // namespace erblock::rules
