#include "erblock/aeda.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "bundled.hpp"
#include "erblock/error.hpp"
#include "erblock/parallel.hpp"
#include "erblock/unicode.hpp"

namespace erblock::aeda {

using unicode::decode;
using unicode::encode;

namespace {

std::uint64_t pair_key(char32_t a, char32_t b) noexcept {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find('\t', start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

char32_t single_char(const std::string& field, std::string_view table, std::size_t line) {
  const std::u32string s = decode(field);
  if (s.size() != 1) {
    fail(ErrorCode::Parse, std::string(table) + " table line " + std::to_string(line) +
                               ": expected one character, got '" + field + "'");
  }
  return s[0];
}

double number(const std::string& field, std::string_view table, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size() || !std::isfinite(v)) {
    fail(ErrorCode::Parse, std::string(table) + " table line " + std::to_string(line) +
                               ": bad number '" + field + "'");
  }
  return v;
}

// Calls fn(fields, line_number) for each non-blank, non-comment line.
template <typename Fn>
void for_each_row(std::istream& in, std::string_view table, std::size_t columns, Fn&& fn) {
  std::string line;
  std::size_t number_ = 0;
  while (std::getline(in, line)) {
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != columns) {
      fail(ErrorCode::Parse, std::string(table) + " table line " + std::to_string(number_) +
                                 ": expected " + std::to_string(columns) + " tab-separated fields");
    }
    fn(fields, number_);
  }
}

void read_similarities(std::istream& in, std::string_view table,
                       void (CostTables::*setter)(char32_t, char32_t, double), CostTables& out) {
  for_each_row(in, table, 3, [&](const std::vector<std::string>& f, std::size_t line) {
    const char32_t a = single_char(f[0], table, line);
    const char32_t b = single_char(f[1], table, line);
    (out.*setter)(a, b, number(f[2], table, line));
  });
}

}  // namespace

double CostTables::lookup(const PairMap& map, char32_t a, char32_t b) noexcept {
  if (a == b) return 1.0;
  auto it = map.find(pair_key(a, b));
  return it == map.end() ? 0.0 : it->second;
}

void CostTables::put(PairMap& map, char32_t a, char32_t b, double similarity) {
  if (!(similarity >= 0.0 && similarity <= 1.0)) {
    fail(ErrorCode::Config, "similarity " + std::to_string(similarity) + " outside [0, 1]");
  }
  if (a == b) {
    if (similarity != 1.0) fail(ErrorCode::Config, "self-similarity must be 1");
    return;
  }
  auto [it, inserted] = map.emplace(pair_key(a, b), similarity);
  if (!inserted && it->second != similarity) {
    fail(ErrorCode::Config, "conflicting similarities for the pair " + encode(std::u32string{a}) +
                                "/" + encode(std::u32string{b}));
  }
}

void CostTables::set_phonetic(char32_t a, char32_t b, double similarity) {
  put(phonetic_, a, b, similarity);
}

void CostTables::set_letterform(char32_t a, char32_t b, double similarity) {
  put(letterform_, a, b, similarity);
}

void CostTables::set_key(char32_t c, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) fail(ErrorCode::Config, "key coordinates must be finite");
  auto [it, inserted] = keyboard_.emplace(c, std::make_pair(x, y));
  if (!inserted) {
    if (it->second != std::make_pair(x, y)) {
      fail(ErrorCode::Config, "conflicting key positions for " + encode(std::u32string{c}));
    }
    return;
  }
  key_chars_.push_back(c);
}

std::optional<std::pair<double, double>> CostTables::key(char32_t c) const {
  auto it = keyboard_.find(c);
  if (it == keyboard_.end()) return std::nullopt;
  return it->second;
}

double CostTables::max_key_distance() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < key_chars_.size(); ++i) {
    const auto [xa, ya] = keyboard_.at(key_chars_[i]);
    for (std::size_t j = i + 1; j < key_chars_.size(); ++j) {
      const auto [xb, yb] = keyboard_.at(key_chars_[j]);
      best = std::max(best, std::hypot(xa - xb, ya - yb));
    }
  }
  return best;
}

void CostTables::set_psi(double psi) {
  if (!(psi > 0.0) || !std::isfinite(psi)) fail(ErrorCode::Config, "psi must be positive");
  const double widest = max_key_distance();
  if (widest > psi) {
    fail(ErrorCode::Config, "keys lie " + std::to_string(widest) + " units apart, beyond psi " +
                                std::to_string(psi));
  }
  psi_ = psi;
}

void CostTables::set_weights(Weights weights) {
  for (double w : {weights.omega, weights.lambda, weights.sigma}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      fail(ErrorCode::Parameter, "weights must be non-negative and finite");
    }
  }
  if (weights.omega + weights.lambda + weights.sigma <= 0.0) {
    fail(ErrorCode::Parameter, "weights must not all be zero");
  }
  weights_ = weights;
}

CostTables CostTables::parse(std::istream& phonetic, std::istream& letterform,
                             std::istream& keyboard, double psi, Weights weights) {
  CostTables t;
  read_similarities(phonetic, "phonetic", &CostTables::set_phonetic, t);
  read_similarities(letterform, "letter-form", &CostTables::set_letterform, t);
  for_each_row(keyboard, "keyboard", 3, [&](const std::vector<std::string>& f, std::size_t line) {
    t.set_key(single_char(f[0], "keyboard", line), number(f[1], "keyboard", line),
              number(f[2], "keyboard", line));
  });
  t.set_psi(psi);
  t.set_weights(weights);
  return t;
}

CostTables CostTables::load(const std::filesystem::path& phonetic,
                            const std::filesystem::path& letterform,
                            const std::filesystem::path& keyboard, double psi, Weights weights) {
  auto p = open_input(phonetic);
  auto l = open_input(letterform);
  auto k = open_input(keyboard);
  return parse(p, l, k, psi, weights);
}

CostTables CostTables::defaults() {
  std::istringstream p{std::string(bundled::phonetic())};
  std::istringstream l{std::string(bundled::letterform())};
  std::istringstream k{std::string(bundled::keyboard())};
  return parse(p, l, k, 12.0, Weights{});
}

double keyboard_sim(char32_t a, char32_t b, const CostTables& tables, Warnings* warnings) {
  if (a == b) return 1.0;
  const auto ka = tables.key(a);
  const auto kb = tables.key(b);
  if (!ka || !kb) {
    if (warnings) ++warnings->unmapped;
    return 0.0;
  }
  const double d = std::hypot(ka->first - kb->first, ka->second - kb->second);
  return std::clamp(1.0 - d / tables.psi(), 0.0, 1.0);
}

double frc(char32_t a, char32_t b, const CostTables& tables, Warnings* warnings) {
  if (a == b) return 0.0;
  const Weights& w = tables.weights();
  const double alpha = 1.0 - tables.phonetic(a, b);
  const double beta = 1.0 - tables.letterform(a, b);
  const double gamma = 1.0 - keyboard_sim(a, b, tables, warnings);
  const double cost = (alpha * w.omega + beta * w.lambda + gamma * w.sigma) /
                      (w.omega + w.lambda + w.sigma);
  return std::clamp(cost, 0.0, 1.0);
}

double name_cost(std::u32string_view s, std::u32string_view t, const CostTables& tables,
                 Warnings* warnings) {
  const std::size_t longest = std::max(s.size(), t.size());
  if (longest == 0) return 0.0;
  if (s == t) return 0.0;
  std::vector<double> prev(t.size() + 1), cur(t.size() + 1);
  for (std::size_t j = 0; j <= t.size(); ++j) prev[j] = static_cast<double>(j);
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = static_cast<double>(i);
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const double sub = prev[j - 1] + frc(s[i - 1], t[j - 1], tables, warnings);
      cur[j] = std::min({prev[j] + 1.0, cur[j - 1] + 1.0, sub});
    }
    std::swap(prev, cur);
  }
  return prev[t.size()] / static_cast<double>(longest);
}

double name_cost(std::string_view s, std::string_view t, const CostTables& tables,
                 Warnings* warnings) {
  return name_cost(std::u32string_view(decode(s)), std::u32string_view(decode(t)), tables,
                   warnings);
}

namespace {

std::vector<ScoredPair> refine_decoded(std::span<const std::uint32_t> block,
                                       std::span<const std::u32string> names,
                                       const CostTables& tables, double percentile,
                                       Warnings* warnings) {
  std::vector<ScoredPair> scored;
  if (block.size() < 2) return scored;
  scored.reserve(block.size() * (block.size() - 1) / 2);
  for (std::size_t i = 0; i < block.size(); ++i) {
    for (std::size_t j = i + 1; j < block.size(); ++j) {
      const double c = name_cost(names[i], names[j], tables, warnings);
      scored.push_back({IndexPair::canonical(block[i], block[j]), c});
    }
  }
  std::vector<double> costs(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) costs[i] = scored[i].cost;
  // Nearest rank: the ceil(p/100 * m)-th smallest cost.
  const std::size_t m = costs.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(m)));
  rank = std::clamp<std::size_t>(rank, 1, m);
  std::nth_element(costs.begin(), costs.begin() + static_cast<std::ptrdiff_t>(rank - 1), costs.end());
  const double threshold = costs[rank - 1];
  std::erase_if(scored, [&](const ScoredPair& p) { return p.cost > threshold; });
  return scored;
}

void check_percentile(double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    fail(ErrorCode::Parameter, "percentile must lie in (0, 100]");
  }
}

}  // namespace

std::vector<ScoredPair> refine_block(std::span<const std::uint32_t> block, const Corpus& corpus,
                                     const CostTables& tables, double percentile,
                                     Warnings* warnings) {
  check_percentile(percentile);
  std::vector<std::u32string> names;
  names.reserve(block.size());
  for (std::uint32_t r : block) names.push_back(decode(corpus[r].name));
  auto out = refine_decoded(block, names, tables, percentile, warnings);
  std::sort(out.begin(), out.end(),
            [](const ScoredPair& x, const ScoredPair& y) { return x.pair < y.pair; });
  return out;
}

std::vector<ScoredPair> refine_partition(const Partition& partition, const Corpus& corpus,
                                         const CostTables& tables, const RefineOptions& options,
                                         Warnings* warnings) {
  check_percentile(options.percentile);
  if (partition.record_count() != corpus.size()) {
    fail(ErrorCode::Parameter, "partition and corpus sizes differ");
  }
  if (partition.count() > options.max_pairs) {
    fail(ErrorCode::SizeGuard, std::to_string(partition.count()) +
                                   " within-block pairs exceed the refinement limit of " +
                                   std::to_string(options.max_pairs));
  }
  std::vector<std::vector<std::uint32_t>> blocks;
  for (auto& b : partition.blocks()) {
    if (b.size() >= 2) blocks.push_back(std::move(b));
  }
  std::vector<std::u32string> names(corpus.size());
  parallel_for(corpus.size(), options.workers,
               [&](std::size_t i) { names[i] = decode(corpus[i].name); });

  std::vector<std::vector<ScoredPair>> per_block(blocks.size());
  std::vector<Warnings> per_warn(blocks.size());
  parallel_for(blocks.size(), options.workers, [&](std::size_t b) {
    std::vector<std::u32string> block_names;
    block_names.reserve(blocks[b].size());
    for (std::uint32_t r : blocks[b]) block_names.push_back(names[r]);
    per_block[b] = refine_decoded(blocks[b], block_names, tables, options.percentile, &per_warn[b]);
  });

  std::vector<ScoredPair> out;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    out.insert(out.end(), per_block[b].begin(), per_block[b].end());
    if (warnings) warnings->unmapped += per_warn[b].unmapped;
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredPair& x, const ScoredPair& y) { return x.pair < y.pair; });
  return out;
}

Histogram cost_histogram(std::span<const double> costs) {
  Histogram h;
  double sum = 0.0;
  for (double c : costs) {
    if (c == 0.0) {
      ++h.excluded_zero;
      continue;
    }
    const double clamped = std::clamp(c, 0.0, 1.0);
    const auto bin = std::min<std::size_t>(Histogram::kBins - 1,
                                           static_cast<std::size_t>(clamped * Histogram::kBins));
    ++h.counts[bin];
    ++h.total;
    sum += c;
  }
  if (h.total > 0) h.mean = sum / static_cast<double>(h.total);
  return h;
}

void Histogram::write_csv(std::ostream& out) const {
  out << "bin_low,bin_high,count\n";
  for (std::size_t i = 0; i < kBins; ++i) {
    out << static_cast<double>(i) / kBins << ',' << static_cast<double>(i + 1) / kBins << ','
        << counts[i] << '\n';
  }
}

}  // namespace erblock::aeda
