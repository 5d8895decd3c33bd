#include "erblock/shingling.hpp"

#include <algorithm>
#include <cmath>

#include "erblock/error.hpp"
#include "erblock/parallel.hpp"
#include "erblock/unicode.hpp"

namespace erblock {

std::string_view field_name(Field field) noexcept {
  switch (field) {
    case Field::Name: return "name";
    case Field::DateOfDeath: return "date_of_death";
    case Field::Governorate: return "governorate";
    case Field::Sex: return "sex";
    case Field::Source: return "source";
  }
  return "";
}

std::vector<Field> parse_fields(std::string_view text) {
  std::vector<Field> fields;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view name = text.substr(start, end - start);
    bool known = false;
    for (Field f : {Field::Name, Field::DateOfDeath, Field::Governorate,
                    Field::Sex, Field::Source}) {
      if (name == field_name(f)) {
        fields.push_back(f);
        known = true;
      }
    }
    if (!known) fail(ErrorCode::Parameter, "unknown field '" + std::string(name) + "'");
    start = end + 1;
  }
  return fields;
}

const std::vector<Field>& default_fields() {
  static const std::vector<Field> fields = {Field::Name, Field::DateOfDeath,
                                            Field::Governorate, Field::Sex};
  return fields;
}

std::string record_string(const Record& record, std::span<const Field> fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) unicode::append_utf8(out, unicode::kFieldSeparator);
    switch (fields[i]) {
      case Field::Name: out += record.name; break;
      case Field::DateOfDeath: out += record.date_of_death; break;
      case Field::Governorate: out += record.governorate; break;
      case Field::Sex: out += sex_code(record.sex); break;
      case Field::Source: out += record.source; break;
    }
  }
  return out;
}

TokenCounts shingle(std::string_view text, std::size_t k) {
  if (k == 0) fail(ErrorCode::Parameter, "shingle length must be >= 1");
  std::u32string scalars = unicode::decode(text);
  if (scalars.size() < k) scalars.resize(k, unicode::kPad);

  TokenCounts counts;
  std::unordered_map<std::u32string_view, std::size_t> slot;
  const std::u32string_view view(scalars);
  for (std::size_t i = 0; i + k <= view.size(); ++i) {
    const std::u32string_view gram = view.substr(i, k);
    auto [it, inserted] = slot.emplace(gram, counts.size());
    if (inserted) {
      counts.emplace_back(unicode::encode(gram), 1u);
    } else {
      ++counts[it->second].second;
    }
  }
  return counts;
}

ShingleBag::ShingleBag(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (const Entry& e : entries_) {
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      fail(ErrorCode::Domain, "shingle weights must be finite and non-negative");
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& x, const Entry& y) { return x.token < y.token; });
  std::vector<Entry> merged;
  merged.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (!merged.empty() && merged.back().token == e.token) {
      merged.back().weight += e.weight;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.weight == 0.0; });
  entries_ = std::move(merged);
}

double ShingleBag::weight(TokenId token) const noexcept {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), token,
      [](const Entry& e, TokenId t) { return e.token < t; });
  return it != entries_.end() && it->token == token ? it->weight : 0.0;
}

double ShingleBag::max_weight() const noexcept {
  double m = 0.0;
  for (const Entry& e : entries_) m = std::max(m, e.weight);
  return m;
}

std::vector<TokenId> ShingleBag::support() const {
  std::vector<TokenId> ids;
  ids.reserve(entries_.size());
  for (const Entry& e : entries_) ids.push_back(e.token);
  return ids;
}

ShingleBag ShingleBag::scaled(double factor) const {
  std::vector<Entry> out(entries_.begin(), entries_.end());
  for (Entry& e : out) e.weight *= factor;
  return ShingleBag(std::move(out));
}

Vocabulary Vocabulary::build(const Corpus& corpus, std::size_t k,
                             std::span<const Field> fields) {
  if (k == 0) fail(ErrorCode::Parameter, "shingle length must be >= 1");
  if (corpus.empty()) fail(ErrorCode::Parameter, "cannot build a vocabulary from an empty corpus");
  if (fields.empty()) fail(ErrorCode::Parameter, "field list must be non-empty");
  Vocabulary v;
  v.k_ = k;
  v.documents_ = corpus.size();
  v.fields_.assign(fields.begin(), fields.end());
  for (const Record& r : corpus.records()) {
    for (auto& [token, count] : shingle(record_string(r, fields), k)) {
      auto [it, inserted] = v.ids_.emplace(token, v.tokens_.size());
      if (inserted) {
        v.tokens_.push_back(token);
        v.df_.push_back(0);
      }
      ++v.df_[it->second];
    }
  }
  return v;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

ShingleBag Vocabulary::encode(const TokenCounts& counts) const {
  std::vector<ShingleBag::Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [token, count] : counts) {
    auto it = ids_.find(token);
    if (it == ids_.end()) {
      fail(ErrorCode::Vocabulary, "token '" + token + "' not in vocabulary");
    }
    entries.push_back({it->second, static_cast<double>(count)});
  }
  return ShingleBag(std::move(entries));
}

ShingleBag Vocabulary::bag(const Record& record) const {
  return encode(shingle(record_string(record, fields_), k_));
}

void Vocabulary::write(std::ostream& out) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << i << '\t' << tokens_[i] << '\t' << df_[i] << '\n';
  }
}

ShingleBag idf_weight(const ShingleBag& bag, const Vocabulary& vocab) {
  const double n = static_cast<double>(vocab.document_count());
  std::vector<ShingleBag::Entry> out;
  out.reserve(bag.size());
  for (const auto& e : bag.entries()) {
    if (e.token >= vocab.size()) {
      fail(ErrorCode::Vocabulary, "token id " + std::to_string(e.token) + " not in vocabulary");
    }
    const double df = vocab.document_frequency(e.token);
    const double w = e.weight * std::log(n / df);
    if (w > 0.0) out.push_back({e.token, w});
  }
  return ShingleBag(std::move(out));
}

std::vector<ShingleBag> corpus_bags(const Corpus& corpus, const Vocabulary& vocab,
                                    Weighting weighting, unsigned workers) {
  std::vector<ShingleBag> bags(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    ShingleBag bag = vocab.bag(corpus[i]);
    bags[i] = weighting == Weighting::Idf ? idf_weight(bag, vocab) : std::move(bag);
  });
  return bags;
}

}  // namespace erblock
