#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "erblock/record.hpp"

namespace erblock {

using TokenId = std::uint64_t;

/// Record fields usable in a record string.
enum class Field { Name, DateOfDeath, Governorate, Sex, Source };

std::string_view field_name(Field field) noexcept;
/// Parses a comma-separated field list such as "name,date_of_death".
std::vector<Field> parse_fields(std::string_view text);
const std::vector<Field>& default_fields();

/// Selected field values joined by U+241F, in the order given.
std::string record_string(const Record& record, std::span<const Field> fields);

/// Shingle multiset keyed by token text, in first-occurrence order.
using TokenCounts = std::vector<std::pair<std::string, std::uint32_t>>;

/// Every length-k run of Unicode scalars, with multiplicity. Strings shorter
/// than k yield a single token padded with U+2400. Throws Error(Parameter)
/// for k == 0.
TokenCounts shingle(std::string_view text, std::size_t k);

/// Sparse non-negative vector over token ids. Entries are sorted by id and
/// carry strictly positive weights.
class ShingleBag {
 public:
  struct Entry {
    TokenId token = 0;
    double weight = 0.0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  ShingleBag() = default;
  /// Sorts, merges duplicate ids by summing, drops zero weights.
  /// Throws Error(Domain) on a negative or non-finite weight.
  explicit ShingleBag(std::vector<Entry> entries);

  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double weight(TokenId token) const noexcept;
  double max_weight() const noexcept;

  /// Token ids of the support, ascending.
  std::vector<TokenId> support() const;
  ShingleBag scaled(double factor) const;

  friend bool operator==(const ShingleBag&, const ShingleBag&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Token dictionary with document frequencies. Ids are dense in [0, size())
/// and assigned in first-encounter order over the corpus scan.
class Vocabulary {
 public:
  /// Throws Error(Parameter) for an empty corpus or k == 0.
  static Vocabulary build(const Corpus& corpus, std::size_t k,
                          std::span<const Field> fields);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t shingle_length() const noexcept { return k_; }
  std::size_t document_count() const noexcept { return documents_; }
  const std::vector<Field>& fields() const noexcept { return fields_; }

  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint32_t document_frequency(TokenId id) const { return df_.at(id); }

  /// Count-mode bag; throws Error(Vocabulary) for an unknown token.
  ShingleBag encode(const TokenCounts& counts) const;
  /// Count-mode bag of a record under this vocabulary's k and fields.
  ShingleBag bag(const Record& record) const;

  /// Dump lines `token_id<TAB>token<TAB>df`.
  void write(std::ostream& out) const;

 private:
  std::size_t k_ = 1;
  std::size_t documents_ = 0;
  std::vector<Field> fields_;
  std::vector<std::string> tokens_;
  std::vector<std::uint32_t> df_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// weight(t) = count(t) * ln(N / df(t)); tokens present in every document are
/// dropped. Throws Error(Vocabulary) for a token id outside the vocabulary.
ShingleBag idf_weight(const ShingleBag& bag, const Vocabulary& vocab);

enum class Weighting { Counts, Idf };

/// Bags for every record of the corpus under `vocab`, optionally IDF-weighted.
std::vector<ShingleBag> corpus_bags(const Corpus& corpus, const Vocabulary& vocab,
                                    Weighting weighting, unsigned workers = 1);

}  // namespace erblock
