#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace erblock {

using RecordId = std::uint64_t;

enum class Sex { Male, Female, Unknown };

std::string_view sex_code(Sex sex) noexcept;
/// Accepts M/F (any case), "unknown"/"U" and the empty string.
std::optional<Sex> parse_sex(std::string_view text) noexcept;

struct Record {
  RecordId id = 0;
  std::string name;
  std::string date_of_death;  // YYYY-MM-DD or empty
  std::string governorate;
  Sex sex = Sex::Unknown;
  std::string source;

  friend bool operator==(const Record&, const Record&) = default;
};

/// True for the empty string or a valid proleptic-Gregorian YYYY-MM-DD date.
bool is_valid_date(std::string_view text) noexcept;

/// Ordered, immutable set of records with distinct ids.
class Corpus {
 public:
  Corpus() = default;
  /// Throws Error(DuplicateId) if two records share an id.
  explicit Corpus(std::vector<Record> records);

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const Record& operator[](std::size_t index) const { return records_[index]; }
  std::span<const Record> records() const noexcept { return records_; }

  std::optional<std::size_t> index_of(RecordId id) const;

 private:
  std::vector<Record> records_;
  std::unordered_map<RecordId, std::size_t> index_;
};

/// Unordered record pair stored with the smaller id first.
struct Pair {
  RecordId a = 0;
  RecordId b = 0;

  static Pair canonical(RecordId x, RecordId y) noexcept {
    return x < y ? Pair{x, y} : Pair{y, x};
  }

  friend auto operator<=>(const Pair&, const Pair&) = default;
};

enum class Label { Match, NonMatch };

struct LabeledPair {
  RecordId a = 0;
  RecordId b = 0;
  Label label = Label::Match;
};

/// Hand-labeled ground truth. Pairs absent from both lists are unlabeled.
class TruthSet {
 public:
  TruthSet() = default;

  /// Canonicalizes and deduplicates. Throws Error(Consistency) for a pair
  /// carrying both labels and Error(Domain) for a self-pair.
  static TruthSet from_rows(std::span<const LabeledPair> rows);

  /// Sorted, canonical, duplicate-free.
  std::span<const Pair> matches() const noexcept { return matches_; }
  std::span<const Pair> nonmatches() const noexcept { return nonmatches_; }

  std::optional<Label> label(RecordId x, RecordId y) const;

  std::size_t labeled_count() const noexcept {
    return matches_.size() + nonmatches_.size();
  }

  friend bool operator==(const TruthSet&, const TruthSet&) = default;

 private:
  std::vector<Pair> matches_;
  std::vector<Pair> nonmatches_;
};

Corpus load_corpus(const std::filesystem::path& path);
Corpus read_corpus(std::istream& in);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// When `corpus` is given every id must belong to it (Error(Referential)).
TruthSet load_truth(const std::filesystem::path& path,
                    const Corpus* corpus = nullptr);
TruthSet read_truth(std::istream& in, const Corpus* corpus = nullptr);
void write_truth(std::ostream& out, const TruthSet& truth);
void save_truth(const std::filesystem::path& path, const TruthSet& truth);

/// Candidate-pair dump `id_a,id_b`, canonical order, sorted.
std::vector<Pair> load_pairs(const std::filesystem::path& path);
std::vector<Pair> read_pairs(std::istream& in);
void write_pairs(std::ostream& out, std::span<const Pair> pairs);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace erblock

template <>
struct std::hash<erblock::Pair> {
  std::size_t operator()(const erblock::Pair& p) const noexcept {
    std::uint64_t h = p.a * 0x9E3779B97F4A7C15ULL ^ (p.b + 0x632BE59BD9B4E019ULL);
    h ^= h >> 31;
    return static_cast<std::size_t>(h * 0xBF58476D1CE4E5B9ULL);
  }
};
