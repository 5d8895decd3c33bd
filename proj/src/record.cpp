#include "erblock/record.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <sstream>

#include "erblock/csv.hpp"
#include "erblock/error.hpp"
#include "erblock/unicode.hpp"

namespace erblock {

namespace {

std::string at_line(std::size_t line, const std::string& message) {
  return "line " + std::to_string(line) + ": " + message;
}

bool parse_uint(std::string_view text, std::uint64_t& value) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

bool is_blank_row(const std::vector<std::string>& row) {
  return row.size() == 1 && row[0].empty();
}

}  // namespace

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "IO";
    case ErrorCode::Schema: return "SCHEMA";
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::Consistency: return "CONSISTENCY";
    case ErrorCode::Referential: return "REFERENTIAL";
    case ErrorCode::Parameter: return "PARAMETER";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::Vocabulary: return "VOCABULARY";
    case ErrorCode::SizeGuard: return "SIZE_GUARD";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Usage: return "USAGE";
  }
  return "UNKNOWN";
}

std::string_view sex_code(Sex sex) noexcept {
  switch (sex) {
    case Sex::Male: return "M";
    case Sex::Female: return "F";
    case Sex::Unknown: return "";
  }
  return "";
}

std::optional<Sex> parse_sex(std::string_view text) noexcept {
  if (text == "M" || text == "m") return Sex::Male;
  if (text == "F" || text == "f") return Sex::Female;
  if (text.empty() || text == "U" || text == "u" || text == "unknown") {
    return Sex::Unknown;
  }
  return std::nullopt;
}

bool is_valid_date(std::string_view text) noexcept {
  if (text.empty()) return true;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  std::uint64_t y = 0, m = 0, d = 0;
  if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
      !parse_uint(text.substr(8, 2), d)) {
    return false;
  }
  const std::chrono::year_month_day ymd{
      std::chrono::year(static_cast<int>(y)),
      std::chrono::month(static_cast<unsigned>(m)),
      std::chrono::day(static_cast<unsigned>(d))};
  return ymd.ok();
}

Corpus::Corpus(std::vector<Record> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      fail(ErrorCode::DuplicateId,
           "duplicate record id " + std::to_string(records_[i].id));
    }
  }
}

std::optional<std::size_t> Corpus::index_of(RecordId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TruthSet TruthSet::from_rows(std::span<const LabeledPair> rows) {
  TruthSet truth;
  for (const auto& row : rows) {
    if (row.a == row.b) {
      fail(ErrorCode::Domain,
           "self-pair (" + std::to_string(row.a) + ", " + std::to_string(row.a) + ")");
    }
    const Pair p = Pair::canonical(row.a, row.b);
    (row.label == Label::Match ? truth.matches_ : truth.nonmatches_).push_back(p);
  }
  for (auto* list : {&truth.matches_, &truth.nonmatches_}) {
    std::sort(list->begin(), list->end());
    list->erase(std::unique(list->begin(), list->end()), list->end());
  }
  std::vector<Pair> both;
  std::set_intersection(truth.matches_.begin(), truth.matches_.end(),
                        truth.nonmatches_.begin(), truth.nonmatches_.end(),
                        std::back_inserter(both));
  if (!both.empty()) {
    fail(ErrorCode::Consistency, "pair (" + std::to_string(both.front().a) + ", " +
                                     std::to_string(both.front().b) +
                                     ") labeled both match and nonmatch");
  }
  return truth;
}

std::optional<Label> TruthSet::label(RecordId x, RecordId y) const {
  const Pair p = Pair::canonical(x, y);
  if (std::binary_search(matches_.begin(), matches_.end(), p)) return Label::Match;
  if (std::binary_search(nonmatches_.begin(), nonmatches_.end(), p)) {
    return Label::NonMatch;
  }
  return std::nullopt;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

Corpus read_corpus(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) fail(ErrorCode::Schema, "missing header row");

  enum Column { kId, kName, kDate, kGovernorate, kSex, kSource, kColumns };
  constexpr std::array<std::string_view, kColumns> names = {
      "id", "name", "date_of_death", "governorate", "sex", "source"};
  std::array<int, kColumns> position;
  position.fill(-1);
  for (std::size_t i = 0; i < header->size(); ++i) {
    std::string column = (*header)[i];
    if (i == 0 && column.starts_with("\xEF\xBB\xBF")) column.erase(0, 3);
    for (int c = 0; c < kColumns; ++c) {
      if (column == names[c]) {
        if (position[c] != -1) {
          fail(ErrorCode::Schema, "duplicate column '" + column + "'");
        }
        position[c] = static_cast<int>(i);
      }
    }
  }
  for (int c : {kName, kDate, kGovernorate, kSex}) {
    if (position[c] == -1) {
      fail(ErrorCode::Schema,
           "missing required column '" + std::string(names[c]) + "'");
    }
  }

  std::vector<Record> records;
  std::unordered_map<RecordId, std::size_t> seen_line;
  while (auto row = reader.next()) {
    if (is_blank_row(*row)) continue;
    const std::size_t line = reader.line();
    if (row->size() != header->size()) {
      fail(ErrorCode::Parse,
           at_line(line, "expected " + std::to_string(header->size()) +
                             " fields, found " + std::to_string(row->size())));
    }
    auto field = [&](int c) -> std::string {
      return position[c] == -1 ? std::string() : (*row)[position[c]];
    };

    Record r;
    if (position[kId] != -1) {
      if (!parse_uint(field(kId), r.id)) {
        fail(ErrorCode::Parse, at_line(line, "invalid id '" + field(kId) + "'"));
      }
      auto [it, inserted] = seen_line.emplace(r.id, line);
      if (!inserted) {
        fail(ErrorCode::DuplicateId,
             at_line(line, "id " + std::to_string(r.id) +
                               " already used on line " + std::to_string(it->second)));
      }
    } else {
      r.id = records.size();
    }
    try {
      r.name = unicode::normalize_field(field(kName));
      r.date_of_death = unicode::normalize_field(field(kDate));
      r.governorate = unicode::normalize_field(field(kGovernorate));
      r.source = unicode::normalize_field(field(kSource));
    } catch (const Error& e) {
      fail(ErrorCode::Parse, at_line(line, e.what()));
    }
    if (!is_valid_date(r.date_of_death)) {
      fail(ErrorCode::Parse,
           at_line(line, "invalid date_of_death '" + r.date_of_death + "'"));
    }
    auto sex = parse_sex(field(kSex));
    if (!sex) fail(ErrorCode::Parse, at_line(line, "invalid sex '" + field(kSex) + "'"));
    r.sex = *sex;
    records.push_back(std::move(r));
  }
  return Corpus(std::move(records));
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  out << "id,name,date_of_death,governorate,sex,source\n";
  for (const Record& r : corpus.records()) {
    csv::write_row(out, {std::to_string(r.id), r.name, r.date_of_death,
                         r.governorate, std::string(sex_code(r.sex)), r.source});
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  auto out = open_output(path);
  write_corpus(out, corpus);
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

TruthSet read_truth(std::istream& in, const Corpus* corpus) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return TruthSet{};
  if (header->size() != 3 || (*header)[0] != "id_a" || (*header)[1] != "id_b" ||
      (*header)[2] != "label") {
    fail(ErrorCode::Schema, "truth header must be 'id_a,id_b,label'");
  }
  std::vector<LabeledPair> rows;
  while (auto row = reader.next()) {
    if (is_blank_row(*row)) continue;
    const std::size_t line = reader.line();
    if (row->size() != 3) fail(ErrorCode::Parse, at_line(line, "expected 3 fields"));
    LabeledPair lp;
    if (!parse_uint((*row)[0], lp.a) || !parse_uint((*row)[1], lp.b)) {
      fail(ErrorCode::Parse, at_line(line, "invalid id"));
    }
    if ((*row)[2] == "match") {
      lp.label = Label::Match;
    } else if ((*row)[2] == "nonmatch") {
      lp.label = Label::NonMatch;
    } else {
      fail(ErrorCode::Parse, at_line(line, "invalid label '" + (*row)[2] + "'"));
    }
    if (corpus != nullptr) {
      for (RecordId id : {lp.a, lp.b}) {
        if (!corpus->index_of(id)) {
          fail(ErrorCode::Referential,
               at_line(line, "id " + std::to_string(id) + " not in corpus"));
        }
      }
    }
    if (lp.a == lp.b) fail(ErrorCode::Domain, at_line(line, "self-pair"));
    rows.push_back(lp);
  }
  return TruthSet::from_rows(rows);
}

TruthSet load_truth(const std::filesystem::path& path, const Corpus* corpus) {
  auto in = open_input(path);
  return read_truth(in, corpus);
}

void write_truth(std::ostream& out, const TruthSet& truth) {
  out << "id_a,id_b,label\n";
  for (const Pair& p : truth.matches()) out << p.a << ',' << p.b << ",match\n";
  for (const Pair& p : truth.nonmatches()) out << p.a << ',' << p.b << ",nonmatch\n";
}

void save_truth(const std::filesystem::path& path, const TruthSet& truth) {
  auto out = open_output(path);
  write_truth(out, truth);
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<Pair> read_pairs(std::istream& in) {
  csv::Reader reader(in);
  std::vector<Pair> pairs;
  while (auto row = reader.next()) {
    if (is_blank_row(*row)) continue;
    const std::size_t line = reader.line();
    if (row->size() != 2) fail(ErrorCode::Parse, at_line(line, "expected 2 fields"));
    RecordId a = 0, b = 0;
    if (!parse_uint((*row)[0], a) || !parse_uint((*row)[1], b)) {
      if (line == 1) continue;  // optional `id_a,id_b` header
      fail(ErrorCode::Parse, at_line(line, "invalid id"));
    }
    if (a == b) fail(ErrorCode::Domain, at_line(line, "self-pair"));
    pairs.push_back(Pair::canonical(a, b));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<Pair> load_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_pairs(in);
}

void write_pairs(std::ostream& out, std::span<const Pair> pairs) {
  for (const Pair& p : pairs) out << p.a << ',' << p.b << '\n';
}

}  // namespace erblock
