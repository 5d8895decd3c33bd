#include "erblock/datagen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <unordered_set>

#include "bundled.hpp"
#include "erblock/error.hpp"
#include "erblock/hashing.hpp"
#include "erblock/unicode.hpp"

namespace erblock::datagen {

namespace {

constexpr std::u32string_view kAlphabet = U"ابتثجحخدذرزسشصضطظعغفقكلمنهويةىأإآءؤئ";
constexpr std::string_view kSources[] = {"S1", "S2", "S3", "S4"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double unit() { return to_unit(engine_()); }
  bool chance(double p) { return p > 0.0 && unit() < p; }
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::min<std::uint64_t>(n - 1, static_cast<std::uint64_t>(unit() * static_cast<double>(n)));
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(unicode::normalize_field(line));
    start = end + 1;
  }
  return out;
}

std::chrono::sys_days parse_day(const std::string& text) {
  if (text.empty() || !is_valid_date(text)) {
    fail(ErrorCode::Parameter, "invalid date '" + text + "'");
  }
  const int y = std::stoi(text.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(text.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(text.substr(8, 2)));
  return std::chrono::sys_days(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d});
}

std::string format_day(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd(day);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string noisy_name(const std::string& name, const NoiseModel& noise, Rng& rng) {
  std::u32string s = unicode::decode(name);
  std::u32string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c == U' ') {
      out.push_back(c);
      continue;
    }
    if (rng.chance(noise.char_del_rate)) continue;
    if (rng.chance(noise.char_sub_rate)) {
      char32_t r = c;
      while (r == c) r = kAlphabet[rng.below(kAlphabet.size())];
      c = r;
    }
    out.push_back(c);
  }
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    if (rng.chance(noise.char_swap_rate)) std::swap(out[i], out[i + 1]);
  }
  const bool blank = std::all_of(out.begin(), out.end(), [](char32_t c) { return c == U' '; });
  if (blank) return name;
  return unicode::encode(out);
}

}  // namespace

NoiseModel NoiseModel::none(std::uint64_t seed) {
  NoiseModel n;
  n.char_sub_rate = n.char_swap_rate = n.char_del_rate = 0.0;
  n.date_perturb_days = 0;
  n.governorate_error_rate = n.field_drop_rate = 0.0;
  n.seed = seed;
  return n;
}

void NoiseModel::validate() const {
  for (double r : {char_sub_rate, char_swap_rate, char_del_rate, governorate_error_rate,
                   field_drop_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::Parameter, "noise rates must lie in [0, 1]");
  }
  if (date_perturb_days < 0) fail(ErrorCode::Parameter, "date_perturb_days must be >= 0");
}

std::vector<std::string> GenSpec::default_names() { return lines_of(bundled::names()); }

std::vector<std::string> GenSpec::default_governorates() {
  return lines_of(bundled::governorates());
}

void GenSpec::validate() const {
  if (name_pool.empty()) fail(ErrorCode::Config, "name pool is empty");
  if (governorates.empty()) fail(ErrorCode::Config, "governorate list is empty");
  if (n_entities == 0) fail(ErrorCode::Parameter, "n_entities must be >= 1");
  if (name_parts == 0) fail(ErrorCode::Parameter, "name_parts must be >= 1");
  double sum = 0.0;
  for (double p : duplication) {
    if (!(p >= 0.0)) fail(ErrorCode::Parameter, "duplication probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorCode::Parameter, "duplication probabilities must sum to 1");
  }
  if (parse_day(date_max) < parse_day(date_min)) {
    fail(ErrorCode::Parameter, "date_max precedes date_min");
  }
}

std::vector<std::string> load_name_pool(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  auto names = lines_of(text);
  if (names.empty()) fail(ErrorCode::Config, "name pool " + path.string() + " is empty");
  return names;
}

Generated generate(const GenSpec& spec, const NoiseModel& noise) {
  spec.validate();
  noise.validate();
  Rng rng(derive_seed(noise.seed, 0x6E6E));
  const auto day_min = parse_day(spec.date_min);
  const auto span_days = (parse_day(spec.date_max) - day_min).count();

  struct Draft {
    std::uint64_t entity;
    Record record;
  };
  std::vector<Draft> drafts;
  drafts.reserve(static_cast<std::size_t>(spec.n_entities * 1.1));

  for (std::uint64_t e = 0; e < spec.n_entities; ++e) {
    const double u = rng.unit();
    std::size_t copies = 4;
    double acc = 0.0;
    for (std::size_t m = 0; m < 4; ++m) {
      acc += spec.duplication[m];
      if (u < acc) {
        copies = m + 1;
        break;
      }
    }
    while (spec.duplication[copies - 1] == 0.0 && copies > 1) --copies;

    Record base;
    for (std::size_t part = 0; part < spec.name_parts; ++part) {
      if (part) base.name += ' ';
      base.name += spec.name_pool[rng.below(spec.name_pool.size())];
    }
    const auto day = day_min + std::chrono::days(rng.between(0, span_days));
    base.date_of_death = format_day(day);
    base.governorate = spec.governorates[rng.below(spec.governorates.size())];
    base.sex = rng.unit() < 0.5 ? Sex::Male : Sex::Female;

    std::vector<std::string_view> sources(std::begin(kSources), std::end(kSources));
    for (std::size_t i = sources.size(); i > 1; --i) std::swap(sources[i - 1], sources[rng.below(i)]);

    for (std::size_t c = 0; c < copies; ++c) {
      Record r = base;
      r.source = std::string(sources[c]);
      if (c > 0) {
        r.name = noisy_name(base.name, noise, rng);
        if (noise.date_perturb_days > 0) {
          const auto shift = rng.between(-noise.date_perturb_days, noise.date_perturb_days);
          r.date_of_death = format_day(day + std::chrono::days(shift));
        }
        if (rng.chance(noise.governorate_error_rate) && spec.governorates.size() > 1) {
          std::string other = r.governorate;
          while (other == r.governorate) other = spec.governorates[rng.below(spec.governorates.size())];
          r.governorate = other;
        }
        if (rng.chance(noise.field_drop_rate)) r.date_of_death.clear();
        if (rng.chance(noise.field_drop_rate)) r.governorate.clear();
        if (rng.chance(noise.field_drop_rate)) r.sex = Sex::Unknown;
      }
      drafts.push_back({e, std::move(r)});
    }
  }

  for (std::size_t i = drafts.size(); i > 1; --i) std::swap(drafts[i - 1], drafts[rng.below(i)]);

  Generated out;
  std::vector<Record> records;
  records.reserve(drafts.size());
  std::vector<std::vector<RecordId>> members(spec.n_entities);
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    drafts[i].record.id = i + 1;
    members[drafts[i].entity].push_back(i + 1);
    out.entities.push_back({drafts[i].entity, i + 1});
    records.push_back(std::move(drafts[i].record));
  }
  out.corpus = Corpus(std::move(records));

  std::vector<LabeledPair> rows;
  std::unordered_set<Pair> matched;
  for (const auto& ids : members) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        rows.push_back({ids[i], ids[j], Label::Match});
        matched.insert(Pair::canonical(ids[i], ids[j]));
      }
    }
  }

  const std::uint64_t n = drafts.size();
  const std::uint64_t total = n * (n - 1) / 2;
  const std::uint64_t available = total - matched.size();
  const std::uint64_t target = std::min<std::uint64_t>(available, matched.size() * spec.nonmatch_ratio);
  if (target > 0 && target * 4 > available) {
    // Dense case: shuffle the explicit list of cross-entity pairs.
    std::vector<Pair> cross;
    cross.reserve(available);
    for (RecordId a = 1; a <= n; ++a) {
      for (RecordId b = a + 1; b <= n; ++b) {
        if (!matched.count(Pair{a, b})) cross.push_back({a, b});
      }
    }
    for (std::uint64_t i = 0; i < target; ++i) {
      std::swap(cross[i], cross[i + rng.below(cross.size() - i)]);
      rows.push_back({cross[i].a, cross[i].b, Label::NonMatch});
    }
  } else {
    std::unordered_set<Pair> chosen;
    while (chosen.size() < target) {
      const RecordId a = 1 + rng.below(n);
      const RecordId b = 1 + rng.below(n);
      if (a == b) continue;
      const Pair p = Pair::canonical(a, b);
      if (matched.count(p) || !chosen.insert(p).second) continue;
      rows.push_back({p.a, p.b, Label::NonMatch});
    }
  }
  out.truth = TruthSet::from_rows(rows);
  return out;
}

void write_entities(std::ostream& out, std::span<const EntityRecord> entities) {
  out << "entity_id,record_id\n";
  for (const auto& e : entities) out << e.entity << ',' << e.record << '\n';
}

}  // namespace erblock::datagen
