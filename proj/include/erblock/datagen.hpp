#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erblock/record.hpp"

namespace erblock::datagen {

/// Noise applied to every copy of an entity after the first.
struct NoiseModel {
  double char_sub_rate = 0.02;   // per name character
  double char_swap_rate = 0.01;  // per adjacent name character pair
  double char_del_rate = 0.01;   // per name character
  int date_perturb_days = 3;     // uniform shift in [-r, r]
  double governorate_error_rate = 0.05;
  double field_drop_rate = 0.05;  // per date, governorate and sex field
  std::uint64_t seed = 0;

  static NoiseModel none(std::uint64_t seed = 0);
  /// Throws Error(Parameter) for a rate outside [0, 1] or a negative radius.
  void validate() const;
};

struct GenSpec {
  std::uint64_t n_entities = 1000;
  /// P(entity has 1, 2, 3, 4 records).
  std::array<double, 4> duplication{0.97, 0.02, 0.007, 0.003};
  std::vector<std::string> name_pool = default_names();
  std::size_t name_parts = 3;
  std::vector<std::string> governorates = default_governorates();
  std::string date_min = "2011-03-15";
  std::string date_max = "2016-12-31";
  /// Nonmatch pairs sampled per match pair.
  std::uint32_t nonmatch_ratio = 10;

  static std::vector<std::string> default_names();
  static std::vector<std::string> default_governorates();
  /// Throws Error(Config) for an empty name pool or governorate list and
  /// Error(Parameter) for a bad distribution, count or date range.
  void validate() const;
};

/// Reads one name per line, skipping blank lines; Error(Config) if none.
std::vector<std::string> load_name_pool(const std::filesystem::path& path);

struct EntityRecord {
  std::uint64_t entity = 0;
  RecordId record = 0;
};

struct Generated {
  Corpus corpus;
  TruthSet truth;
  std::vector<EntityRecord> entities;  // ordered by record id
};

/// Deterministic for a given (spec, noise). Records are shuffled and numbered
/// from 1; matches are all within-entity pairs, nonmatches a uniform sample
/// of cross-entity pairs.
Generated generate(const GenSpec& spec, const NoiseModel& noise);

/// CSV `entity_id,record_id`.
void write_entities(std::ostream& out, std::span<const EntityRecord> entities);

}  // namespace erblock::datagen
