#include "erblock/erblock.h"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>
#include <filesystem>
#include <functional>
#include <memory>
#include <new>
#include <set>
#include <sstream>
#include <string>

#include "erblock/aeda.hpp"
#include "erblock/csv.hpp"
#include "erblock/datagen.hpp"
#include "erblock/error.hpp"
#include "erblock/klsh.hpp"
#include "erblock/lsh.hpp"
#include "erblock/metrics.hpp"
#include "erblock/parallel.hpp"
#include "erblock/record.hpp"
#include "erblock/rules.hpp"
#include "erblock/shingling.hpp"

using namespace erblock;

struct erb_corpus {
  Corpus corpus;
};

struct erb_truth {
  TruthSet truth;
};

struct erb_blocking {
  const Corpus* corpus = nullptr;
  erb_method method = ERB_METHOD_DOPH;
  std::unique_ptr<CandidateSource> source;
  std::function<void(std::ostream&)> dump;
  std::uint64_t unmapped = 0;
};

namespace {

thread_local std::string last_error;

erb_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return ERB_ERR_IO;
    case ErrorCode::Schema: return ERB_ERR_SCHEMA;
    case ErrorCode::Parse: return ERB_ERR_PARSE;
    case ErrorCode::DuplicateId: return ERB_ERR_DUPLICATE_ID;
    case ErrorCode::Consistency: return ERB_ERR_CONSISTENCY;
    case ErrorCode::Referential: return ERB_ERR_REFERENTIAL;
    case ErrorCode::Parameter: return ERB_ERR_PARAMETER;
    case ErrorCode::Domain: return ERB_ERR_DOMAIN;
    case ErrorCode::Vocabulary: return ERB_ERR_VOCABULARY;
    case ErrorCode::SizeGuard: return ERB_ERR_SIZE_GUARD;
    case ErrorCode::Config: return ERB_ERR_CONFIG;
    case ErrorCode::Usage: return ERB_ERR_USAGE;
  }
  return ERB_ERR_INTERNAL;
}

template <typename Fn>
erb_status guarded(Fn&& fn) noexcept {
  try {
    last_error.clear();
    fn();
    return ERB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ERB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ERB_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return ERB_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::Usage, std::string(what) + " must not be NULL");
}

unsigned workers_or_default(unsigned w) { return w == 0 ? default_workers() : w; }

std::vector<Field> fields_or_default(const char* text) {
  if (text == nullptr || *text == '\0') return default_fields();
  return parse_fields(text);
}

erb_metrics to_c(const BlockingMetrics& m) {
  erb_metrics out{};
  out.tp = m.tp;
  out.fp = m.fp;
  out.fn = m.fn;
  out.tn = m.tn;
  out.has_recall = m.recall.has_value();
  out.recall = m.recall.value_or(0.0);
  out.precision = m.precision;
  out.has_rr = m.rr.has_value();
  out.rr = m.rr.value_or(0.0);
  out.candidate_count = m.candidate_count;
  out.total_pairs = m.total_pairs;
  return out;
}

std::vector<RecordId> ids_of(const Corpus& corpus) {
  std::vector<RecordId> ids(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) ids[i] = corpus[i].id;
  return ids;
}

aeda::CostTables make_tables(const erb_aeda_params& p) {
  const int given = (p.phonetic_path != nullptr) + (p.letterform_path != nullptr) +
                    (p.keyboard_path != nullptr);
  const aeda::Weights w{p.omega, p.lambda, p.sigma};
  if (given == 0) {
    aeda::CostTables t = aeda::CostTables::defaults();
    t.set_weights(w);
    t.set_psi(p.psi);
    return t;
  }
  if (given != 3) {
    fail(ErrorCode::Config, "phonetic, letter-form and keyboard tables must be given together");
  }
  return aeda::CostTables::load(p.phonetic_path, p.letterform_path, p.keyboard_path, p.psi, w);
}

std::uint32_t position(const Corpus& corpus, RecordId id) {
  auto i = corpus.index_of(id);
  if (!i) fail(ErrorCode::Referential, "id " + std::to_string(id) + " is not in the corpus");
  return static_cast<std::uint32_t>(*i);
}

std::string row_key(const std::string& method, std::size_t shingle, std::uint32_t K,
                    std::uint32_t L, std::uint64_t seed) {
  return method + '\x1F' + std::to_string(shingle) + '\x1F' + std::to_string(K) + '\x1F' +
         std::to_string(L) + '\x1F' + std::to_string(seed);
}

// Keys of the complete rows of an earlier sweep file. The file is cut back to
// its last complete line, and rewritten with a header if it has none.
std::set<std::string> completed_rows(const char* path) {
  std::set<std::string> keys;
  if (!std::filesystem::exists(path)) return keys;
  std::string text;
  {
    auto in = open_input(path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const std::size_t end = text.rfind('\n');
  text.resize(end == std::string::npos ? 0 : end + 1);
  std::ostringstream header;
  write_sweep_header(header);
  if (text.rfind(header.str(), 0) != 0) text = header.str();
  {
    auto out = open_output(path);
    out << text;
    if (!out) fail(ErrorCode::Io, std::string("failed rewriting ") + path);
  }
  std::istringstream in(text);
  csv::Reader reader(in);
  reader.next();
  while (auto row = reader.next()) {
    if (row->size() != 10) continue;
    try {
      keys.insert(row_key((*row)[0], std::stoull((*row)[1]),
                          static_cast<std::uint32_t>(std::stoul((*row)[2])),
                          static_cast<std::uint32_t>(std::stoul((*row)[3])), std::stoull((*row)[4])));
    } catch (const std::exception&) {
      // Malformed rows are recomputed.
    }
  }
  return keys;
}

void write_rule_blocks(std::ostream& out, const std::vector<Partition>& partitions,
                       const std::vector<RecordId>& ids) {
  for (std::size_t r = 0; r < partitions.size(); ++r) {
    const auto blocks = partitions[r].blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::uint32_t m : blocks[b]) out << r << '\t' << b << '\t' << ids[m] << '\n';
    }
  }
}

void block_hashing(erb_blocking& blk, const erb_block_params& p) {
  const Corpus& corpus = *blk.corpus;
  const unsigned workers = workers_or_default(p.workers);
  const auto fields = fields_or_default(p.fields);
  const Vocabulary vocab = Vocabulary::build(corpus, p.shingle, fields);
  HashScheme scheme{p.K, p.L, p.seed, HashMode::Doph};
  std::unique_ptr<BlockAssignment> blocks;
  if (p.method == ERB_METHOD_WEIGHTED_DOPH) {
    scheme.mode = HashMode::WeightedDoph;
    const auto bags =
        corpus_bags(corpus, vocab, p.idf_weighting ? Weighting::Idf : Weighting::Counts, workers);
    const double normalizer = corpus_max_weight(bags);
    if (!(normalizer > 0.0)) fail(ErrorCode::Domain, "every weighted bag is empty");
    blocks = std::make_unique<BlockAssignment>(
        weighted_hash_blocks(bags, normalizer, scheme, workers));
  } else {
    if (p.method == ERB_METHOD_CLASSICAL) scheme.mode = HashMode::Classical;
    const auto bags = corpus_bags(corpus, vocab, Weighting::Counts, workers);
    std::vector<TokenSet> sets;
    sets.reserve(bags.size());
    for (const auto& b : bags) sets.push_back(b.support());
    blocks = std::make_unique<BlockAssignment>(hash_blocks(sets, scheme, workers));
  }
  const BlockAssignment* raw = blocks.get();
  blk.dump = [raw, ids = ids_of(corpus)](std::ostream& out) { raw->write_dump(out, ids); };
  blk.source = std::move(blocks);
}

void block_klsh(erb_blocking& blk, const erb_block_params& p) {
  klsh::KlshParams kp;
  kp.shingle = p.shingle;
  kp.projections = p.projections;
  kp.clusters = p.clusters;
  kp.seed = p.seed;
  kp.fields = fields_or_default(p.fields);
  kp.kmeans.max_iterations = p.kmeans_iterations;
  kp.kmeans.workers = workers_or_default(p.workers);
  auto model = std::make_shared<klsh::ClusterModel>(klsh::klsh_assign(*blk.corpus, kp));
  blk.source = std::make_unique<Partition>(model->partition());
  blk.dump = [model, ids = ids_of(*blk.corpus)](std::ostream& out) {
    model->write_dump(out, ids);
  };
}

void block_rules(erb_blocking& blk, const erb_block_params& p) {
  if (p.scheme == nullptr) fail(ErrorCode::Parameter, "rules blocking needs a scheme");
  const Corpus& corpus = *blk.corpus;
  const auto scheme = rules::DisjunctionScheme::parse(p.scheme);
  auto disjunction = std::make_shared<rules::DisjunctionBlocking>(corpus, scheme);
  blk.dump = [disjunction, ids = ids_of(corpus)](std::ostream& out) {
    write_rule_blocks(out, disjunction->partitions(), ids);
  };
  if (p.method == ERB_METHOD_RULES) {
    blk.source = std::make_unique<rules::DisjunctionBlocking>(*disjunction);
    return;
  }
  const aeda::CostTables tables = make_tables(p.aeda);
  aeda::RefineOptions options;
  options.percentile = p.percentile;
  options.workers = workers_or_default(p.workers);
  aeda::Warnings warnings;
  std::vector<IndexPair> kept;
  for (const Partition& part : disjunction->partitions()) {
    for (const auto& s : aeda::refine_partition(part, corpus, tables, options, &warnings)) {
      kept.push_back(s.pair);
    }
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  blk.source = std::make_unique<PairList>(corpus.size(), std::move(kept));
  blk.unmapped = warnings.unmapped;
}

}  // namespace

extern "C" {

const char* erb_version(void) { return "0.1.0"; }

const char* erb_status_name(erb_status status) {
  switch (status) {
    case ERB_OK: return "OK";
    case ERB_ERR_IO: return "IO";
    case ERB_ERR_SCHEMA: return "SCHEMA";
    case ERB_ERR_PARSE: return "PARSE";
    case ERB_ERR_DUPLICATE_ID: return "DUPLICATE_ID";
    case ERB_ERR_CONSISTENCY: return "CONSISTENCY";
    case ERB_ERR_REFERENTIAL: return "REFERENTIAL";
    case ERB_ERR_PARAMETER: return "PARAMETER";
    case ERB_ERR_DOMAIN: return "DOMAIN";
    case ERB_ERR_VOCABULARY: return "VOCABULARY";
    case ERB_ERR_SIZE_GUARD: return "SIZE_GUARD";
    case ERB_ERR_CONFIG: return "CONFIG";
    case ERB_ERR_USAGE: return "USAGE";
    case ERB_ERR_INTERNAL: return "INTERNAL";
  }
  return "UNKNOWN";
}

const char* erb_last_error(void) { return last_error.c_str(); }

erb_status erb_corpus_load(const char* path, erb_corpus** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto c = std::make_unique<erb_corpus>();
    c->corpus = load_corpus(path);
    *out = c.release();
  });
}

erb_status erb_corpus_save(const erb_corpus* corpus, const char* path) {
  return guarded([&] {
    need(corpus, "corpus");
    need(path, "path");
    save_corpus(path, corpus->corpus);
  });
}

size_t erb_corpus_size(const erb_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.size();
}

erb_status erb_corpus_record_id(const erb_corpus* corpus, size_t index, uint64_t* out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(out, "out");
    if (index >= corpus->corpus.size()) fail(ErrorCode::Parameter, "record index out of range");
    *out = corpus->corpus[index].id;
  });
}

void erb_corpus_free(erb_corpus* corpus) { delete corpus; }

erb_status erb_truth_load(const char* path, const erb_corpus* corpus, erb_truth** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto t = std::make_unique<erb_truth>();
    t->truth = load_truth(path, corpus ? &corpus->corpus : nullptr);
    *out = t.release();
  });
}

size_t erb_truth_match_count(const erb_truth* truth) {
  return truth == nullptr ? 0 : truth->truth.matches().size();
}

size_t erb_truth_nonmatch_count(const erb_truth* truth) {
  return truth == nullptr ? 0 : truth->truth.nonmatches().size();
}

void erb_truth_free(erb_truth* truth) { delete truth; }

erb_status erb_vocabulary_write(const erb_corpus* corpus, size_t shingle, const char* fields,
                                const char* path) {
  return guarded([&] {
    need(corpus, "corpus");
    need(path, "path");
    const Vocabulary vocab = Vocabulary::build(corpus->corpus, shingle, fields_or_default(fields));
    auto out = open_output(path);
    vocab.write(out);
    if (!out) fail(ErrorCode::Io, std::string("failed writing ") + path);
  });
}

void erb_gen_params_init(erb_gen_params* params) {
  if (params == nullptr) return;
  const datagen::GenSpec spec{.name_pool = {}, .governorates = {}};
  const datagen::NoiseModel noise;
  *params = erb_gen_params{};
  params->n_entities = spec.n_entities;
  std::copy(spec.duplication.begin(), spec.duplication.end(), params->duplication);
  params->name_pool_path = nullptr;
  params->name_parts = spec.name_parts;
  params->date_min = "2011-03-15";
  params->date_max = "2016-12-31";
  params->nonmatch_ratio = spec.nonmatch_ratio;
  params->char_sub_rate = noise.char_sub_rate;
  params->char_swap_rate = noise.char_swap_rate;
  params->char_del_rate = noise.char_del_rate;
  params->date_perturb_days = noise.date_perturb_days;
  params->governorate_error_rate = noise.governorate_error_rate;
  params->field_drop_rate = noise.field_drop_rate;
  params->seed = 0;
}

erb_status erb_generate(const erb_gen_params* params, const char* corpus_path,
                        const char* truth_path, const char* entities_path,
                        erb_gen_summary* summary) {
  return guarded([&] {
    need(params, "params");
    need(corpus_path, "corpus_path");
    need(truth_path, "truth_path");
    need(entities_path, "entities_path");
    datagen::GenSpec spec;
    spec.n_entities = params->n_entities;
    std::copy(params->duplication, params->duplication + 4, spec.duplication.begin());
    if (params->name_pool_path) spec.name_pool = datagen::load_name_pool(params->name_pool_path);
    spec.name_parts = params->name_parts;
    if (params->date_min) spec.date_min = params->date_min;
    if (params->date_max) spec.date_max = params->date_max;
    spec.nonmatch_ratio = params->nonmatch_ratio;
    datagen::NoiseModel noise;
    noise.char_sub_rate = params->char_sub_rate;
    noise.char_swap_rate = params->char_swap_rate;
    noise.char_del_rate = params->char_del_rate;
    noise.date_perturb_days = params->date_perturb_days;
    noise.governorate_error_rate = params->governorate_error_rate;
    noise.field_drop_rate = params->field_drop_rate;
    noise.seed = params->seed;

    const datagen::Generated g = datagen::generate(spec, noise);
    save_corpus(corpus_path, g.corpus);
    save_truth(truth_path, g.truth);
    auto out = open_output(entities_path);
    datagen::write_entities(out, g.entities);
    if (!out) fail(ErrorCode::Io, std::string("failed writing ") + entities_path);
    if (summary) {
      summary->records = g.corpus.size();
      summary->matches = g.truth.matches().size();
      summary->nonmatches = g.truth.nonmatches().size();
    }
  });
}

erb_status erb_method_parse(const char* name, erb_method* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    for (int m = ERB_METHOD_CLASSICAL; m <= ERB_METHOD_RULES_AEDA; ++m) {
      if (std::strcmp(name, erb_method_name(static_cast<erb_method>(m))) == 0) {
        *out = static_cast<erb_method>(m);
        return;
      }
    }
    fail(ErrorCode::Usage, std::string("unknown method '") + name + "'");
  });
}

const char* erb_method_name(erb_method method) {
  switch (method) {
    case ERB_METHOD_CLASSICAL: return "classical";
    case ERB_METHOD_DOPH: return "doph";
    case ERB_METHOD_WEIGHTED_DOPH: return "weighted-doph";
    case ERB_METHOD_KLSH: return "klsh";
    case ERB_METHOD_RULES: return "rules";
    case ERB_METHOD_RULES_AEDA: return "rules+aeda";
  }
  return "unknown";
}

void erb_aeda_params_init(erb_aeda_params* params) {
  if (params == nullptr) return;
  const aeda::Weights w;
  *params = erb_aeda_params{w.omega, w.lambda, w.sigma, 12.0, nullptr, nullptr, nullptr};
}

void erb_block_params_init(erb_block_params* params) {
  if (params == nullptr) return;
  *params = erb_block_params{};
  params->method = ERB_METHOD_DOPH;
  params->K = 15;
  params->L = 100;
  params->shingle = 3;
  params->seed = 0;
  params->fields = nullptr;
  params->idf_weighting = 0;
  params->projections = 20;
  params->clusters = 100;
  params->kmeans_iterations = 100;
  params->scheme = nullptr;
  params->percentile = 10.0;
  erb_aeda_params_init(&params->aeda);
  params->workers = 0;
}

erb_status erb_block(const erb_corpus* corpus, const erb_block_params* params,
                     erb_blocking** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(params, "params");
    need(out, "out");
    *out = nullptr;
    auto blk = std::make_unique<erb_blocking>();
    blk->corpus = &corpus->corpus;
    blk->method = params->method;
    switch (params->method) {
      case ERB_METHOD_CLASSICAL:
      case ERB_METHOD_DOPH:
      case ERB_METHOD_WEIGHTED_DOPH: block_hashing(*blk, *params); break;
      case ERB_METHOD_KLSH: block_klsh(*blk, *params); break;
      case ERB_METHOD_RULES:
      case ERB_METHOD_RULES_AEDA: block_rules(*blk, *params); break;
      default: fail(ErrorCode::Usage, "unknown blocking method");
    }
    *out = blk.release();
  });
}

uint64_t erb_blocking_candidate_count(const erb_blocking* blocking) {
  return blocking == nullptr ? 0 : blocking->source->count();
}

erb_status erb_blocking_contains(const erb_blocking* blocking, uint64_t id_a, uint64_t id_b,
                                 int* out) {
  return guarded([&] {
    need(blocking, "blocking");
    need(out, "out");
    const std::uint32_t a = position(*blocking->corpus, id_a);
    const std::uint32_t b = position(*blocking->corpus, id_b);
    *out = blocking->source->contains(a, b) ? 1 : 0;
  });
}

erb_status erb_blocking_write_pairs(const erb_blocking* blocking, const char* path) {
  return guarded([&] {
    need(blocking, "blocking");
    need(path, "path");
    const Corpus& corpus = *blocking->corpus;
    const auto index_pairs = blocking->source->pairs();
    std::vector<Pair> pairs;
    pairs.reserve(index_pairs.size());
    for (const auto& p : index_pairs) {
      pairs.push_back(Pair::canonical(corpus[p.a].id, corpus[p.b].id));
    }
    std::sort(pairs.begin(), pairs.end());
    auto out = open_output(path);
    write_pairs(out, pairs);
    if (!out) fail(ErrorCode::Io, std::string("failed writing ") + path);
  });
}

erb_status erb_blocking_write_blocks(const erb_blocking* blocking, const char* path) {
  return guarded([&] {
    need(blocking, "blocking");
    need(path, "path");
    auto out = open_output(path);
    blocking->dump(out);
    if (!out) fail(ErrorCode::Io, std::string("failed writing ") + path);
  });
}

uint64_t erb_blocking_unmapped_chars(const erb_blocking* blocking) {
  return blocking == nullptr ? 0 : blocking->unmapped;
}

void erb_blocking_free(erb_blocking* blocking) { delete blocking; }

erb_status erb_blocking_evaluate(const erb_blocking* blocking, const erb_truth* truth,
                                 erb_metrics* out) {
  return guarded([&] {
    need(blocking, "blocking");
    need(truth, "truth");
    need(out, "out");
    const IndexedTruth indexed = index_truth(truth->truth, *blocking->corpus);
    *out = to_c(evaluate(*blocking->source, indexed));
  });
}

erb_status erb_evaluate_pairs(const erb_corpus* corpus, const char* pairs_path,
                              const erb_truth* truth, erb_metrics* out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(pairs_path, "pairs_path");
    need(truth, "truth");
    need(out, "out");
    const auto pairs = load_pairs(pairs_path);
    for (const Pair& p : pairs) {
      position(corpus->corpus, p.a);
      position(corpus->corpus, p.b);
    }
    index_truth(truth->truth, corpus->corpus);
    *out = to_c(confusion(pairs, truth->truth, corpus->corpus.size()));
  });
}

void erb_sweep_params_init(erb_sweep_params* params) {
  if (params == nullptr) return;
  *params = erb_sweep_params{};
  params->method = ERB_METHOD_DOPH;
  params->kmeans_iterations = 100;
}

erb_status erb_reference_axes(uint32_t divisor, uint32_t* K, size_t* K_count, uint32_t* L,
                              size_t* L_count, size_t* shingles, size_t* shingle_count) {
  return guarded([&] {
    need(K, "K");
    need(K_count, "K_count");
    need(L, "L");
    need(L_count, "L_count");
    need(shingles, "shingles");
    need(shingle_count, "shingle_count");
    const SweepGrid g = reference_grid(SweepMethod::Doph, divisor);
    std::copy(g.K.begin(), g.K.end(), K);
    *K_count = g.K.size();
    std::copy(g.L.begin(), g.L.end(), L);
    *L_count = g.L.size();
    std::copy(g.shingles.begin(), g.shingles.end(), shingles);
    *shingle_count = g.shingles.size();
  });
}

erb_status erb_sweep(const erb_corpus* corpus, const erb_truth* truth,
                     const erb_sweep_params* params, const char* csv_path,
                     erb_sweep_callback callback, void* user) {
  return guarded([&] {
    need(corpus, "corpus");
    need(truth, "truth");
    need(params, "params");
    SweepGrid g;
    switch (params->method) {
      case ERB_METHOD_CLASSICAL: g.method = SweepMethod::Classical; break;
      case ERB_METHOD_DOPH: g.method = SweepMethod::Doph; break;
      case ERB_METHOD_WEIGHTED_DOPH: g.method = SweepMethod::WeightedDoph; break;
      case ERB_METHOD_KLSH: g.method = SweepMethod::Klsh; break;
      case ERB_METHOD_RULES: g.method = SweepMethod::Rules; break;
      default: fail(ErrorCode::Usage, "method cannot be swept");
    }
    auto copy_axis = [](auto& dst, const auto* src, std::size_t n) {
      if (n > 0 && src == nullptr) fail(ErrorCode::Usage, "sweep axis pointer is NULL");
      dst.assign(src, src + n);
    };
    copy_axis(g.K, params->K, params->K_count);
    copy_axis(g.L, params->L, params->L_count);
    copy_axis(g.shingles, params->shingles, params->shingle_count);
    copy_axis(g.seeds, params->seeds, params->seed_count);
    for (std::size_t i = 0; i < params->scheme_count; ++i) {
      need(params->schemes, "schemes");
      need(params->schemes[i], "scheme");
      g.schemes.emplace_back(params->schemes[i]);
    }
    g.fields = fields_or_default(params->fields);
    g.weighting = params->idf_weighting ? Weighting::Idf : Weighting::Counts;
    g.kmeans_iterations = params->kmeans_iterations;
    g.workers = workers_or_default(params->workers);
    g.validate();

    std::ofstream csv;
    if (csv_path) {
      bool append = false;
      if (params->resume) {
        auto done = std::make_shared<std::set<std::string>>(completed_rows(csv_path));
        append = !done->empty() || std::filesystem::exists(csv_path);
        g.include = [done](const std::string& method, std::size_t shingle, std::uint32_t K,
                           std::uint32_t L, std::uint64_t seed) {
          return !done->count(row_key(method, shingle, K, L, seed));
        };
      }
      if (append) {
        csv.open(csv_path, std::ios::binary | std::ios::app);
        if (!csv) fail(ErrorCode::Io, std::string("cannot append to ") + csv_path);
      } else {
        csv = open_output(csv_path);
        write_sweep_header(csv);
      }
    }
    sweep(corpus->corpus, truth->truth, g, [&](const SweepRow& row) {
      if (csv_path) write_sweep_row(csv, row);
      if (callback) {
        erb_sweep_row c{};
        c.method = row.method.c_str();
        c.shingle = row.shingle;
        c.K = row.K;
        c.L = row.L;
        c.seed = row.seed;
        c.ok = row.metrics.has_value();
        if (row.metrics) c.metrics = to_c(*row.metrics);
        c.error = row.error.c_str();
        c.millis = row.millis;
        callback(&c, user);
      }
    });
    if (csv_path && !csv) fail(ErrorCode::Io, std::string("failed writing ") + csv_path);
  });
}

erb_status erb_cost_histogram(const erb_corpus* corpus, const char* pairs_path,
                              const char* scheme, const erb_aeda_params* aeda_params,
                              unsigned workers, const char* csv_path,
                              erb_histogram_summary* out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(aeda_params, "aeda");
    const Corpus& c = corpus->corpus;
    const aeda::CostTables tables = make_tables(*aeda_params);
    std::vector<IndexPair> pairs;
    if (pairs_path != nullptr) {
      for (const Pair& p : load_pairs(pairs_path)) {
        pairs.push_back(IndexPair::canonical(position(c, p.a), position(c, p.b)));
      }
    } else if (scheme != nullptr) {
      const rules::DisjunctionBlocking blocking(c, rules::DisjunctionScheme::parse(scheme));
      constexpr std::uint64_t kLimit = 200'000'000;
      if (blocking.count() > kLimit) {
        fail(ErrorCode::SizeGuard, std::to_string(blocking.count()) +
                                       " pairs exceed the histogram limit of 200000000");
      }
      pairs = blocking.pairs();
    } else {
      fail(ErrorCode::Usage, "histogram needs a pair file or a scheme");
    }
    const unsigned w = workers_or_default(workers);
    std::vector<double> costs(pairs.size());
    std::atomic<std::uint64_t> unmapped{0};
    parallel_chunks(pairs.size(), w, [&](std::size_t begin, std::size_t end) {
      aeda::Warnings local;
      for (std::size_t i = begin; i < end; ++i) {
        costs[i] = aeda::name_cost(c[pairs[i].a].name, c[pairs[i].b].name, tables, &local);
      }
      unmapped += local.unmapped;
    });
    const aeda::Histogram h = aeda::cost_histogram(costs);
    if (csv_path) {
      auto f = open_output(csv_path);
      h.write_csv(f);
      if (!f) fail(ErrorCode::Io, std::string("failed writing ") + csv_path);
    }
    if (out) {
      *out = erb_histogram_summary{};
      out->pairs = h.total;
      out->excluded_zero = h.excluded_zero;
      out->has_mean = h.mean.has_value();
      out->mean = h.mean.value_or(0.0);
      out->unmapped_chars = unmapped.load();
    }
  });
}

}  // extern "C"
