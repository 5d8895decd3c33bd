// Command-line front end. Talks to the library only through erblock.h.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "erblock/erblock.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
  erb_status status;
  std::string message;
};

void check(erb_status s) {
  if (s != ERB_OK) throw Failure{s, erb_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw Failure{ERB_ERR_USAGE, message}; }

struct Globals {
  std::uint64_t seed = 0;
  unsigned workers = 0;
  std::string out = "out";
};

struct GenOptions {
  std::uint64_t entities = 1000;
  std::vector<double> duplication{0.97, 0.02, 0.007, 0.003};
  std::string names;
  std::size_t name_parts = 3;
  std::string date_min = "2011-03-15";
  std::string date_max = "2016-12-31";
  std::uint32_t nonmatch_ratio = 10;
  double char_sub = 0.02;
  double char_swap = 0.01;
  double char_del = 0.01;
  int date_days = 3;
  double gov_error = 0.05;
  double field_drop = 0.05;
};

struct AedaOptions {
  double omega = 1.0 / 3.0;
  double lambda = 1.0 / 3.0;
  double sigma = 1.0 / 3.0;
  double psi = 12.0;
  std::string phonetic;
  std::string letterform;
  std::string keyboard;
};

struct BlockOptions {
  std::string corpus;
  std::string truth;
  std::string method = "doph";
  std::uint32_t K = 15;
  std::uint32_t L = 100;
  std::size_t shingle = 3;
  std::string fields;
  bool idf = false;
  std::size_t projections = 20;
  std::size_t clusters = 100;
  std::size_t iterations = 100;
  std::string scheme;
  double percentile = 10.0;
  AedaOptions aeda;
};

struct EvalOptions {
  std::string corpus;
  std::string pairs;
  std::string truth;
  std::string results;
};

struct SweepOptions {
  std::string corpus;
  std::string truth;
  std::string method = "doph";
  std::vector<std::uint32_t> K{15};
  std::vector<std::uint32_t> L{100};
  std::vector<std::size_t> shingles{3};
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> schemes;
  std::string schemes_file;
  bool reference_grid = false;
  std::uint32_t divisor = 1;
  std::string fields;
  bool idf = false;
  std::size_t iterations = 100;
  bool resume = false;
};

struct HistogramOptions {
  std::string corpus;
  std::string pairs;
  std::string scheme;
  AedaOptions aeda;
};

void add_aeda(CLI::App* cmd, AedaOptions& a) {
  // Full precision so a replayed manifest reproduces the default weights.
  char third[32];
  std::snprintf(third, sizeof third, "%.17g", 1.0 / 3.0);
  cmd->add_option("--omega", a.omega, "Phonetic weight")->default_str(third);
  cmd->add_option("--lambda", a.lambda, "Letter-form weight")->default_str(third);
  cmd->add_option("--sigma", a.sigma, "Keyboard weight")->default_str(third);
  cmd->add_option("--psi", a.psi, "Largest keyboard distance");
  cmd->add_option("--phonetic", a.phonetic, "Phonetic similarity table");
  cmd->add_option("--letterform", a.letterform, "Letter-form similarity table");
  cmd->add_option("--keyboard", a.keyboard, "Keyboard coordinate table");
}

erb_aeda_params to_c(const AedaOptions& a) {
  erb_aeda_params p;
  erb_aeda_params_init(&p);
  p.omega = a.omega;
  p.lambda = a.lambda;
  p.sigma = a.sigma;
  p.psi = a.psi;
  p.phonetic_path = a.phonetic.empty() ? nullptr : a.phonetic.c_str();
  p.letterform_path = a.letterform.empty() ? nullptr : a.letterform.c_str();
  p.keyboard_path = a.keyboard.empty() ? nullptr : a.keyboard.c_str();
  return p;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

struct CorpusHandle {
  erb_corpus* p = nullptr;
  explicit CorpusHandle(const std::string& path) {
    if (path.empty()) usage("--corpus is required");
    check(erb_corpus_load(path.c_str(), &p));
  }
  ~CorpusHandle() { erb_corpus_free(p); }
  CorpusHandle(const CorpusHandle&) = delete;
  CorpusHandle& operator=(const CorpusHandle&) = delete;
};

struct TruthHandle {
  erb_truth* p = nullptr;
  TruthHandle(const std::string& path, const erb_corpus* corpus) {
    check(erb_truth_load(path.c_str(), corpus, &p));
  }
  ~TruthHandle() { erb_truth_free(p); }
  TruthHandle(const TruthHandle&) = delete;
  TruthHandle& operator=(const TruthHandle&) = delete;
};

fs::path prepare_out(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw Failure{ERB_ERR_IO, "cannot create " + g.out + ": " + ec.message()};
  return fs::path(g.out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Failure{ERB_ERR_IO, "failed writing " + path.string()};
}

std::string format_metrics(const erb_metrics& m) {
  std::ostringstream s;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  s << "tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn << " tn=" << m.tn
    << " recall=" << (m.has_recall ? num(m.recall) : "NA") << " precision=" << num(m.precision)
    << " rr=" << (m.has_rr ? num(m.rr) : "NA") << " candidates=" << m.candidate_count
    << " total_pairs=" << m.total_pairs;
  return s.str();
}

// Keeps the global settings and those of the subcommand that ran. Captured
// list defaults come back as quoted strings; they are written as arrays, and
// empty lists are left out so they keep their fallback on replay.
std::string manifest_for(const std::string& config, const std::string& command) {
  std::istringstream in(config);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t eq = line.find('=');
    const std::size_t dot = line.find('.');
    const bool scoped = dot != std::string::npos && dot < eq;
    if (scoped && line.compare(0, dot, command) != 0) continue;
    if (eq != std::string::npos) {
      const std::string value = line.substr(eq + 1);
      if (value == "\"{}\"" || value == "\"[]\"") continue;
      if (value.size() > 3 && value.front() == '"' && value[1] == '[' && value.back() == '"' &&
          value[value.size() - 2] == ']') {
        line = line.substr(0, eq + 1) + value.substr(1, value.size() - 2);
      }
    }
    out << line << '\n';
  }
  return out.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

void cmd_gen(const Globals& g, const GenOptions& o) {
  if (o.duplication.size() != 4) usage("--duplication takes four probabilities");
  erb_gen_params p;
  erb_gen_params_init(&p);
  p.n_entities = o.entities;
  std::copy(o.duplication.begin(), o.duplication.end(), p.duplication);
  p.name_pool_path = opt(o.names);
  p.name_parts = o.name_parts;
  p.date_min = o.date_min.c_str();
  p.date_max = o.date_max.c_str();
  p.nonmatch_ratio = o.nonmatch_ratio;
  p.char_sub_rate = o.char_sub;
  p.char_swap_rate = o.char_swap;
  p.char_del_rate = o.char_del;
  p.date_perturb_days = o.date_days;
  p.governorate_error_rate = o.gov_error;
  p.field_drop_rate = o.field_drop;
  p.seed = g.seed;
  const fs::path dir = prepare_out(g);
  erb_gen_summary summary{};
  check(erb_generate(&p, (dir / "corpus.csv").c_str(), (dir / "truth.csv").c_str(),
                     (dir / "entities.csv").c_str(), &summary));
  std::cout << "records=" << summary.records << " matches=" << summary.matches
            << " nonmatches=" << summary.nonmatches << '\n';
}

void cmd_block(const Globals& g, const BlockOptions& o) {
  erb_block_params p;
  erb_block_params_init(&p);
  check(erb_method_parse(o.method.c_str(), &p.method));
  p.K = o.K;
  p.L = o.L;
  p.shingle = o.shingle;
  p.seed = g.seed;
  p.fields = opt(o.fields);
  p.idf_weighting = o.idf;
  p.projections = o.projections;
  p.clusters = o.clusters;
  p.kmeans_iterations = o.iterations;
  p.scheme = opt(o.scheme);
  p.percentile = o.percentile;
  p.aeda = to_c(o.aeda);
  p.workers = g.workers;

  CorpusHandle corpus(o.corpus);
  const fs::path dir = prepare_out(g);
  const auto start = Clock::now();
  erb_blocking* blocking = nullptr;
  check(erb_block(corpus.p, &p, &blocking));
  const double block_seconds = seconds_since(start);
  struct Free {
    erb_blocking* b;
    ~Free() { erb_blocking_free(b); }
  } guard{blocking};

  check(erb_blocking_write_blocks(blocking, (dir / "blocks.tsv").c_str()));
  check(erb_blocking_write_pairs(blocking, (dir / "pairs.csv").c_str()));
  std::cout << "candidates=" << erb_blocking_candidate_count(blocking) << '\n';
  if (const auto unmapped = erb_blocking_unmapped_chars(blocking)) {
    std::cerr << "warning: " << unmapped << " character lookups had no keyboard position\n";
  }
  if (!o.truth.empty()) {
    TruthHandle truth(o.truth, corpus.p);
    erb_metrics m{};
    check(erb_blocking_evaluate(blocking, truth.p, &m));
    std::cout << format_metrics(m) << '\n';
  }
  std::ostringstream timing;
  timing << "block_seconds=" << block_seconds << '\n';
  write_text(dir / "timing.txt", timing.str());
}

void cmd_eval(const Globals& g, const EvalOptions& o) {
  if (o.pairs.empty() || o.truth.empty()) usage("eval needs --pairs and --truth");
  CorpusHandle corpus(o.corpus);
  TruthHandle truth(o.truth, corpus.p);
  erb_metrics m{};
  check(erb_evaluate_pairs(corpus.p, o.pairs.c_str(), truth.p, &m));
  std::cout << format_metrics(m) << '\n';

  const fs::path results = o.results.empty() ? prepare_out(g) / "results.csv" : fs::path(o.results);
  const bool fresh = !fs::exists(results) || fs::file_size(results) == 0;
  std::ofstream f(results, std::ios::app);
  if (fresh) f << "pairs,tp,fp,fn,tn,recall,precision,rr,candidates,total_pairs\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%llu,%llu,%llu,%llu,", static_cast<unsigned long long>(m.tp),
                static_cast<unsigned long long>(m.fp), static_cast<unsigned long long>(m.fn),
                static_cast<unsigned long long>(m.tn));
  f << '"' << o.pairs << '"' << buf;
  if (m.has_recall) {
    std::snprintf(buf, sizeof buf, "%.6f", m.recall);
    f << buf;
  } else {
    f << "NA";
  }
  std::snprintf(buf, sizeof buf, ",%.6f,", m.precision);
  f << buf;
  if (m.has_rr) {
    std::snprintf(buf, sizeof buf, "%.6f", m.rr);
    f << buf;
  } else {
    f << "NA";
  }
  f << ',' << m.candidate_count << ',' << m.total_pairs << '\n';
  if (!f) throw Failure{ERB_ERR_IO, "failed writing " + results.string()};
}

void cmd_sweep(const Globals& g, SweepOptions o) {
  erb_sweep_params p;
  erb_sweep_params_init(&p);
  check(erb_method_parse(o.method.c_str(), &p.method));
  if (o.reference_grid) {
    std::uint32_t K[16], L[16];
    std::size_t S[16], nk = 0, nl = 0, ns = 0;
    check(erb_reference_axes(o.divisor, K, &nk, L, &nl, S, &ns));
    o.K.assign(K, K + nk);
    o.L.assign(L, L + nl);
    o.shingles.assign(S, S + ns);
  }
  if (o.seeds.empty()) o.seeds.push_back(g.seed);
  if (!o.schemes_file.empty()) {
    std::ifstream in(o.schemes_file);
    if (!in) throw Failure{ERB_ERR_IO, "cannot open " + o.schemes_file};
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') o.schemes.push_back(line);
    }
  }
  std::vector<const char*> schemes;
  for (const auto& s : o.schemes) schemes.push_back(s.c_str());
  p.K = o.K.data();
  p.K_count = o.K.size();
  p.L = o.L.data();
  p.L_count = o.L.size();
  p.shingles = o.shingles.data();
  p.shingle_count = o.shingles.size();
  p.seeds = o.seeds.data();
  p.seed_count = o.seeds.size();
  p.schemes = schemes.data();
  p.scheme_count = schemes.size();
  p.fields = opt(o.fields);
  p.idf_weighting = o.idf;
  p.kmeans_iterations = o.iterations;
  p.resume = o.resume;
  p.workers = g.workers;

  CorpusHandle corpus(o.corpus);
  if (o.truth.empty()) usage("sweep needs --truth");
  TruthHandle truth(o.truth, corpus.p);
  const fs::path dir = prepare_out(g);
  const auto on_row = [](const erb_sweep_row* row, void*) {
    if (!row->ok) {
      std::cerr << "cell " << row->method << " shingle=" << row->shingle << " K=" << row->K
                << " L=" << row->L << " seed=" << row->seed << " failed: " << row->error << '\n';
    }
  };
  check(erb_sweep(corpus.p, truth.p, &p, (dir / "sweep.csv").c_str(), on_row, nullptr));
}

void cmd_histogram(const Globals& g, const HistogramOptions& o) {
  if (o.pairs.empty() == o.scheme.empty()) usage("histogram needs exactly one of --pairs, --scheme");
  CorpusHandle corpus(o.corpus);
  const fs::path dir = prepare_out(g);
  const erb_aeda_params a = to_c(o.aeda);
  erb_histogram_summary s{};
  check(erb_cost_histogram(corpus.p, opt(o.pairs), opt(o.scheme), &a, g.workers,
                           (dir / "histogram.csv").c_str(), &s));
  std::cout << "pairs=" << s.pairs << " perfect_matches=" << s.excluded_zero << " mean=";
  if (s.has_mean) {
    std::cout << s.mean;
  } else {
    std::cout << "NA";
  }
  std::cout << '\n';
  if (s.unmapped_chars) {
    std::cerr << "warning: " << s.unmapped_chars << " character lookups had no keyboard position\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Blocking toolkit for entity resolution"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML/INI run config; flags override it");
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--workers", g.workers, "Worker threads (0: all cores)");
  app.add_option("--out", g.out, "Output directory");

  GenOptions gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a synthetic corpus with planted duplicates");
  c_gen->add_option("--entities", gen.entities, "Number of entities");
  c_gen->add_option("--duplication", gen.duplication, "P(1..4 records per entity)")->delimiter(',');
  c_gen->add_option("--names", gen.names, "Name pool file (one name per line)");
  c_gen->add_option("--name-parts", gen.name_parts, "Name components per person");
  c_gen->add_option("--date-min", gen.date_min);
  c_gen->add_option("--date-max", gen.date_max);
  c_gen->add_option("--nonmatch-ratio", gen.nonmatch_ratio, "Nonmatch pairs per match pair");
  c_gen->add_option("--char-sub", gen.char_sub);
  c_gen->add_option("--char-swap", gen.char_swap);
  c_gen->add_option("--char-del", gen.char_del);
  c_gen->add_option("--date-days", gen.date_days, "Date perturbation radius in days");
  c_gen->add_option("--gov-error", gen.gov_error);
  c_gen->add_option("--field-drop", gen.field_drop);

  BlockOptions block;
  auto* c_block = app.add_subcommand("block", "Run one blocking method");
  c_block->add_option("--corpus", block.corpus)->required();
  c_block->add_option("--truth", block.truth, "Also evaluate against this truth file");
  c_block->add_option("--method", block.method,
                      "classical, doph, weighted-doph, klsh, rules or rules+aeda");
  c_block->add_option("-K,--K", block.K, "Hash values per band");
  c_block->add_option("-L,--L", block.L, "Bands (hash tables)");
  c_block->add_option("--shingle", block.shingle, "Shingle length");
  c_block->add_option("--fields", block.fields, "Comma-separated record fields");
  c_block->add_flag("--idf", block.idf, "IDF weights for weighted-doph");
  c_block->add_option("-p,--projections", block.projections, "KLSH projections");
  c_block->add_option("-c,--clusters", block.clusters, "KLSH clusters");
  c_block->add_option("--iterations", block.iterations, "k-means iteration cap");
  c_block->add_option("--scheme", block.scheme, "e.g. 'year+governorate | month+year'");
  c_block->add_option("--percentile", block.percentile, "AEDA refinement percentile");
  add_aeda(c_block, block.aeda);

  EvalOptions eval;
  auto* c_eval = app.add_subcommand("eval", "Score a candidate pair file");
  c_eval->add_option("--corpus", eval.corpus)->required();
  c_eval->add_option("--pairs", eval.pairs)->required();
  c_eval->add_option("--truth", eval.truth)->required();
  c_eval->add_option("--results", eval.results, "CSV to append to (default <out>/results.csv)");

  SweepOptions sw;
  auto* c_sweep = app.add_subcommand("sweep", "Evaluate a parameter grid");
  c_sweep->add_option("--corpus", sw.corpus)->required();
  c_sweep->add_option("--truth", sw.truth)->required();
  c_sweep->add_option("--method", sw.method, "classical, doph, weighted-doph, klsh or rules");
  c_sweep->add_option("-K,--K", sw.K, "K values (klsh: projections)")->delimiter(',');
  c_sweep->add_option("-L,--L", sw.L, "L values (klsh: clusters)")->delimiter(',');
  c_sweep->add_option("--shingles", sw.shingles)->delimiter(',');
  c_sweep->add_option("--seeds", sw.seeds, "Seeds (default: --seed)")->delimiter(',');
  c_sweep->add_option("--schemes", sw.schemes, "Rule schemes")->delimiter(';');
  c_sweep->add_option("--schemes-file", sw.schemes_file, "One scheme per line");
  c_sweep->add_flag("--reference-grid", sw.reference_grid,
                    "K 15..35, L 100..1000 step 100, shingles 2..5");
  c_sweep->add_option("--divisor", sw.divisor, "Divide the reference L values");
  c_sweep->add_option("--fields", sw.fields);
  c_sweep->add_flag("--idf", sw.idf);
  c_sweep->add_option("--iterations", sw.iterations, "k-means iteration cap");
  c_sweep->add_flag("--resume", sw.resume, "Keep rows already in sweep.csv and skip them");

  HistogramOptions hist;
  auto* c_hist = app.add_subcommand("histogram", "Histogram of name replacement costs");
  c_hist->add_option("--corpus", hist.corpus)->required();
  c_hist->add_option("--pairs", hist.pairs, "Candidate pair file");
  c_hist->add_option("--scheme", hist.scheme, "Use the within-block pairs of this scheme");
  add_aeda(c_hist, hist.aeda);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    throw Failure{ERB_ERR_USAGE, e.what()};
  }

  const std::string manifest = manifest_for(app.config_to_str(true, false),
                                            app.get_subcommands().front()->get_name());
  if (c_gen->parsed()) cmd_gen(g, gen);
  if (c_block->parsed()) cmd_block(g, block);
  if (c_eval->parsed()) cmd_eval(g, eval);
  if (c_sweep->parsed()) cmd_sweep(g, sw);
  if (c_hist->parsed()) cmd_histogram(g, hist);
  write_text(prepare_out(g) / "manifest.toml", manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::string message = f.message;
    for (char& ch : message) {
      if (ch == '\n' || ch == '\r') ch = ' ';
    }
    std::cerr << "ERR_" << erb_status_name(f.status) << ": " << message << '\n';
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "ERR_INTERNAL: " << e.what() << '\n';
    return static_cast<int>(ERB_ERR_INTERNAL);
  }
}
