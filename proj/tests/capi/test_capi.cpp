// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <deque>
#include <string>
#include <vector>

#include "doctest.h"
#include "erblock/erblock.h"
#include "files.hpp"

namespace {

struct Fixture {
  oracle::TempDir dir;
  erb_corpus* corpus = nullptr;
  erb_truth* truth = nullptr;

  Fixture() {
    erb_gen_params gp;
    erb_gen_params_init(&gp);
    gp.n_entities = 300;
    gp.duplication[0] = 0.7;
    gp.duplication[1] = 0.2;
    gp.duplication[2] = 0.05;
    gp.duplication[3] = 0.05;
    gp.seed = 11;
    erb_gen_summary summary{};
    REQUIRE(erb_generate(&gp, path("corpus.csv"), path("truth.csv"), path("entities.csv"),
                         &summary) == ERB_OK);
    REQUIRE(erb_corpus_load(path("corpus.csv"), &corpus) == ERB_OK);
    REQUIRE(erb_truth_load(path("truth.csv"), corpus, &truth) == ERB_OK);
    REQUIRE(summary.records == erb_corpus_size(corpus));
    REQUIRE(summary.matches == erb_truth_match_count(truth));
  }
  ~Fixture() {
    erb_truth_free(truth);
    erb_corpus_free(corpus);
  }

  const char* path(const std::string& name) {
    paths.push_back((dir / name).string());
    return paths.back().c_str();
  }
  std::deque<std::string> paths;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("status names") {
    CHECK(std::string(erb_status_name(ERB_OK)) == "OK");
    CHECK(std::string(erb_status_name(ERB_ERR_PARSE)) == "PARSE");
    CHECK(std::string(erb_status_name(ERB_ERR_SIZE_GUARD)) == "SIZE_GUARD");
    CHECK(std::string(erb_status_name(static_cast<erb_status>(99))) == "UNKNOWN");
    CHECK(std::strlen(erb_version()) > 0);
  }

  TEST_CASE("errors carry a code and a message") {
    erb_corpus* c = nullptr;
    CHECK(erb_corpus_load("/nonexistent/file.csv", &c) == ERB_ERR_IO);
    CHECK(c == nullptr);
    CHECK(std::strlen(erb_last_error()) > 0);
    CHECK(erb_corpus_load(nullptr, &c) == ERB_ERR_USAGE);
    erb_method m;
    CHECK(erb_method_parse("bogus", &m) == ERB_ERR_USAGE);
    CHECK(erb_method_parse("rules+aeda", &m) == ERB_OK);
    CHECK(m == ERB_METHOD_RULES_AEDA);
    CHECK(std::string(erb_method_name(ERB_METHOD_WEIGHTED_DOPH)) == "weighted-doph");
    CHECK(erb_corpus_size(nullptr) == 0);
  }

  TEST_CASE("every method blocks, writes and evaluates") {
    Fixture f;
    const erb_method methods[] = {ERB_METHOD_CLASSICAL, ERB_METHOD_DOPH, ERB_METHOD_WEIGHTED_DOPH,
                                  ERB_METHOD_KLSH, ERB_METHOD_RULES, ERB_METHOD_RULES_AEDA};
    for (erb_method m : methods) {
      erb_block_params p;
      erb_block_params_init(&p);
      p.method = m;
      p.K = 4;
      p.L = 10;
      p.clusters = 10;
      p.shingle = m == ERB_METHOD_KLSH ? 1 : 3;
      p.scheme = "year+governorate";
      p.percentile = 100.0;
      p.workers = 2;
      erb_blocking* b = nullptr;
      REQUIRE(erb_block(f.corpus, &p, &b) == ERB_OK);
      const std::string name = erb_method_name(m);
      REQUIRE(erb_blocking_write_pairs(b, f.path(name + ".pairs")) == ERB_OK);
      REQUIRE(erb_blocking_write_blocks(b, f.path(name + ".blocks")) == ERB_OK);
      const auto pair_lines = lines(oracle::slurp(f.dir / (name + ".pairs")));
      CHECK(pair_lines.size() == erb_blocking_candidate_count(b));

      erb_metrics direct{}, from_file{};
      REQUIRE(erb_blocking_evaluate(b, f.truth, &direct) == ERB_OK);
      REQUIRE(erb_evaluate_pairs(f.corpus, f.path(name + ".pairs"), f.truth, &from_file) == ERB_OK);
      CHECK(direct.tp == from_file.tp);
      CHECK(direct.fp == from_file.fp);
      CHECK(direct.candidate_count == from_file.candidate_count);
      CHECK(direct.tp + direct.fn == erb_truth_match_count(f.truth));
      CHECK(direct.has_recall == 1);

      if (!pair_lines.empty()) {
        const std::string& first = pair_lines[0];
        const auto comma = first.find(',');
        const std::uint64_t a = std::stoull(first.substr(0, comma));
        const std::uint64_t bb = std::stoull(first.substr(comma + 1));
        int in = 0;
        REQUIRE(erb_blocking_contains(b, bb, a, &in) == ERB_OK);
        CHECK(in == 1);
      }
      int in = 0;
      CHECK(erb_blocking_contains(b, 1, 999999, &in) == ERB_ERR_REFERENTIAL);
      erb_blocking_free(b);
    }
  }

  TEST_CASE("percentile 100 refinement keeps the conjunction pairs") {
    Fixture f;
    erb_block_params p;
    erb_block_params_init(&p);
    p.method = ERB_METHOD_RULES;
    p.scheme = "year+governorate";
    erb_blocking* plain = nullptr;
    REQUIRE(erb_block(f.corpus, &p, &plain) == ERB_OK);
    p.method = ERB_METHOD_RULES_AEDA;
    p.percentile = 100.0;
    erb_blocking* refined = nullptr;
    REQUIRE(erb_block(f.corpus, &p, &refined) == ERB_OK);
    CHECK(erb_blocking_candidate_count(plain) == erb_blocking_candidate_count(refined));
    p.percentile = 10.0;
    erb_blocking* tight = nullptr;
    REQUIRE(erb_block(f.corpus, &p, &tight) == ERB_OK);
    CHECK(erb_blocking_candidate_count(tight) <= erb_blocking_candidate_count(plain));
    erb_blocking_free(plain);
    erb_blocking_free(refined);
    erb_blocking_free(tight);
  }

  TEST_CASE("bad block parameters") {
    Fixture f;
    erb_block_params p;
    erb_block_params_init(&p);
    p.method = ERB_METHOD_RULES;
    erb_blocking* b = nullptr;
    CHECK(erb_block(f.corpus, &p, &b) == ERB_ERR_PARAMETER);
    p.scheme = "year+age";
    CHECK(erb_block(f.corpus, &p, &b) == ERB_ERR_PARAMETER);
    erb_block_params_init(&p);
    p.K = 0;
    CHECK(erb_block(f.corpus, &p, &b) == ERB_ERR_PARAMETER);
    erb_block_params_init(&p);
    p.method = ERB_METHOD_KLSH;
    p.clusters = 1'000'000;
    CHECK(erb_block(f.corpus, &p, &b) == ERB_ERR_PARAMETER);
    erb_block_params_init(&p);
    p.fields = "name,age";
    CHECK(erb_block(f.corpus, &p, &b) == ERB_ERR_PARAMETER);
    CHECK(b == nullptr);
  }

  TEST_CASE("reference axes") {
    uint32_t K[16], L[16];
    size_t S[16], nk = 0, nl = 0, ns = 0;
    REQUIRE(erb_reference_axes(10, K, &nk, L, &nl, S, &ns) == ERB_OK);
    CHECK(nk == 9);
    CHECK(nl == 10);
    CHECK(ns == 4);
    CHECK(L[0] == 10);
    CHECK(erb_reference_axes(0, K, &nk, L, &nl, S, &ns) == ERB_ERR_PARAMETER);
  }

  TEST_CASE("sweep writes rows and resumes after an interruption") {
    Fixture f;
    const uint32_t K[] = {2, 4};
    const uint32_t L[] = {1, 5};
    const size_t S[] = {2, 3};
    const uint64_t seeds[] = {0};
    erb_sweep_params sp;
    erb_sweep_params_init(&sp);
    sp.method = ERB_METHOD_CLASSICAL;
    sp.K = K;
    sp.K_count = 2;
    sp.L = L;
    sp.L_count = 2;
    sp.shingles = S;
    sp.shingle_count = 2;
    sp.seeds = seeds;
    sp.seed_count = 1;
    sp.workers = 1;

    int calls = 0;
    auto count = [](const erb_sweep_row*, void* user) { ++*static_cast<int*>(user); };
    REQUIRE(erb_sweep(f.corpus, f.truth, &sp, f.path("full.csv"), count, &calls) == ERB_OK);
    CHECK(calls == 8);
    const auto full = lines(oracle::slurp(f.dir / "full.csv"));
    REQUIRE(full.size() == 9);
    CHECK(full[0] == "method,shingle,K,L,seed,recall,precision,rr,candidates,millis");

    // Three complete rows and half of the fourth.
    std::string partial;
    for (int i = 0; i < 4; ++i) partial += full[i] + "\n";
    partial += full[4].substr(0, full[4].size() / 2);
    oracle::spit(f.dir / "partial.csv", partial);
    sp.resume = 1;
    calls = 0;
    REQUIRE(erb_sweep(f.corpus, f.truth, &sp, f.path("partial.csv"), count, &calls) == ERB_OK);
    CHECK(calls == 5);
    const auto resumed = lines(oracle::slurp(f.dir / "partial.csv"));
    REQUIRE(resumed.size() == full.size());
    // Everything but the timing column matches the uninterrupted run.
    auto strip = [](const std::string& s) { return s.substr(0, s.rfind(',')); };
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(strip(resumed[i]) == strip(full[i]));

    // Resuming a finished file adds nothing; a missing file starts fresh.
    calls = 0;
    REQUIRE(erb_sweep(f.corpus, f.truth, &sp, f.path("partial.csv"), count, &calls) == ERB_OK);
    CHECK(calls == 0);
    REQUIRE(erb_sweep(f.corpus, f.truth, &sp, f.path("fresh.csv"), nullptr, nullptr) == ERB_OK);
    CHECK(lines(oracle::slurp(f.dir / "fresh.csv")).size() == 9);
  }

  TEST_CASE("sweep rejects rules+aeda and null axes") {
    Fixture f;
    erb_sweep_params sp;
    erb_sweep_params_init(&sp);
    sp.method = ERB_METHOD_RULES_AEDA;
    CHECK(erb_sweep(f.corpus, f.truth, &sp, nullptr, nullptr, nullptr) == ERB_ERR_USAGE);
    sp.method = ERB_METHOD_DOPH;
    sp.K_count = 1;
    CHECK(erb_sweep(f.corpus, f.truth, &sp, nullptr, nullptr, nullptr) == ERB_ERR_USAGE);
  }

  TEST_CASE("cost histogram over a scheme and over a pair file") {
    Fixture f;
    erb_aeda_params ap;
    erb_aeda_params_init(&ap);
    erb_histogram_summary s{};
    REQUIRE(erb_cost_histogram(f.corpus, nullptr, "year", &ap, 1, f.path("h.csv"), &s) == ERB_OK);
    CHECK(s.pairs > 0);
    CHECK(s.has_mean == 1);
    CHECK(s.mean > 0.0);
    CHECK(s.mean <= 1.0);
    CHECK(lines(oracle::slurp(f.dir / "h.csv")).size() == 51);
    oracle::spit(f.dir / "p.csv", "id_a,id_b\n1,2\n");
    REQUIRE(erb_cost_histogram(f.corpus, f.path("p.csv"), nullptr, &ap, 1, nullptr, &s) == ERB_OK);
    CHECK(s.pairs + s.excluded_zero == 1);
    CHECK(erb_cost_histogram(f.corpus, nullptr, nullptr, &ap, 1, nullptr, &s) == ERB_ERR_USAGE);
  }

  TEST_CASE("vocabulary dump and corpus round trip") {
    Fixture f;
    REQUIRE(erb_vocabulary_write(f.corpus, 2, "name", f.path("vocab.tsv")) == ERB_OK);
    CHECK_FALSE(oracle::slurp(f.dir / "vocab.tsv").empty());
    REQUIRE(erb_corpus_save(f.corpus, f.path("copy.csv")) == ERB_OK);
    CHECK(oracle::slurp(f.dir / "copy.csv") == oracle::slurp(f.dir / "corpus.csv"));
    uint64_t id = 0;
    REQUIRE(erb_corpus_record_id(f.corpus, 0, &id) == ERB_OK);
    CHECK(id == 1);
    CHECK(erb_corpus_record_id(f.corpus, 1'000'000, &id) == ERB_ERR_PARAMETER);
  }
}
