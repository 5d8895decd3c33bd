#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "erblock/aeda.hpp"
#include "erblock/error.hpp"
#include "erblock/unicode.hpp"
#include "oracles.hpp"

using namespace erblock;
using namespace erblock::aeda;
using oracle::rec;

namespace {

// a, b, c, d on one keyboard row; similarities chosen so frc(a, b) uses
// phonetic 1, letter-form 0.5 and keyboard 0.25.
CostTables toy_tables() {
  CostTables t;
  t.set_key(U'a', 0, 0);
  t.set_key(U'b', 9, 0);
  t.set_key(U'c', 3, 0);
  t.set_key(U'd', 12, 0);
  t.set_key(U'x', 1, 1);
  t.set_phonetic(U'a', U'b', 1.0);
  t.set_letterform(U'a', U'b', 0.5);
  return t;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an erblock::Error");
  return ErrorCode::Usage;
}

CostTables parse_tables(const std::string& p, const std::string& l, const std::string& k,
                        double psi = 12.0) {
  std::istringstream ps(p), ls(l), ks(k);
  return CostTables::parse(ps, ls, ks, psi, Weights{});
}

// Substitution cost from the three table lookups, written out by hand.
double oracle_frc(char32_t a, char32_t b, const CostTables& t) {
  if (a == b) return 0.0;
  double ks = 0.0;
  const auto ka = t.key(a), kb = t.key(b);
  if (ka && kb) {
    const double dx = ka->first - kb->first, dy = ka->second - kb->second;
    ks = std::max(0.0, 1.0 - std::sqrt(dx * dx + dy * dy) / t.psi());
  }
  const Weights& w = t.weights();
  return ((1 - t.phonetic(a, b)) * w.omega + (1 - t.letterform(a, b)) * w.lambda +
          (1 - ks) * w.sigma) /
         (w.omega + w.lambda + w.sigma);
}

double oracle_cost(const std::u32string& s, const std::u32string& t, const CostTables& tables) {
  const std::size_t m = std::max(s.size(), t.size());
  if (m == 0) return 0.0;
  return oracle::edit_distance(s, t, [&](char32_t a, char32_t b) { return oracle_frc(a, b, tables); }) /
         static_cast<double>(m);
}

std::u32string random_word(std::mt19937_64& rng, std::span<const char32_t> alphabet,
                           std::size_t max_len) {
  std::u32string w;
  const std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) w.push_back(alphabet[rng() % alphabet.size()]);
  return w;
}

}  // namespace

TEST_SUITE("aeda") {
  TEST_CASE("keyboard similarity") {
    const CostTables t = toy_tables();
    CHECK(keyboard_sim(U'a', U'a', t) == 1.0);
    CHECK(keyboard_sim(U'a', U'c', t) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(keyboard_sim(U'a', U'd', t) == 0.0);
    CHECK(keyboard_sim(U'a', U'b', t) == doctest::Approx(0.25).epsilon(1e-12));
    Warnings w;
    CHECK(keyboard_sim(U'a', U'Q', t, &w) == 0.0);
    CHECK(w.unmapped == 1);
  }

  TEST_CASE("replacement cost") {
    const CostTables t = toy_tables();
    CHECK(frc(U'a', U'a', t) == 0.0);
    CHECK(frc(U'a', U'b', t) == doctest::Approx((0.0 + 0.5 + 0.75) / 3.0).epsilon(1e-12));
    CHECK(frc(U'a', U'b', t) == doctest::Approx(0.4167).epsilon(1e-4));
    CHECK(frc(U'a', U'd', t) == 1.0);
    CHECK(frc(U'b', U'a', t) == frc(U'a', U'b', t));
  }

  TEST_CASE("weights must be usable and scaling them changes nothing") {
    CostTables t = toy_tables();
    CHECK(code_of([&] { t.set_weights({0, 0, 0}); }) == ErrorCode::Parameter);
    CHECK(code_of([&] { t.set_weights({-1, 1, 1}); }) == ErrorCode::Parameter);
    const double base = frc(U'a', U'b', t);
    t.set_weights({5, 5, 5});
    CHECK(frc(U'a', U'b', t) == doctest::Approx(base).epsilon(1e-12));
    t.set_weights({1, 0, 0});
    CHECK(frc(U'a', U'b', t) == 0.0);
  }

  TEST_CASE("name cost") {
    const CostTables t = toy_tables();
    CHECK(name_cost(U"abca", U"abca", t) == 0.0);
    CHECK(name_cost(U"", U"", t) == 0.0);
    CHECK(name_cost(U"", U"abc", t) == 1.0);
    // One a/b substitution in a four-letter string.
    CHECK(name_cost(U"cada", U"cadb", t) == doctest::Approx(0.4167 / 4).epsilon(1e-3));
    CHECK(name_cost(U"cada", U"cadb", t) == doctest::Approx(oracle_cost(U"cada", U"cadb", t)).epsilon(1e-12));
    CHECK(name_cost(std::string_view("cada"), std::string_view("cadb"), t) ==
          name_cost(U"cada", U"cadb", t));
  }

  TEST_CASE("name cost on bundled tables matches the plain edit-distance table") {
    const CostTables t = CostTables::defaults();
    const auto alphabet = t.keyboard_chars();
    REQUIRE(alphabet.size() > 20);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
      const auto s = random_word(rng, alphabet, 8);
      const auto u = random_word(rng, alphabet, 8);
      const double c = name_cost(s, u, t);
      CHECK(c == doctest::Approx(oracle_cost(s, u, t)).epsilon(1e-12));
      CHECK(c == doctest::Approx(name_cost(u, s, t)).epsilon(1e-12));
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
    }
  }

  TEST_CASE("bundled tables are symmetric and fit the keyboard bound") {
    const CostTables t = CostTables::defaults();
    CHECK(t.psi() == 12.0);
    CHECK(t.max_key_distance() <= 12.0);
    CHECK(t.weights().omega == doctest::Approx(1.0 / 3.0));
    const auto chars = t.keyboard_chars();
    for (char32_t a : chars) {
      CHECK(frc(a, a, t) == 0.0);
      for (char32_t b : chars) {
        CHECK(t.phonetic(a, b) == t.phonetic(b, a));
        CHECK(t.letterform(a, b) == t.letterform(b, a));
      }
    }
    // Alef with hamza above reads as plain alef.
    CHECK(t.phonetic(U'ا', U'أ') > 0.5);
  }

  TEST_CASE("table parsing errors") {
    CHECK(code_of([] { parse_tables("a\tb\n", "", ""); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse_tables("a\tb\tx\n", "", ""); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse_tables("ab\tc\t0.5\n", "", ""); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse_tables("a\tb\t1.5\n", "", ""); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_tables("a\tb\t0.5\nb\ta\t0.4\n", "", ""); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_tables("a\ta\t0.5\n", "", ""); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_tables("", "", "a\t0\t0\nb\t20\t0\n"); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_tables("", "", "a\t0\t0\n", 0.0); }) == ErrorCode::Config);
    CHECK(code_of([] {
            CostTables::load("/nonexistent/p.tsv", "/nonexistent/l.tsv", "/nonexistent/k.tsv",
                             12.0, Weights{});
          }) == ErrorCode::Io);
    // Comments, blank lines and repeated identical entries are fine.
    const CostTables t = parse_tables("# x\n\na\tb\t0.5\nb\ta\t0.5\n", "", "a\t0\t0\r\n");
    CHECK(t.phonetic(U'b', U'a') == 0.5);
    CHECK(t.key(U'a'));
  }

  TEST_CASE("refinement of a five-name block against a sorted-cost oracle") {
    const CostTables t = toy_tables();
    const Corpus c({rec(1, "abcd"), rec(2, "abcb"), rec(3, "dddd"), rec(4, "abca"),
                    rec(5, "xbcd")});
    const std::vector<std::uint32_t> block{0, 1, 2, 3, 4};
    for (double pct : {10.0, 30.0, 50.0, 75.0, 100.0}) {
      std::vector<std::pair<double, IndexPair>> all;
      for (std::uint32_t i = 0; i < 5; ++i) {
        for (std::uint32_t j = i + 1; j < 5; ++j) {
          all.push_back({oracle_cost(unicode::decode(c[i].name), unicode::decode(c[j].name), t),
                         IndexPair{i, j}});
        }
      }
      std::sort(all.begin(), all.end());
      const std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * all.size()));
      const double threshold = all[rank - 1].first;
      std::set<IndexPair> want;
      for (const auto& [cost, p] : all) {
        if (cost <= threshold + 1e-12) want.insert(p);
      }
      std::set<IndexPair> got;
      for (const auto& sp : refine_block(block, c, t, pct)) got.insert(sp.pair);
      CHECK(got == want);
    }
  }

  TEST_CASE("identical names and percentile 100 keep every pair") {
    const CostTables t = CostTables::defaults();
    const Corpus same({rec(1, "x"), rec(2, "x"), rec(3, "x")});
    const std::vector<std::uint32_t> block{0, 1, 2};
    CHECK(refine_block(block, same, t, 10.0).size() == 3);
    const Corpus c({rec(1, "ab"), rec(2, "cd"), rec(3, "abc"), rec(4, "q")});
    const std::vector<std::uint32_t> four{0, 1, 2, 3};
    CHECK(refine_block(four, c, t, 100.0).size() == 6);
    CHECK(refine_block(std::vector<std::uint32_t>{2}, c, t, 10.0).empty());
    CHECK(code_of([&] { refine_block(four, c, t, 0.0); }) == ErrorCode::Parameter);
    CHECK(code_of([&] { refine_block(four, c, t, 101.0); }) == ErrorCode::Parameter);
  }

  TEST_CASE("partition refinement is the union of block refinements") {
    const CostTables t = CostTables::defaults();
    const auto alphabet = t.keyboard_chars();
    std::mt19937_64 rng(3);
    std::vector<Record> rs;
    std::vector<std::int64_t> block_of;
    for (int i = 0; i < 120; ++i) {
      rs.push_back(rec(i + 1, unicode::encode(random_word(rng, alphabet, 6))));
      block_of.push_back(static_cast<std::int64_t>(rng() % 9));
    }
    const Corpus c(rs);
    const Partition p(block_of);
    RefineOptions one, four;
    four.workers = 4;
    one.percentile = four.percentile = 25.0;
    const auto a = refine_partition(p, c, t, one);
    const auto b = refine_partition(p, c, t, four);
    REQUIRE(a.size() == b.size());
    std::vector<ScoredPair> want;
    for (const auto& blk : p.blocks()) {
      const auto part = refine_block(blk, c, t, 25.0);
      want.insert(want.end(), part.begin(), part.end());
    }
    std::sort(want.begin(), want.end(), [](auto& x, auto& y) { return x.pair < y.pair; });
    REQUIRE(a.size() == want.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].pair == b[i].pair);
      CHECK(a[i].pair == want[i].pair);
      CHECK(p.contains(a[i].pair.a, a[i].pair.b));
    }
    RefineOptions tight = one;
    tight.max_pairs = 10;
    CHECK(code_of([&] { refine_partition(p, c, t, tight); }) == ErrorCode::SizeGuard);
  }

  TEST_CASE("cost histogram") {
    const std::vector<double> zeros{0.0, 0.0};
    const Histogram empty = cost_histogram(zeros);
    CHECK(empty.total == 0);
    CHECK(empty.excluded_zero == 2);
    CHECK_FALSE(empty.mean);
    const std::vector<double> costs{0.2, 0.6, 0.0, 1.0};
    const Histogram h = cost_histogram(costs);
    CHECK(h.total == 3);
    CHECK(*h.mean == doctest::Approx((0.2 + 0.6 + 1.0) / 3.0));
    CHECK(h.counts[10] == 1);
    CHECK(h.counts[30] == 1);
    CHECK(h.counts[49] == 1);
    const std::vector<double> two{0.2, 0.6};
    CHECK(*cost_histogram(two).mean == doctest::Approx(0.4));
    std::ostringstream out;
    h.write_csv(out);
    const std::string s = out.str();
    CHECK(std::count(s.begin(), s.end(), '\n') == 51);
    CHECK(s.rfind("bin_low,bin_high,count\n0,0.02,0\n", 0) == 0);
  }

  TEST_CASE("dissimilar names cost around 0.8") {
    const CostTables t = CostTables::defaults();
    const auto alphabet = t.keyboard_chars();
    std::mt19937_64 rng(21);
    std::vector<double> costs;
    for (int i = 0; i < 2000; ++i) {
      std::u32string s, u;
      for (int j = 0; j < 8; ++j) s.push_back(alphabet[rng() % alphabet.size()]);
      for (int j = 0; j < 8; ++j) u.push_back(alphabet[rng() % alphabet.size()]);
      costs.push_back(name_cost(s, u, t));
    }
    const Histogram h = cost_histogram(costs);
    CHECK(*h.mean > 0.6);
    CHECK(*h.mean < 0.95);
  }
}
