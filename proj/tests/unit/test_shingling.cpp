#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "erblock/error.hpp"
#include "erblock/shingling.hpp"
#include "oracles.hpp"

using namespace erblock;
using oracle::rec;

namespace {

std::map<std::string, std::uint32_t> as_map(const TokenCounts& counts) {
  std::map<std::string, std::uint32_t> m;
  for (const auto& [t, c] : counts) m[t] += c;
  return m;
}

// Substring enumeration over ASCII text.
std::map<std::string, std::uint32_t> brute_shingles(const std::string& s, std::size_t k) {
  std::map<std::string, std::uint32_t> m;
  for (std::size_t i = 0; i + k <= s.size(); ++i) ++m[s.substr(i, k)];
  return m;
}

const std::string kSep = "\xE2\x90\x9F";  // U+241F

}  // namespace

TEST_SUITE("shingling") {
  TEST_CASE("record string joins selected fields in order") {
    const Record r = rec(1, "A", "", "B");
    const std::vector<Field> ng{Field::Name, Field::Governorate};
    const std::vector<Field> gn{Field::Governorate, Field::Name};
    CHECK(record_string(r, ng) == "A" + kSep + "B");
    CHECK(record_string(r, gn) == "B" + kSep + "A");
    CHECK(record_string(rec(2, ""), default_fields()) == kSep + kSep + kSep);
  }

  TEST_CASE("field lists parse and reject unknown names") {
    CHECK(parse_fields("name,date_of_death") ==
          std::vector<Field>{Field::Name, Field::DateOfDeath});
    CHECK_THROWS_AS(parse_fields("name,age"), Error);
    CHECK_THROWS_AS(parse_fields(""), Error);
  }

  TEST_CASE("TORONTO bigrams") {
    const auto m = as_map(shingle("TORONTO", 2));
    CHECK(m == std::map<std::string, std::uint32_t>{
                   {"TO", 2}, {"OR", 1}, {"RO", 1}, {"ON", 1}, {"NT", 1}});
  }

  TEST_CASE("first-occurrence order") {
    const auto c = shingle("TORONTO", 2);
    REQUIRE(c.size() == 5);
    CHECK(c[0].first == "TO");
    CHECK(c[4].first == "NT");
  }

  TEST_CASE("single character and short strings") {
    CHECK(as_map(shingle("A", 1)) == std::map<std::string, std::uint32_t>{{"A", 1}});
    const auto padded = shingle("A", 3);
    REQUIRE(padded.size() == 1);
    CHECK(padded[0].first == "A\xE2\x90\x80\xE2\x90\x80");
    CHECK_THROWS_AS(shingle("A", 0), Error);
  }

  TEST_CASE("ABAB trigrams match substring enumeration") {
    CHECK(as_map(shingle("ABAB", 3)) == brute_shingles("ABAB", 3));
  }

  TEST_CASE("random ASCII strings match substring enumeration") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      std::string s;
      const std::size_t len = 1 + rng() % 30;
      for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + rng() % 4));
      for (std::size_t k = 1; k <= std::min<std::size_t>(len, 5); ++k) {
        CHECK(as_map(shingle(s, k)) == brute_shingles(s, k));
      }
    }
  }

  TEST_CASE("shingles count scalars, not bytes") {
    const auto m = as_map(shingle("\xD8\xB9\xD9\x84\xD9\x8A", 2));  // three Arabic letters
    CHECK(m.size() == 2);
  }

  TEST_CASE("vocabulary sizes and document frequencies") {
    const std::vector<Field> name{Field::Name};
    {
      const Vocabulary v = Vocabulary::build(Corpus({rec(1, "AB")}), 2, name);
      CHECK(v.size() == 1);
      CHECK(v.document_frequency(*v.find("AB")) == 1);
    }
    {
      const Vocabulary one = Vocabulary::build(Corpus({rec(1, "ABC")}), 2, name);
      const Vocabulary two = Vocabulary::build(Corpus({rec(1, "ABC"), rec(2, "ABC")}), 2, name);
      CHECK(one.size() == two.size());
      CHECK(two.document_frequency(*two.find("AB")) == 2);
    }
    {
      const Vocabulary v = Vocabulary::build(Corpus({rec(1, "AB"), rec(2, "BC")}), 2, name);
      CHECK(v.size() == 2);
      CHECK(*v.find("AB") == 0);
      CHECK(*v.find("BC") == 1);
    }
    {
      // df counts documents, not occurrences.
      const Vocabulary v = Vocabulary::build(Corpus({rec(1, "ABAB"), rec(2, "xAB")}), 2, name);
      CHECK(v.document_frequency(*v.find("AB")) == 2);
      CHECK(v.document_frequency(*v.find("BA")) == 1);
    }
    CHECK_THROWS_AS(Vocabulary::build(Corpus{}, 2, name), Error);
    CHECK_THROWS_AS(Vocabulary::build(Corpus({rec(1, "A")}), 0, name), Error);
  }

  TEST_CASE("encode rejects unknown tokens") {
    const Vocabulary v = Vocabulary::build(Corpus({rec(1, "AB")}), 2, std::vector{Field::Name});
    try {
      v.encode({{"ZZ", 1}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Vocabulary);
    }
  }

  TEST_CASE("vocabulary dump") {
    const Vocabulary v = Vocabulary::build(Corpus({rec(1, "AB"), rec(2, "AB")}), 2,
                                           std::vector{Field::Name});
    std::ostringstream out;
    v.write(out);
    CHECK(out.str() == "0\tAB\t2\n");
  }

  TEST_CASE("bags sort, merge and drop zeros") {
    const ShingleBag b({{5, 1.0}, {2, 0.0}, {5, 2.0}, {1, 0.5}});
    REQUIRE(b.size() == 2);
    CHECK(b.entries()[0] == ShingleBag::Entry{1, 0.5});
    CHECK(b.entries()[1] == ShingleBag::Entry{5, 3.0});
    CHECK(b.weight(5) == 3.0);
    CHECK(b.weight(4) == 0.0);
    CHECK(b.max_weight() == 3.0);
    CHECK(b.scaled(2.0).weight(1) == 1.0);
    CHECK_THROWS_AS(ShingleBag({{1, -1.0}}), Error);
    CHECK_THROWS_AS(ShingleBag({{1, std::nan("")}}), Error);
  }

  TEST_CASE("idf weights") {
    const std::vector<Field> name{Field::Name};
    // "AB" is in every record, "CD" in one of four, appearing twice there.
    const Corpus c({rec(1, "ABxCDyCD"), rec(2, "AB"), rec(3, "AB"), rec(4, "AB")});
    const Vocabulary v = Vocabulary::build(c, 2, name);
    const ShingleBag w = idf_weight(v.bag(c[0]), v);
    CHECK(w.weight(*v.find("AB")) == 0.0);
    CHECK(w.weight(*v.find("CD")) == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));
    CHECK(2.0 * std::log(4.0) == doctest::Approx(2.7726).epsilon(1e-4));
  }

  TEST_CASE("idf weight per occurrence is ln(N/df)") {
    const std::vector<Field> name{Field::Name};
    std::vector<Record> records;
    for (int i = 0; i < 11; ++i) records.push_back(rec(i + 1, i < 4 ? "QQ" : "ZZ"));
    const Corpus c(records);
    const Vocabulary v = Vocabulary::build(c, 2, name);
    const ShingleBag w = idf_weight(v.bag(c[0]), v);
    CHECK(w.weight(*v.find("QQ")) == doctest::Approx(std::log(11.0 / 4.0)).epsilon(1e-12));
  }

  TEST_CASE("corpus bags do not depend on worker count") {
    std::vector<Record> records;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
      std::string name;
      for (int j = 0; j < 8; ++j) name.push_back(static_cast<char>('a' + rng() % 6));
      records.push_back(rec(i + 1, name, "2013-06-20", i % 2 ? "Homs" : "Hama"));
    }
    const Corpus c(records);
    const Vocabulary v = Vocabulary::build(c, 3, default_fields());
    CHECK(corpus_bags(c, v, Weighting::Idf, 1) == corpus_bags(c, v, Weighting::Idf, 4));
    CHECK(corpus_bags(c, v, Weighting::Counts, 1) == corpus_bags(c, v, Weighting::Counts, 3));
  }
}
