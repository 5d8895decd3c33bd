#include <sstream>

#include "doctest.h"
#include "erblock/csv.hpp"
#include "erblock/error.hpp"
#include "erblock/record.hpp"
#include "erblock/unicode.hpp"
#include "oracles.hpp"

using namespace erblock;

namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in);
}

TruthSet parse_truth(const std::string& text, const Corpus* corpus = nullptr) {
  std::istringstream in(text);
  return read_truth(in, corpus);
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

const std::string kHeader = "id,name,date_of_death,governorate,sex,source\n";

}  // namespace

TEST_SUITE("record") {
  TEST_CASE("header only gives an empty corpus") {
    CHECK(parse(kHeader).size() == 0);
  }

  TEST_CASE("ids and fields pass through") {
    const Corpus c = parse(kHeader +
                           "1,Ali,2013-06-20,Damascus,M,S1\n"
                           "2,Omar,,Homs,F,S2\n"
                           "3,Sara,2012-01-01,,,\n");
    REQUIRE(c.size() == 3);
    CHECK(c[0].id == 1);
    CHECK(c[1].id == 2);
    CHECK(c[2].id == 3);
    CHECK(c[0].date_of_death == "2013-06-20");
    CHECK(c[0].governorate == "Damascus");
    CHECK(c[0].sex == Sex::Male);
    CHECK(c[1].date_of_death.empty());
    CHECK(c[2].sex == Sex::Unknown);
    CHECK(c.index_of(3) == std::optional<std::size_t>(2));
    CHECK_FALSE(c.index_of(9));
  }

  TEST_CASE("columns may come in any order and id may be absent") {
    const Corpus c = parse("sex,governorate,name,date_of_death\nF,Hama,Mona,2014-02-03\n");
    REQUIRE(c.size() == 1);
    CHECK(c[0].id == 0);
    CHECK(c[0].name == "Mona");
    CHECK(c[0].governorate == "Hama");
  }

  TEST_CASE("quoted fields keep commas and quotes") {
    const Corpus c = parse(kHeader + "7,\"Abu \"\"Ali\"\", Jr\",,,,\n");
    CHECK(c[0].name == "Abu \"Ali\", Jr");
  }

  TEST_CASE("names are NFC normalized and reserved characters stripped") {
    // A + combining ring above composes to U+00C5.
    const Corpus c = parse(kHeader + "1,A\xCC\x8A\xE2\x90\x9FX,,,,\n");
    CHECK(c[0].name == "\xC3\x85X");
  }

  TEST_CASE("round trip through write_corpus") {
    const Corpus c = parse(kHeader + "4,\"a,b\",2011-03-15,Idlib,F,S3\n5,x,,,,\n");
    std::ostringstream out;
    write_corpus(out, c);
    const Corpus back = parse(out.str());
    REQUIRE(back.size() == 2);
    CHECK(back[0] == c[0]);
    CHECK(back[1] == c[1]);
  }

  TEST_CASE("malformed input raises the matching error") {
    CHECK(code_of([] { parse(""); }) == ErrorCode::Schema);
    CHECK(code_of([] { parse("id,name\n1,x\n"); }) == ErrorCode::Schema);
    CHECK(code_of([] { parse(kHeader + "1,a,,,,\n1,b,,,,\n"); }) == ErrorCode::DuplicateId);
    CHECK(code_of([] { parse(kHeader + "x,a,,,,\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse(kHeader + "1,a,2013-02-30,,,\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse(kHeader + "1,a,,,Q,\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse(kHeader + "1,a,,\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse(kHeader + "1,\"a,,,,\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse(kHeader + "1,\xFF,,,,\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { load_corpus("/nonexistent/corpus.csv"); }) == ErrorCode::Io);
  }

  TEST_CASE("date validation") {
    CHECK(is_valid_date(""));
    CHECK(is_valid_date("2012-02-29"));
    CHECK_FALSE(is_valid_date("2013-02-29"));
    CHECK(is_valid_date("2000-02-29"));
    CHECK_FALSE(is_valid_date("1900-02-29"));
    CHECK_FALSE(is_valid_date("2013-13-01"));
    CHECK_FALSE(is_valid_date("2013-6-20"));
  }
}

TEST_SUITE("truth") {
  TEST_CASE("empty file gives no pairs") {
    CHECK(parse_truth("").labeled_count() == 0);
  }

  TEST_CASE("reversed duplicates collapse to one canonical pair") {
    const TruthSet t = parse_truth("id_a,id_b,label\n2,1,match\n1,2,match\n");
    REQUIRE(t.matches().size() == 1);
    CHECK(t.matches()[0] == Pair{1, 2});
    CHECK(t.label(2, 1) == std::optional<Label>(Label::Match));
    CHECK_FALSE(t.label(1, 3));
  }

  TEST_CASE("75 match pairs are all kept") {
    std::string text = "id_a,id_b,label\n";
    for (int i = 0; i < 75; ++i) {
      text += std::to_string(2 * i + 1) + "," + std::to_string(2 * i + 2) + ",match\n";
    }
    for (int i = 0; i < 30; ++i) {
      text += std::to_string(i + 1000) + "," + std::to_string(i + 2000) + ",nonmatch\n";
    }
    const TruthSet t = parse_truth(text);
    CHECK(t.matches().size() == 75);
    CHECK(t.nonmatches().size() == 30);
  }

  TEST_CASE("errors") {
    CHECK(code_of([] { parse_truth("a,b,c\n"); }) == ErrorCode::Schema);
    CHECK(code_of([] { parse_truth("id_a,id_b,label\n1,2,match\n2,1,nonmatch\n"); }) ==
          ErrorCode::Consistency);
    CHECK(code_of([] { parse_truth("id_a,id_b,label\n1,1,match\n"); }) == ErrorCode::Domain);
    CHECK(code_of([] { parse_truth("id_a,id_b,label\n1,2,maybe\n"); }) == ErrorCode::Parse);
    const Corpus c = parse(kHeader + "1,a,,,,\n2,b,,,,\n");
    CHECK(code_of([&] { parse_truth("id_a,id_b,label\n1,3,match\n", &c); }) ==
          ErrorCode::Referential);
    CHECK(parse_truth("id_a,id_b,label\n1,2,nonmatch\n", &c).nonmatches().size() == 1);
  }

  TEST_CASE("write_truth round trip") {
    const TruthSet t = parse_truth("id_a,id_b,label\n5,3,match\n1,9,nonmatch\n");
    std::ostringstream out;
    write_truth(out, t);
    CHECK(parse_truth(out.str()) == t);
  }

  TEST_CASE("pair files accept an optional header") {
    std::istringstream with("id_a,id_b\n3,1\n2,5\n");
    const auto pairs = read_pairs(with);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == Pair{1, 3});
    std::istringstream self("4,4\n");
    CHECK(code_of([&] { read_pairs(self); }) == ErrorCode::Domain);
  }
}

TEST_SUITE("unicode") {
  TEST_CASE("decode and encode are inverse on valid text") {
    const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";
    const auto u = unicode::decode(s);
    REQUIRE(u.size() == 4);
    CHECK(u[1] == 0xE9);
    CHECK(u[3] == 0x1F600);
    CHECK(unicode::encode(u) == s);
  }

  TEST_CASE("invalid sequences are rejected") {
    CHECK(code_of([] { unicode::decode("\xC0\xAF"); }) == ErrorCode::Parse);
    CHECK(code_of([] { unicode::decode("\xE2\x82"); }) == ErrorCode::Parse);
    CHECK(code_of([] { unicode::decode("\xED\xA0\x80"); }) == ErrorCode::Parse);
  }

  TEST_CASE("csv escape quotes only when needed") {
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  }

  TEST_CASE("csv reader handles CRLF and embedded newlines") {
    std::istringstream in("a,b\r\n\"x\ny\",z\r\n");
    csv::Reader r(in);
    CHECK(r.next()->size() == 2);
    const auto row = r.next();
    REQUIRE(row);
    CHECK((*row)[0] == "x\ny");
    CHECK(r.line() == 2);
    CHECK_FALSE(r.next());
  }
}
