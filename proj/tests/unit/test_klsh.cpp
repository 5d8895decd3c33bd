#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "erblock/error.hpp"
#include "erblock/klsh.hpp"
#include "oracles.hpp"

using namespace erblock;
using namespace erblock::klsh;
using oracle::rec;

namespace {

PointSet random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  PointSet p{dim, std::vector<double>(n * dim)};
  for (double& x : p.coords) x = g(rng);
  return p;
}

std::set<std::uint32_t> labels(const ClusterModel& m) {
  return {m.assignment.begin(), m.assignment.end()};
}

}  // namespace

TEST_SUITE("klsh") {
  TEST_CASE("empty bag projects to the origin") {
    const ProjectionMatrix proj(20, 1);
    const auto x = project(ShingleBag{}, proj);
    CHECK(x == std::vector<double>(20, 0.0));
    CHECK_THROWS_AS(ProjectionMatrix(0, 1), Error);
  }

  TEST_CASE("projection is linear and deterministic") {
    const ProjectionMatrix proj(8, 5);
    const ShingleBag bag({{3, 1.5}, {17, 0.25}, {900, 2.0}});
    const auto x = project(bag, proj);
    const auto x2 = project(bag.scaled(2.0), proj);
    const auto again = project(bag, ProjectionMatrix(8, 5));
    for (std::size_t j = 0; j < x.size(); ++j) {
      CHECK(x2[j] == doctest::Approx(2.0 * x[j]).epsilon(1e-12));
      CHECK(again[j] == x[j]);
    }
    // Coordinate j is the weighted sum of entries.
    CHECK(x[2] == doctest::Approx(1.5 * proj.entry(2, 3) + 0.25 * proj.entry(2, 17) +
                                  2.0 * proj.entry(2, 900))
                      .epsilon(1e-12));
  }

  TEST_CASE("projection entries look standard normal") {
    const ProjectionMatrix proj(4, 77);
    const std::size_t n = 50'000;
    double sum = 0.0, sq = 0.0;
    std::size_t within1 = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = proj.entry(t % 4, static_cast<TokenId>(t));
      sum += v;
      sq += v * v;
      within1 += std::abs(v) < 1.0;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.03);
    CHECK(std::abs(static_cast<double>(within1) / n - 0.6827) < 0.01);
  }

  TEST_CASE("c = n puts every distinct point in its own block") {
    const PointSet p = random_points(40, 3, 2);
    const ClusterModel m = kmeans_block(p, 40, 9);
    CHECK(labels(m).size() == 40);
    CHECK(m.mean_cluster_size() == 1.0);
    CHECK(m.partition().count() == 0);
  }

  TEST_CASE("c = 1 gives one block of size n") {
    const PointSet p = random_points(25, 2, 4);
    const ClusterModel m = kmeans_block(p, 1, 9);
    CHECK(labels(m) == std::set<std::uint32_t>{0});
    CHECK(m.partition().count() == 25 * 24 / 2);
    CHECK(m.mean_cluster_size() == 25.0);
  }

  TEST_CASE("20,000 points in 200 clusters average 100 per block") {
    const PointSet p = random_points(20'000, 2, 8);
    KMeansOptions opt;
    opt.max_iterations = 5;
    const ClusterModel m = kmeans_block(p, 200, 1, opt);
    CHECK(m.mean_cluster_size() == 100.0);
    CHECK(labels(m).size() == 200);
    std::vector<std::size_t> sizes(200, 0);
    for (auto a : m.assignment) ++sizes[a];
    std::size_t total = 0;
    for (auto s : sizes) total += s;
    CHECK(total == 20'000);
  }

  TEST_CASE("cluster count outside [1, n] is a parameter error") {
    const PointSet p = random_points(5, 2, 1);
    CHECK_THROWS_AS(kmeans_block(p, 0, 1), Error);
    CHECK_THROWS_AS(kmeans_block(p, 6, 1), Error);
  }

  TEST_CASE("coincident points still fill every cluster") {
    PointSet p{1, std::vector<double>(10, 3.0)};
    p.coords[9] = 4.0;
    const ClusterModel m = kmeans_block(p, 4, 2);
    CHECK(labels(m).size() == 4);
  }

  TEST_CASE("Lloyd objective never increases") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const PointSet p = random_points(500, 4, seed);
      const ClusterModel m = kmeans_block(p, 12, seed);
      REQUIRE(m.objective.size() >= 2);
      for (std::size_t i = 1; i < m.objective.size(); ++i) {
        CHECK(m.objective[i] <= m.objective[i - 1] * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("assignment does not depend on worker count") {
    const PointSet p = random_points(3000, 5, 6);
    KMeansOptions one, four;
    four.workers = 4;
    const ClusterModel a = kmeans_block(p, 30, 3, one);
    const ClusterModel b = kmeans_block(p, 30, 3, four);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centroids.coords == b.centroids.coords);
  }

  TEST_CASE("duplicate records share a cluster") {
    std::vector<Record> records;
    std::mt19937_64 rng(12);
    RecordId id = 1;
    for (int i = 0; i < 150; ++i) {
      std::string name;
      for (int j = 0; j < 10; ++j) name.push_back(static_cast<char>('a' + rng() % 20));
      const Record r = rec(id++, name, "2013-06-20", "Homs");
      records.push_back(r);
      if (i % 5 == 0) {
        Record copy = r;
        copy.id = id++;
        records.push_back(copy);
      }
    }
    const Corpus c(records);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      KlshParams params;
      params.shingle = 1;
      params.clusters = 20;
      params.seed = seed;
      const ClusterModel m = klsh_assign(c, params);
      for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (c[i].name == c[i + 1].name) CHECK(m.assignment[i] == m.assignment[i + 1]);
      }
      CHECK(m.mean_cluster_size() == doctest::Approx(c.size() / 20.0));
    }
  }

  TEST_CASE("klsh is deterministic per seed") {
    std::vector<Record> records;
    for (int i = 0; i < 60; ++i) records.push_back(rec(i + 1, "name" + std::to_string(i * 37)));
    const Corpus c(records);
    KlshParams params;
    params.shingle = 2;
    params.clusters = 6;
    params.seed = 4;
    const ClusterModel a = klsh_assign(c, params);
    const ClusterModel b = klsh_assign(c, params);
    CHECK(a.assignment == b.assignment);
    CHECK(a.objective == b.objective);
  }

  TEST_CASE("mean block size falls as c grows") {
    const PointSet p = random_points(300, 2, 3);
    double last = 1e9;
    for (std::size_t c : {1, 2, 5, 10, 30, 100, 300}) {
      KMeansOptions opt;
      opt.max_iterations = 3;
      const double size = kmeans_block(p, c, 1, opt).mean_cluster_size();
      CHECK(size == 300.0 / static_cast<double>(c));
      CHECK(size <= last);
      last = size;
    }
  }

  TEST_CASE("cluster dump") {
    ClusterModel m;
    m.clusters = 2;
    m.assignment = {1, 0, 1};
    const std::vector<RecordId> ids{10, 20, 30};
    std::ostringstream out;
    m.write_dump(out, ids);
    CHECK(out.str() == "10\t1\n20\t0\n30\t1\n");
    CHECK(m.partition().count() == 1);
    CHECK(m.partition().contains(0, 2));
  }
}
