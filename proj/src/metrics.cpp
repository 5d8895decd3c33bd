#include "erblock/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "erblock/csv.hpp"
#include "erblock/error.hpp"
#include "erblock/klsh.hpp"
#include "erblock/lsh.hpp"
#include "erblock/rules.hpp"

namespace erblock {

namespace {

bool has(std::span<const Pair> sorted, const Pair& p) {
  return std::binary_search(sorted.begin(), sorted.end(), p);
}

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t all_pairs(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void finish_metrics(BlockingMetrics& m) {
  const std::uint64_t matches = m.tp + m.fn;
  const std::uint64_t labeled = matches + m.fp + m.tn;
  m.recall = matches == 0 ? std::nullopt
                          : std::optional<double>(static_cast<double>(m.tp) / static_cast<double>(matches));
  m.precision = (m.tp + m.fp) == 0 ? 1.0
                                   : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  m.rr = labeled == 0 ? std::nullopt
                      : std::optional<double>(1.0 - static_cast<double>(m.tp + m.fp) /
                                                        static_cast<double>(labeled));
}

BlockingMetrics confusion(std::span<const Pair> candidates, const TruthSet& truth,
                          std::uint64_t records) {
  BlockingMetrics m;
  for (const Pair& p : truth.matches()) (has(candidates, p) ? m.tp : m.fn)++;
  for (const Pair& p : truth.nonmatches()) (has(candidates, p) ? m.fp : m.tn)++;
  m.candidate_count = candidates.size();
  m.total_pairs = all_pairs(records);
  finish_metrics(m);
  return m;
}

std::optional<double> reduction_ratio(std::span<const Pair> candidates, const TruthSet& truth) {
  const std::size_t labeled = truth.labeled_count();
  if (labeled == 0) return std::nullopt;
  std::size_t kept = 0;
  for (const Pair& p : truth.matches()) kept += has(candidates, p);
  for (const Pair& p : truth.nonmatches()) kept += has(candidates, p);
  return 1.0 - static_cast<double>(kept) / static_cast<double>(labeled);
}

IndexedTruth index_truth(const TruthSet& truth, const Corpus& corpus) {
  auto position = [&](RecordId id) {
    auto i = corpus.index_of(id);
    if (!i) fail(ErrorCode::Referential, "truth id " + std::to_string(id) + " is not in the corpus");
    return static_cast<std::uint32_t>(*i);
  };
  IndexedTruth out;
  for (const Pair& p : truth.matches()) {
    out.matches.push_back(IndexPair::canonical(position(p.a), position(p.b)));
  }
  for (const Pair& p : truth.nonmatches()) {
    out.nonmatches.push_back(IndexPair::canonical(position(p.a), position(p.b)));
  }
  return out;
}

BlockingMetrics evaluate(const CandidateSource& candidates, const IndexedTruth& truth) {
  BlockingMetrics m;
  for (const IndexPair& p : truth.matches) (candidates.contains(p.a, p.b) ? m.tp : m.fn)++;
  for (const IndexPair& p : truth.nonmatches) (candidates.contains(p.a, p.b) ? m.fp : m.tn)++;
  m.candidate_count = candidates.count();
  m.total_pairs = all_pairs(candidates.record_count());
  finish_metrics(m);
  return m;
}

std::string_view sweep_method_name(SweepMethod method) noexcept {
  switch (method) {
    case SweepMethod::Classical: return "classical";
    case SweepMethod::Doph: return "doph";
    case SweepMethod::WeightedDoph: return "weighted-doph";
    case SweepMethod::Klsh: return "klsh";
    case SweepMethod::Rules: return "rules";
  }
  return "";
}

void SweepGrid::validate() const {
  if (method == SweepMethod::Rules) {
    if (schemes.empty()) fail(ErrorCode::Parameter, "rules sweep needs at least one scheme");
    return;
  }
  if (K.empty() || L.empty() || shingles.empty() || seeds.empty()) {
    fail(ErrorCode::Parameter, "sweep axes must be non-empty");
  }
  auto positive = [](const auto& axis) {
    return std::all_of(axis.begin(), axis.end(), [](auto v) { return v > 0; });
  };
  if (!positive(K) || !positive(L) || !positive(shingles)) {
    fail(ErrorCode::Parameter, "sweep axis values must be positive");
  }
}

std::size_t SweepGrid::cell_count() const {
  if (method == SweepMethod::Rules) return schemes.size();
  return K.size() * L.size() * shingles.size() * seeds.size();
}

SweepGrid reference_grid(SweepMethod method, std::uint32_t divisor) {
  if (divisor == 0) fail(ErrorCode::Parameter, "divisor must be positive");
  SweepGrid g;
  g.method = method;
  g.K = {15, 18, 20, 23, 25, 28, 30, 32, 35};
  for (std::uint32_t l = 100; l <= 1000; l += 100) {
    const auto scaled = static_cast<std::uint32_t>(
        std::max(1.0, std::round(static_cast<double>(l) / divisor)));
    if (std::find(g.L.begin(), g.L.end(), scaled) == g.L.end()) g.L.push_back(scaled);
  }
  g.shingles = {2, 3, 4, 5};
  g.seeds = {0};
  return g;
}

namespace {

// Per-table first-collision histograms; prefix sums give every L <= tables.
struct PrefixStats {
  std::vector<std::uint64_t> candidates, tp, fp;
  double millis = 0.0;
};

PrefixStats prefix_stats(const BlockAssignment& blocks, const IndexedTruth& truth,
                         unsigned workers) {
  const std::uint32_t tables = blocks.tables();
  PrefixStats s;
  s.candidates = blocks.first_collisions(workers);
  s.tp.assign(tables, 0);
  s.fp.assign(tables, 0);
  for (const auto& p : truth.matches) {
    if (auto t = blocks.first_table(p.a, p.b)) ++s.tp[*t];
  }
  for (const auto& p : truth.nonmatches) {
    if (auto t = blocks.first_table(p.a, p.b)) ++s.fp[*t];
  }
  return s;
}

BlockingMetrics prefix_metrics(const PrefixStats& s, std::uint32_t L, const IndexedTruth& truth,
                               std::uint64_t records) {
  BlockingMetrics m;
  for (std::uint32_t t = 0; t < L; ++t) {
    m.candidate_count += s.candidates[t];
    m.tp += s.tp[t];
    m.fp += s.fp[t];
  }
  m.fn = truth.matches.size() - m.tp;
  m.tn = truth.nonmatches.size() - m.fp;
  m.total_pairs = all_pairs(records);
  finish_metrics(m);
  return m;
}

bool wanted_cell(const SweepGrid& grid, const std::string& method, std::size_t shingle,
                 std::uint32_t K, std::uint32_t L, std::uint64_t seed) {
  return !grid.include || grid.include(method, shingle, K, L, seed);
}

template <typename Fn>
SweepRow run_cell(SweepRow row, Fn&& compute) {
  const auto start = Clock::now();
  try {
    row.metrics = compute();
  } catch (const std::exception& e) {
    row.metrics.reset();
    row.error = e.what();
  }
  row.millis += millis_since(start);
  return row;
}

void sweep_hashing(const Corpus& corpus, const IndexedTruth& truth, const SweepGrid& grid,
                   const std::function<void(const SweepRow&)>& emit) {
  const std::string name(sweep_method_name(grid.method));
  for (std::size_t shingle : grid.shingles) {
    std::vector<TokenSet> sets;
    std::vector<ShingleBag> bags;
    double normalizer = 0.0;
    std::string prep_error;
    double prep_millis = 0.0;
    {
      const auto start = Clock::now();
      try {
        const Vocabulary vocab = Vocabulary::build(corpus, shingle, grid.fields);
        const Weighting w =
            grid.method == SweepMethod::WeightedDoph ? grid.weighting : Weighting::Counts;
        bags = corpus_bags(corpus, vocab, w, grid.workers);
        if (grid.method == SweepMethod::WeightedDoph) {
          normalizer = corpus_max_weight(bags);
        } else {
          sets.reserve(bags.size());
          for (const auto& b : bags) sets.push_back(b.support());
          bags.clear();
        }
      } catch (const std::exception& e) {
        prep_error = e.what();
      }
      prep_millis = millis_since(start);
    }
    // Classical slots do not depend on L, so one pass at the largest L serves
    // every L by prefix. DOPH bins depend on K*L and need a pass per cell.
    const bool shared = grid.method == SweepMethod::Classical;
    std::vector<std::vector<std::uint32_t>> passes;
    if (shared) {
      passes.push_back(grid.L);
    } else {
      for (std::uint32_t L : grid.L) passes.push_back({L});
    }
    for (std::uint32_t K : grid.K) {
      for (const auto& covered : passes) {
        const std::uint32_t pass_L = *std::max_element(covered.begin(), covered.end());
        std::vector<std::optional<PrefixStats>> stats(grid.seeds.size());
        std::vector<std::string> errors(grid.seeds.size(), prep_error);
        for (std::size_t s = 0; s < grid.seeds.size() && prep_error.empty(); ++s) {
          const bool wanted = std::any_of(covered.begin(), covered.end(), [&](std::uint32_t L) {
            return wanted_cell(grid, name, shingle, K, L, grid.seeds[s]);
          });
          if (!wanted) continue;
          const auto start = Clock::now();
          try {
            HashScheme scheme{K, pass_L, grid.seeds[s], HashMode::Doph};
            if (grid.method == SweepMethod::Classical) scheme.mode = HashMode::Classical;
            if (grid.method == SweepMethod::WeightedDoph) scheme.mode = HashMode::WeightedDoph;
            const BlockAssignment blocks =
                scheme.mode == HashMode::WeightedDoph
                    ? weighted_hash_blocks(bags, normalizer, scheme, grid.workers)
                    : hash_blocks(sets, scheme, grid.workers);
            stats[s] = prefix_stats(blocks, truth, grid.workers);
            stats[s]->millis = millis_since(start) + prep_millis;
          } catch (const std::exception& e) {
            errors[s] = e.what();
          }
        }
        for (std::uint32_t L : covered) {
          for (std::size_t s = 0; s < grid.seeds.size(); ++s) {
            if (!wanted_cell(grid, name, shingle, K, L, grid.seeds[s])) continue;
            SweepRow row{name, shingle, K, L, grid.seeds[s], std::nullopt, errors[s], 0.0};
            if (stats[s]) {
              row.millis = stats[s]->millis;
              row = run_cell(std::move(row),
                             [&] { return prefix_metrics(*stats[s], L, truth, corpus.size()); });
            }
            emit(row);
          }
        }
      }
    }
  }
}

void sweep_klsh(const Corpus& corpus, const IndexedTruth& truth, const SweepGrid& grid,
                const std::function<void(const SweepRow&)>& emit) {
  for (std::size_t shingle : grid.shingles) {
    for (std::uint32_t p : grid.K) {
      for (std::uint32_t c : grid.L) {
        for (std::uint64_t seed : grid.seeds) {
          if (!wanted_cell(grid, "klsh", shingle, p, c, seed)) continue;
          SweepRow row{"klsh", shingle, p, c, seed, std::nullopt, "", 0.0};
          emit(run_cell(std::move(row), [&] {
            klsh::KlshParams params;
            params.shingle = shingle;
            params.projections = p;
            params.clusters = c;
            params.seed = seed;
            params.fields = grid.fields;
            params.kmeans.max_iterations = grid.kmeans_iterations;
            params.kmeans.workers = grid.workers;
            return evaluate(klsh::klsh_assign(corpus, params).partition(), truth);
          }));
        }
      }
    }
  }
}

void sweep_rules(const Corpus& corpus, const IndexedTruth& truth, const SweepGrid& grid,
                 const std::function<void(const SweepRow&)>& emit) {
  for (const std::string& text : grid.schemes) {
    if (!wanted_cell(grid, "rules:" + text, 0, 0, 0, 0)) continue;
    SweepRow row{"rules:" + text, 0, 0, 0, 0, std::nullopt, "", 0.0};
    row = run_cell(std::move(row), [&] {
      const auto scheme = rules::DisjunctionScheme::parse(text);
      return evaluate(rules::DisjunctionBlocking(corpus, scheme), truth);
    });
    emit(row);
  }
}

}  // namespace

void sweep(const Corpus& corpus, const TruthSet& truth, const SweepGrid& grid,
           const std::function<void(const SweepRow&)>& emit) {
  grid.validate();
  const IndexedTruth indexed = index_truth(truth, corpus);
  switch (grid.method) {
    case SweepMethod::Classical:
    case SweepMethod::Doph:
    case SweepMethod::WeightedDoph: sweep_hashing(corpus, indexed, grid, emit); break;
    case SweepMethod::Klsh: sweep_klsh(corpus, indexed, grid, emit); break;
    case SweepMethod::Rules: sweep_rules(corpus, indexed, grid, emit); break;
  }
}

void write_sweep_header(std::ostream& out) {
  out << "method,shingle,K,L,seed,recall,precision,rr,candidates,millis\n";
}

void write_sweep_row(std::ostream& out, const SweepRow& row) {
  out << csv::escape(row.method) << ',' << row.shingle << ',' << row.K << ',' << row.L << ','
      << row.seed << ',';
  if (row.metrics) {
    const auto& m = *row.metrics;
    out << (m.recall ? fmt(*m.recall) : "NA") << ',' << fmt(m.precision) << ','
        << (m.rr ? fmt(*m.rr) : "NA") << ',' << m.candidate_count;
  } else {
    out << "NA,NA,NA,NA";
  }
  char ms[32];
  std::snprintf(ms, sizeof ms, "%.1f", row.millis);
  out << ',' << ms << '\n';
  out.flush();
}

}  // namespace erblock
