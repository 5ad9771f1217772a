#include <gtest/gtest.h>

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <mutex>
#include <set>

#include "spotattack/ga_search.hpp"
#include "spotattack/toy_models.hpp"
#include "test_support.hpp"

namespace spotattack {
namespace {

const Region kRect3 = feasible_region(shape::Rect{3}, kCharDims);

// |observed - expected| within three binomial standard deviations.
void expect_within_3sigma(long hits, long trials, double p) {
  const double mean = trials * p;
  const double sigma = std::sqrt(trials * p * (1.0 - p));
  EXPECT_LE(std::abs(hits - mean), 3.0 * sigma) << hits << " of " << trials << " at p=" << p;
}

TEST(GaParams, DefaultsAndValidation) {
  const GaParams p;
  EXPECT_EQ(p.crossover_prob, 0.8);
  EXPECT_EQ(p.mutation_prob, 0.01);
  EXPECT_EQ(p.population, 10);
  EXPECT_EQ(p.generations, 100);
  EXPECT_EQ(p.fitness_threshold, 0.99);
  EXPECT_TRUE(p.elitism);
  EXPECT_NO_THROW(p.validate());
  auto bad = [](auto edit) {
    GaParams q;
    edit(q);
    return q;
  };
  EXPECT_THROW(bad([](GaParams& q) { q.population = 9; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](GaParams& q) { q.population = 0; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](GaParams& q) { q.crossover_prob = 1.1; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](GaParams& q) { q.mutation_prob = -0.1; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](GaParams& q) { q.generations = 0; }).validate(), InvalidArgument);
  EXPECT_THROW(bad([](GaParams& q) { q.fitness_threshold = 0.0; }).validate(), InvalidArgument);
}

TEST(Layout, FieldLengths) {
  const ChromosomeLayout l(kRect3, FieldCode::Binary);
  EXPECT_EQ(l.bits_a, 6);  // 58 rows
  EXPECT_EQ(l.bits_b, 6);  // 33 cols
  const ChromosomeLayout one(Region{4, 4, 0, 1});
  EXPECT_EQ(one.bits_a, 1);
  EXPECT_EQ(one.bits_b, 1);
  const ChromosomeLayout pow2(Region{0, 31, 0, 32});
  EXPECT_EQ(pow2.bits_a, 5);
  EXPECT_EQ(pow2.bits_b, 6);
}

TEST(Decode, ModuloRule) {
  const ChromosomeLayout l(kRect3, FieldCode::Binary);
  Chromosome c{std::vector<std::uint8_t>(12, 0)};
  for (int i = 0; i < 6; ++i) c.bits[i] = 1;
  EXPECT_EQ(decode(c, l).a, 63 % 58);
  EXPECT_EQ(decode(c, l).a, 5);
  EXPECT_EQ(decode(c, l).b, 0);
}

TEST(Decode, GrayFieldValue) {
  const ChromosomeLayout l(kRect3, FieldCode::Gray);
  Chromosome c{std::vector<std::uint8_t>(12, 0)};
  // Gray 000011 -> binary 000010 = 2
  c.bits[4] = 1;
  c.bits[5] = 1;
  EXPECT_EQ(decode(c, l).a, 2);
  // Gray 100000 -> binary 111111 = 63 -> 63 mod 58 = 5
  Chromosome d{std::vector<std::uint8_t>(12, 0)};
  d.bits[0] = 1;
  EXPECT_EQ(decode(d, l).a, 5);
}

TEST(Encode, ZeroAndRoundTrip) {
  for (FieldCode code : {FieldCode::Binary, FieldCode::Gray}) {
    const ChromosomeLayout l(kRect3, code);
    const Chromosome z = encode({0, 0}, l);
    EXPECT_EQ(z.bits, std::vector<std::uint8_t>(l.length(), 0));
    EXPECT_EQ(decode(z, l), (Position{0, 0}));
    const ChromosomeLayout shifted(Region{3, 56, 3, 31}, code);
    EXPECT_EQ(decode(Chromosome{std::vector<std::uint8_t>(shifted.length(), 0)}, shifted), (Position{3, 3}));
    for (int a = kRect3.a_min; a <= kRect3.a_max; ++a)
      for (int b = kRect3.b_min; b <= kRect3.b_max; ++b) ASSERT_EQ(decode(encode({a, b}, l), l), (Position{a, b}));
    EXPECT_THROW(encode({58, 0}, l), PositionOutOfRange);
  }
}

TEST(Encode, GrayNeighboursDifferInOneBit) {
  const ChromosomeLayout l(kRect3, FieldCode::Gray);
  for (int a = 0; a < 57; ++a) {
    const auto x = encode({a, 0}, l).bits;
    const auto y = encode({a + 1, 0}, l).bits;
    int diff = 0;
    for (std::size_t i = 0; i < x.size(); ++i) diff += x[i] != y[i];
    EXPECT_EQ(diff, 1);
  }
}

TEST(Decode, RandomBitsAlwaysFeasible) {
  Rng rng(77);
  for (FieldCode code : {FieldCode::Binary, FieldCode::Gray}) {
    for (const Region reg : {kRect3, feasible_region(shape::Circle{3}, kCharDims), Region{5, 9, 2, 2}}) {
      const ChromosomeLayout l(reg, code);
      for (int i = 0; i < 10000; ++i) ASSERT_TRUE(reg.contains(decode(random_chromosome(l, rng), l)));
    }
  }
  EXPECT_THROW(decode(Chromosome{{0, 1}}, ChromosomeLayout(kRect3)), LengthMismatch);
}

TEST(Roulette, DegenerateWheel) {
  Rng rng(1);
  const std::vector<double> f{1.0, 0.0, 0.0};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(roulette_index(f, rng), 0u);
  EXPECT_THROW(roulette_index(std::vector<double>{}, rng), EmptyPopulation);
  EXPECT_THROW(roulette_select(std::vector<double>{}, rng), EmptyPopulation);
  EXPECT_THROW(roulette_index(std::vector<double>{-1.0, 2.0}, rng), InvalidArgument);
}

TEST(Roulette, ZeroTotalIsUniform) {
  Rng rng(2);
  const std::vector<double> f{0.0, 0.0, 0.0};
  std::array<long, 3> hits{};
  const long n = 30000;
  for (long i = 0; i < n; ++i) ++hits[roulette_index(f, rng)];
  for (long h : hits) expect_within_3sigma(h, n, 1.0 / 3);
}

TEST(Roulette, ThreeToOne) {
  Rng rng(3);
  const std::vector<double> f{3.0, 1.0};
  long first = 0;
  const long n = 40000;
  for (long i = 0; i < n; ++i) first += roulette_index(f, rng) == 0;
  expect_within_3sigma(first, n, 0.75);
}

TEST(Roulette, PairDrawsIndependent) {
  Rng rng(4);
  const std::vector<double> f{1.0, 1.0};
  long same = 0;
  const long n = 30000;
  for (long i = 0; i < n; ++i) {
    const auto [x, y] = roulette_select(f, rng);
    same += x == y;
  }
  expect_within_3sigma(same, n, 0.5);
}

TEST(Crossover, SuffixSwap) {
  const Chromosome x{{0, 0, 0, 0}};
  const Chromosome y{{1, 1, 1, 1}};
  const auto [p, q] = one_point_crossover(x, y, 2);
  EXPECT_EQ(p.bits, (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_EQ(q.bits, (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_THROW(one_point_crossover(x, Chromosome{{1, 1}}, 1), LengthMismatch);
  EXPECT_THROW(one_point_crossover(Chromosome{{1}}, Chromosome{{0}}, 1), LengthMismatch);
  EXPECT_THROW(one_point_crossover(x, y, 0), InvalidArgument);
  EXPECT_THROW(one_point_crossover(x, y, 4), InvalidArgument);
}

TEST(Crossover, IdenticalParents) {
  Rng rng(5);
  const Chromosome x{{1, 0, 1, 1, 0, 0}};
  for (std::size_t cut = 1; cut < x.size(); ++cut) {
    const auto [p, q] = one_point_crossover(x, x, cut);
    EXPECT_EQ(p, x);
    EXPECT_EQ(q, x);
  }
  const auto [p, q] = one_point_crossover(x, x, rng);
  EXPECT_EQ(p, x);
  EXPECT_EQ(q, x);
}

TEST(Crossover, PositionwiseConservationAndUniformCut) {
  Rng rng(6);
  const std::size_t len = 12;
  const ChromosomeLayout l(kRect3, FieldCode::Binary);
  std::vector<long> cuts(len, 0);
  const long n = 33000;
  const Chromosome zeros{std::vector<std::uint8_t>(len, 0)};
  const Chromosome ones{std::vector<std::uint8_t>(len, 1)};
  for (long i = 0; i < n; ++i) {
    const Chromosome x = random_chromosome(l, rng);
    const Chromosome y = random_chromosome(l, rng);
    const auto [p, q] = one_point_crossover(x, y, rng);
    for (std::size_t k = 0; k < len; ++k) {
      ASSERT_EQ(std::multiset<int>({p.bits[k], q.bits[k]}), std::multiset<int>({x.bits[k], y.bits[k]}));
    }
    // cut position recovered from crossing all-zero with all-one parents
    const auto [z, o] = one_point_crossover(zeros, ones, rng);
    std::size_t cut = 0;
    while (cut < len && z.bits[cut] == 0) ++cut;
    ++cuts[cut];
    (void)o;
  }
  EXPECT_EQ(cuts[0], 0);
  for (std::size_t c = 1; c < len; ++c) expect_within_3sigma(cuts[c], n, 1.0 / (len - 1));
}

TEST(Mutate, Extremes) {
  Rng rng(7);
  const Chromosome x{{1, 0, 1, 1, 0, 0, 1}};
  EXPECT_EQ(mutate(x, 0.0, rng), x);
  const Chromosome c = mutate(x, 1.0, rng);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(c.bits[i], 1 - x.bits[i]);
}

TEST(Mutate, BinomialFlipCount) {
  Rng rng(8);
  const Chromosome x{std::vector<std::uint8_t>(12, 0)};
  const long n = 100000;
  long flips = 0;
  std::vector<long> per_bit(12, 0);
  for (long i = 0; i < n; ++i) {
    const Chromosome y = mutate(x, 0.01, rng);
    for (std::size_t k = 0; k < 12; ++k) {
      flips += y.bits[k];
      per_bit[k] += y.bits[k];
    }
  }
  // total flips ~ Binomial(12 n, 0.01); mean per mutation 0.12
  expect_within_3sigma(flips, 12 * n, 0.01);
  EXPECT_NEAR(static_cast<double>(flips) / n, 0.12, 3.0 * std::sqrt(12 * 0.01 * 0.99 / n));
  for (long h : per_bit) expect_within_3sigma(h, n, 0.01);
}

TEST(RunGa, ImmediateThreshold) {
  GaParams p;
  const SearchResult r = run_ga([](Position) { return 1.0; }, kRect3, p);
  EXPECT_EQ(r.generations_run, 1);
  EXPECT_EQ(r.best_fitness, 1.0);
  EXPECT_EQ(r.oracle_queries, p.population);
  EXPECT_EQ(r.history.size(), 1u);
}

TEST(RunGa, SingleGenerationBudget) {
  GaParams p;
  p.generations = 1;
  p.fitness_threshold = 1.0;
  const SearchResult r = run_ga([](Position) { return 0.2; }, kRect3, p);
  EXPECT_EQ(r.generations_run, 1);
  EXPECT_EQ(r.oracle_queries, p.population);
}

TEST(RunGa, BudgetFeasibilityAndReporting) {
  for (bool elitism : {true, false}) {
    GaParams p;
    p.elitism = elitism;
    p.seed = 41;
    std::mutex mu;
    std::vector<Position> seen;
    const FitnessFn f = [&](Position q) {
      std::lock_guard lock(mu);
      seen.push_back(q);
      return planted_fitness(q, {30, 17}, 5.0) * 0.9;
    };
    const SearchResult r = run_ga(f, kRect3, p);
    EXPECT_EQ(r.generations_run, p.generations);
    EXPECT_EQ(r.oracle_queries, static_cast<long>(p.population) * p.generations);
    EXPECT_EQ(static_cast<long>(seen.size()), r.oracle_queries);
    EXPECT_EQ(static_cast<int>(r.history.size()), r.generations_run);
    for (Position q : seen) ASSERT_TRUE(kRect3.contains(q));
    EXPECT_TRUE(kRect3.contains(r.best_position));
    EXPECT_EQ(r.best_fitness, r.history.back());
    EXPECT_EQ(r.best_fitness, f(r.best_position));
    if (elitism) {
      for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_GE(r.history[i], r.history[i - 1]);
    }
  }
}

TEST(RunGa, Deterministic) {
  GaParams p;
  p.seed = 1234;
  const FitnessFn f = [](Position q) { return planted_fitness(q, {12, 8}, 30.0); };
  const SearchResult a = run_ga(f, kRect3, p);
  const SearchResult b = run_ga(f, kRect3, p);
  EXPECT_EQ(a.best_position, b.best_position);
  EXPECT_EQ(a.history, b.history);
  p.workers = 4;
  const SearchResult c = run_ga(f, kRect3, p);
  EXPECT_EQ(a.best_position, c.best_position);
  EXPECT_EQ(a.history, c.history);
  EXPECT_EQ(a.oracle_queries, c.oracle_queries);
}

TEST(RunGa, FitnessOutsideUnitIntervalRejected) {
  EXPECT_THROW(run_ga([](Position) { return 1.5; }, kRect3, GaParams{}), InvalidArgument);
  EXPECT_THROW(run_ga([](Position) -> double { throw IoError("oracle down"); }, kRect3, GaParams{}), IoError);
}

TEST(RunGa, OracleDominance) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Position opt{static_cast<int>(rng.uniform_int(0, 57)), static_cast<int>(rng.uniform_int(0, 32))};
    const double tau = 1.0 + rng.uniform01() * 40.0;
    const FitnessFn f = [&](Position q) { return 0.5 * planted_fitness(q, opt, tau) + 0.001 * ((q.a * 7 + q.b) % 5); };
    GaParams p;
    p.seed = 100 + trial;
    p.generations = 20;
    EXPECT_GE(exhaustive_search(f, kRect3).best_fitness, run_ga(f, kRect3, p).best_fitness);
  }
}

TEST(RunGa, PlantedOptimumMostSeeds) {
  const FitnessFn f = [](Position q) { return planted_fitness(q, {30, 17}, 50.0); };
  const double optimum = exhaustive_search(f, kRect3).best_fitness;
  int ok = 0;
  for (std::uint64_t s = 1; s <= 100; ++s) {
    GaParams p;
    p.seed = s;
    const SearchResult r = run_ga(f, kRect3, p);
    ASSERT_LE(r.oracle_queries, 1000);
    ok += r.best_fitness >= 0.99 * optimum;
  }
  EXPECT_GE(ok, 90);
}

TEST(Exhaustive, Examples) {
  const SearchResult r = exhaustive_search([](Position q) { return planted_fitness(q, {30, 17}, 50.0); }, kRect3);
  EXPECT_EQ(r.best_position, (Position{30, 17}));
  EXPECT_EQ(r.best_fitness, 1.0);
  EXPECT_EQ(r.oracle_queries, 1914);
  const SearchResult c = exhaustive_search([](Position) { return 0.3; }, Region{2, 9, 4, 7});
  EXPECT_EQ(c.best_position, (Position{2, 4}));
  EXPECT_EQ(c.oracle_queries, 32);
}

TEST(SearchResult, Json) {
  SearchResult r{{3, 4}, 0.5, 2, 20, {0.25, 0.5}};
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j.at("best_a"), 3);
  EXPECT_EQ(j.at("best_b"), 4);
  EXPECT_EQ(j.at("best_fitness"), 0.5);
  EXPECT_EQ(j.at("generations"), 2);
  EXPECT_EQ(j.at("queries"), 20);
  EXPECT_EQ(j.at("history"), nlohmann::json::array({0.25, 0.5}));
}

}  // namespace
}  // namespace spotattack
