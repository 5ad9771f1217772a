#include "spotattack/ga_search.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "spotattack/parallel.hpp"

namespace spotattack {

namespace {

int field_bits(int span) {
  int bits = 0;
  while ((1L << bits) < span) ++bits;
  return std::max(bits, 1);
}

unsigned long read_field(const Chromosome& c, int offset, int len, FieldCode code) {
  unsigned long v = 0;
  unsigned long prev = 0;
  for (int i = 0; i < len; ++i) {
    unsigned long bit = c.bits[offset + i];
    if (code == FieldCode::Gray) bit ^= prev;
    prev = bit;
    v = (v << 1) | bit;
  }
  return v;
}

void write_field(Chromosome& c, int offset, int len, unsigned long v, FieldCode code) {
  if (code == FieldCode::Gray) v ^= v >> 1;
  for (int i = len - 1; i >= 0; --i) {
    c.bits[offset + i] = static_cast<std::uint8_t>(v & 1UL);
    v >>= 1;
  }
}

double checked(double f, Position p) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw InvalidArgument("fitness at (" + std::to_string(p.a) + ", " + std::to_string(p.b) +
                          ") is outside [0, 1]: " + std::to_string(f));
  }
  return f;
}

}  // namespace

void GaParams::validate() const {
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw InvalidArgument("Pc must be in [0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw InvalidArgument("Pm must be in [0, 1]");
  if (population < 2 || population % 2 != 0) throw InvalidArgument("PS must be even and >= 2");
  if (generations < 1) throw InvalidArgument("G must be >= 1");
  if (!(fitness_threshold > 0.0 && fitness_threshold <= 1.0)) throw InvalidArgument("Tf must be in (0, 1]");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

ChromosomeLayout::ChromosomeLayout(Region r, FieldCode field_code) : region(r), code(field_code) {
  if (r.rows() < 1 || r.cols() < 1) throw InvalidArgument("empty search region");
  bits_a = field_bits(r.rows());
  bits_b = field_bits(r.cols());
}

Chromosome encode(Position p, const ChromosomeLayout& layout) {
  if (!layout.region.contains(p)) throw PositionOutOfRange("cannot encode a position outside the region");
  Chromosome c{std::vector<std::uint8_t>(layout.length(), 0)};
  write_field(c, 0, layout.bits_a, static_cast<unsigned long>(p.a - layout.region.a_min), layout.code);
  write_field(c, layout.bits_a, layout.bits_b, static_cast<unsigned long>(p.b - layout.region.b_min),
              layout.code);
  return c;
}

Position decode(const Chromosome& c, const ChromosomeLayout& layout) {
  if (static_cast<int>(c.size()) != layout.length()) throw LengthMismatch("chromosome length differs from layout");
  const auto a = read_field(c, 0, layout.bits_a, layout.code) % static_cast<unsigned long>(layout.region.rows());
  const auto b = read_field(c, layout.bits_a, layout.bits_b, layout.code) % static_cast<unsigned long>(layout.region.cols());
  return {layout.region.a_min + static_cast<int>(a), layout.region.b_min + static_cast<int>(b)};
}

std::string to_json(const SearchResult& r) {
  nlohmann::ordered_json j;
  j["best_a"] = r.best_position.a;
  j["best_b"] = r.best_position.b;
  j["best_fitness"] = r.best_fitness;
  j["generations"] = r.generations_run;
  j["queries"] = r.oracle_queries;
  j["history"] = r.history;
  return j.dump();
}

std::size_t roulette_index(std::span<const double> fitnesses, Rng& rng) {
  if (fitnesses.empty()) throw EmptyPopulation("roulette selection over an empty population");
  double total = 0.0;
  for (double f : fitnesses) {
    if (!(f >= 0.0)) throw InvalidArgument("roulette fitness must be non-negative");
    total += f;
  }
  if (total <= 0.0) return static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(fitnesses.size()) - 1));
  const double spin = rng.uniform01() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < fitnesses.size(); ++i) {
    if (fitnesses[i] <= 0.0) continue;
    acc += fitnesses[i];
    last_positive = i;
    if (spin < acc) return i;
  }
  // Rounding can leave spin == acc at the end of the wheel.
  return last_positive;
}

std::pair<std::size_t, std::size_t> roulette_select(std::span<const double> fitnesses, Rng& rng) {
  const std::size_t m = roulette_index(fitnesses, rng);
  const std::size_t n = roulette_index(fitnesses, rng);
  return {m, n};
}

std::pair<Chromosome, Chromosome> one_point_crossover(const Chromosome& x, const Chromosome& y,
                                                      std::size_t cut) {
  if (x.size() != y.size()) throw LengthMismatch("crossover parents differ in length");
  if (x.size() < 2) throw LengthMismatch("crossover needs chromosomes of length >= 2");
  if (cut < 1 || cut >= x.size()) throw InvalidArgument("crossover cut outside [1, len-1]");
  Chromosome cx = x;
  Chromosome cy = y;
  for (std::size_t i = cut; i < x.size(); ++i) std::swap(cx.bits[i], cy.bits[i]);
  return {std::move(cx), std::move(cy)};
}

std::pair<Chromosome, Chromosome> one_point_crossover(const Chromosome& x, const Chromosome& y,
                                                      Rng& rng) {
  if (x.size() != y.size()) throw LengthMismatch("crossover parents differ in length");
  if (x.size() < 2) throw LengthMismatch("crossover needs chromosomes of length >= 2");
  const auto cut = static_cast<std::size_t>(rng.uniform_int(1, static_cast<long>(x.size()) - 1));
  return one_point_crossover(x, y, cut);
}

Chromosome mutate(const Chromosome& x, double prob, Rng& rng) {
  Chromosome out = x;
  for (auto& bit : out.bits) {
    if (rng.bernoulli(prob)) bit ^= 1;
  }
  return out;
}

Chromosome random_chromosome(const ChromosomeLayout& layout, Rng& rng) {
  Chromosome c{std::vector<std::uint8_t>(layout.length())};
  for (auto& bit : c.bits) bit = rng.bit() ? 1 : 0;
  return c;
}

SearchResult run_ga(const FitnessFn& fitness, Region region, const GaParams& params) {
  params.validate();
  const ChromosomeLayout layout(region, params.code);
  Rng rng(params.seed);
  const auto ps = static_cast<std::size_t>(params.population);

  std::vector<Chromosome> population;
  population.reserve(ps);
  for (std::size_t i = 0; i < ps; ++i) population.push_back(random_chromosome(layout, rng));

  SearchResult result;
  std::vector<Position> positions(ps);
  std::vector<double> scores(ps);
  while (true) {
    for (std::size_t i = 0; i < ps; ++i) positions[i] = decode(population[i], layout);
    parallel_for(ps, params.workers,
                 [&](std::size_t i) { scores[i] = checked(fitness(positions[i]), positions[i]); });
    result.oracle_queries += static_cast<long>(ps);
    ++result.generations_run;

    std::size_t best = 0;
    for (std::size_t i = 1; i < ps; ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    result.history.push_back(scores[best]);
    if (scores[best] >= params.fitness_threshold || result.generations_run >= params.generations) {
      result.best_position = positions[best];
      result.best_fitness = scores[best];
      return result;
    }

    std::vector<Chromosome> next;
    next.reserve(ps);
    while (next.size() < ps) {
      const auto [m, n] = roulette_select(scores, rng);
      Chromosome xm = population[m];
      Chromosome xn = population[n];
      if (rng.uniform01() < params.crossover_prob) {
        std::tie(xm, xn) = one_point_crossover(xm, xn, rng);
      }
      next.push_back(mutate(xm, params.mutation_prob, rng));
      next.push_back(mutate(xn, params.mutation_prob, rng));
    }
    if (params.elitism) {
      next[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(ps) - 1))] = population[best];
    }
    population = std::move(next);
  }
}

SearchResult exhaustive_search(const FitnessFn& fitness, Region region) {
  if (region.rows() < 1 || region.cols() < 1) throw InvalidArgument("empty search region");
  SearchResult result;
  result.best_position = {region.a_min, region.b_min};
  result.best_fitness = -1.0;
  for (int a = region.a_min; a <= region.a_max; ++a) {
    for (int b = region.b_min; b <= region.b_max; ++b) {
      const double f = checked(fitness({a, b}), {a, b});
      ++result.oracle_queries;
      if (f > result.best_fitness) {
        result.best_fitness = f;
        result.best_position = {a, b};
      }
    }
  }
  result.generations_run = 1;
  result.history = {result.best_fitness};
  return result;
}

}  // namespace spotattack
