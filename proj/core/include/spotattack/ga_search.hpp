#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spotattack/imaging.hpp"
#include "spotattack/rng.hpp"

namespace spotattack {

/// How a bit field maps to its integer value before the modulo reduction.
enum class FieldCode {
  /// Plain unsigned binary, MSB first.
  Binary,
  /// Reflected Gray code: adjacent positions differ in one bit.
  Gray,
};

struct GaParams {
  double crossover_prob = 0.8;   // Pc
  double mutation_prob = 0.01;   // Pm, per bit
  int population = 10;           // PS
  int generations = 100;         // G
  double fitness_threshold = 0.99;  // Tf
  std::uint64_t seed = 1;
  bool elitism = true;
  FieldCode code = FieldCode::Gray;
  /// Parallel fitness evaluations per generation; 1 runs inline.
  int workers = 1;

  /// Throws InvalidArgument.
  void validate() const;
};

/// Bit string encoding (a, b) as two concatenated MSB-first fields.
struct Chromosome {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

/// Field widths for a feasible region: ceil(log2(span)) bits per axis, at least 1.
struct ChromosomeLayout {
  Region region;
  FieldCode code = FieldCode::Gray;
  int bits_a = 1;
  int bits_b = 1;

  explicit ChromosomeLayout(Region r, FieldCode code = FieldCode::Gray);
  int length() const { return bits_a + bits_b; }
};

/// Maps a position to its field values relative to the region minimum.
Chromosome encode(Position p, const ChromosomeLayout& layout);
/// Every bit pattern decodes into the region: field value mod span, plus the minimum.
/// Under FieldCode::Gray the field value is the Gray-decoded integer.
Position decode(const Chromosome& c, const ChromosomeLayout& layout);

/// Must be deterministic and thread-safe when GaParams::workers > 1.
using FitnessFn = std::function<double(Position)>;

struct SearchResult {
  Position best_position;
  double best_fitness = 0.0;
  int generations_run = 0;
  long oracle_queries = 0;
  /// Best fitness of each evaluated generation.
  std::vector<double> history;
};

std::string to_json(const SearchResult& r);

/// Index drawn with probability fitness_i / sum; uniform when the sum is zero.
std::size_t roulette_index(std::span<const double> fitnesses, Rng& rng);
/// Two independent roulette draws. Throws EmptyPopulation.
std::pair<std::size_t, std::size_t> roulette_select(std::span<const double> fitnesses, Rng& rng);

/// Swaps suffixes after `cut` (in [1, len-1]). Throws LengthMismatch.
std::pair<Chromosome, Chromosome> one_point_crossover(const Chromosome& x, const Chromosome& y,
                                                      std::size_t cut);
/// Cut drawn uniformly from [1, len-1].
std::pair<Chromosome, Chromosome> one_point_crossover(const Chromosome& x, const Chromosome& y,
                                                      Rng& rng);

/// Flips each bit independently with probability `prob`.
Chromosome mutate(const Chromosome& x, double prob, Rng& rng);

Chromosome random_chromosome(const ChromosomeLayout& layout, Rng& rng);

/// Genetic search for the position maximizing `fitness` over `region`.
///
/// Each generation evaluates all PS individuals once. The run stops as soon as an
/// individual reaches the fitness threshold or G generations have been evaluated, and
/// returns the best decoded member of the last evaluated population, so the total
/// oracle budget is at most PS * G. Otherwise the next population is bred by roulette
/// selection, one-point crossover (prob Pc) and per-bit mutation (prob Pm); with
/// elitism the current best replaces one random offspring.
SearchResult run_ga(const FitnessFn& fitness, Region region, const GaParams& params);

/// Evaluates every position in row-major order; ties keep the first (smallest) position.
SearchResult exhaustive_search(const FitnessFn& fitness, Region region);

}  // namespace spotattack
