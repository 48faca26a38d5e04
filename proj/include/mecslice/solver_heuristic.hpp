#ifndef MECSLICE_SOLVER_HEURISTIC_HPP
#define MECSLICE_SOLVER_HEURISTIC_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mecslice/model.hpp"
#include "mecslice/packing.hpp"

namespace mecslice {

/// Lowest-latency-first greedy under multi-connectivity: each request takes
/// the feasible MEC pair of least marginal cost, VNFs packed first-fit-decreasing
/// onto already-active servers first. Unplaceable requests are left rejected.
Placement solve_greedy(const Instance& inst, const CostWeights& weights);

/// Single-connectivity random first-fit: random request order, a fresh random
/// MEC scan per request, first feasible (primary, backup) pair wins.
Placement solve_baseline(const Instance& inst, const CostWeights& weights, std::uint64_t seed);

/**
 * Single-connectivity dedicated protection ("nsp-proxy"). Requests arrive in
 * seeded random order; each takes the least-marginal-cost pair of distinct
 * MECs reachable from the master, and backup slices only share servers with
 * other backups. When no second MEC is reachable the backup goes onto
 * primary-free servers of the primary's MEC, which the constraint checker
 * reports as an anti-affinity violation.
 */
Placement solve_nsp_proxy(const Instance& inst, const CostWeights& weights, std::uint64_t seed);

/// One GA individual: a placement plus cached occupancy and fitness.
struct Chromosome {
    Placement placement;
    Occupancy occupancy;
    CostBreakdown cost;
    std::size_t mecs = 0;
    std::size_t servers = 0;
    std::uint64_t hash = 0;

    double fitness() const noexcept { return cost.total; }
};

Chromosome make_chromosome(Placement placement, const Instance& inst, const CostWeights& weights);

/// Fitness order with ties broken by fewer MECs, fewer servers, then hash.
bool fitter(const Chromosome& a, const Chromosome& b);

struct GaConfig {
    std::size_t population = 100;
    std::size_t generations = 40;
    double crossover_threshold = 0.9;
    double mutation_threshold = 0.7;
    std::uint64_t seed = 1;
    std::size_t init_retries = 200;
};

void validate(const GaConfig& cfg);

class GaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requests that have at least one latency/size-feasible MEC pair.
std::vector<std::size_t> admissible_requests(const Instance& inst, Connectivity mode);

/**
 * Initial population: the greedy placement plus population-1 random
 * feasible chromosomes (requests by ascending latency budget, each taking a
 * uniformly random feasible MEC pair, FFD packing).
 */
std::vector<Chromosome> mga_init(const Instance& inst, const CostWeights& weights, std::size_t population,
                                 std::mt19937_64& rng, std::size_t retries = 200);

/// Per-request MEC exchange between two parents; infeasible moves are skipped.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent1, const Chromosome& parent2,
                                            const Instance& inst, const CostWeights& weights);

/// Relocates the primary (else the backup) slice of one random request to a
/// third MEC when that keeps the request feasible.
Chromosome mutate(const Chromosome& child, const Instance& inst, const CostWeights& weights, std::mt19937_64& rng);

struct GenerationStats {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
    double worst = 0.0;
};

struct MgaResult {
    Placement placement;
    CostBreakdown cost;
    std::vector<GenerationStats> history;  // entry 0 is the initial population
};

MgaResult solve_mga(const Instance& inst, const CostWeights& weights, const GaConfig& cfg = {});

/// "generation,best,mean,worst" rows.
std::string history_csv(const std::vector<GenerationStats>& history);

}  // namespace mecslice

#endif  // MECSLICE_SOLVER_HEURISTIC_HPP
