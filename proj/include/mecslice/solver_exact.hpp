#ifndef MECSLICE_SOLVER_EXACT_HPP
#define MECSLICE_SOLVER_EXACT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>

#include "mecslice/model.hpp"

namespace mecslice {

struct ExactConfig {
    Connectivity mode = Connectivity::multi;
    std::uint64_t node_cap = 200'000'000;
    /// Relative optimality gap accepted when pruning; 0 proves exact optimality.
    double tolerance = 0.0;
    /// Line-oriented search trace (incumbents, periodic progress) when set.
    std::ostream* trace = nullptr;
};

struct ExactResult {
    Placement placement;
    CostBreakdown cost;
    bool proven_optimal = false;
    std::uint64_t nodes = 0;
};

/// Raised when no placement satisfies the constraints. `request` names the
/// offending request when a single one is to blame.
class NoFeasiblePlacement : public std::runtime_error {
public:
    NoFeasiblePlacement(std::optional<std::size_t> request, int constraint, const std::string& what)
        : std::runtime_error(what), request_(request), constraint_(constraint) {}
    std::optional<std::size_t> request() const noexcept { return request_; }
    int constraint() const noexcept { return constraint_; }

private:
    std::optional<std::size_t> request_;
    int constraint_;
};

/// Names the binding constraint for a request that has no candidate MEC pair.
NoFeasiblePlacement diagnose_unplaceable(const Instance& inst, std::size_t r, Connectivity mode);

/**
 * Cost-minimal placement by branch-and-bound over per-request (primary,
 * backup) MEC pairs, with exact minimum-server packing inside each MEC at
 * the leaves. Equal-cost optima resolve to the lexicographically smallest
 * (sorted used MEC ids, per-request pairs in request order).
 *
 * If the node cap is hit the best placement found so far is returned with
 * proven_optimal = false.
 */
ExactResult solve_exact(const Instance& inst, const CostWeights& weights, const ExactConfig& cfg = {});

}  // namespace mecslice

#endif  // MECSLICE_SOLVER_EXACT_HPP
