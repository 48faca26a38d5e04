#ifndef MECSLICE_EVALUATION_HPP
#define MECSLICE_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include "mecslice/model.hpp"

namespace mecslice {

struct ResourceUsage {
    std::size_t mecs = 0;
    std::size_t servers = 0;

    friend bool operator==(const ResourceUsage&, const ResourceUsage&) = default;
};

/// Distinct MECs hosting a slice and distinct servers hosting a VNF.
ResourceUsage resource_usage(const Placement& p);

enum class BackupMode { none, onsite, inter_mec };

/// Onsite backups: method 1 reuses the primary's servers, method 2 uses
/// servers disjoint from the primary's.
enum class OnsiteMethod { same_server = 1, disjoint_servers = 2 };

const char* to_string(BackupMode mode);
BackupMode backup_mode_from_string(const std::string& name);

struct FailureScenario {
    std::size_t target_mec = 0;
    std::size_t failed_servers = 1;
    bool whole_facility = false;  // overrides failed_servers with every server of the target
    BackupMode mode = BackupMode::inter_mec;
    OnsiteMethod onsite = OnsiteMethod::disjoint_servers;
};

enum class SamplingMethod { automatic, monte_carlo, exhaustive };

struct AvailabilityOptions {
    std::size_t trials = 10'000;
    std::uint64_t seed = 1;
    SamplingMethod method = SamplingMethod::automatic;
    std::uint64_t exhaustive_limit = 50'000;  // automatic picks enumeration up to this many subsets
};

struct AvailabilityResult {
    double value = 1.0;
    bool exhaustive = false;
    std::uint64_t samples = 0;  // trials run or subsets enumerated
    std::size_t exposed = 0;    // requests whose primary runs in the target MEC
    std::vector<std::size_t> flagged;  // onsite relocation failed; evaluated on the primary alone
};

/**
 * Placement seen by a failure scenario. `none` drops every backup, `onsite`
 * moves each backup into its primary's MEC (repacked), `inter_mec` keeps the
 * placement as is. Requests whose onsite backup cannot be placed lose their
 * backup and are appended to `flagged`. The result may break anti-affinity
 * and is only meant for failure evaluation.
 */
std::vector<std::optional<RequestPlacement>> apply_backup_mode(const Placement& p, const Instance& inst,
                                                               BackupMode mode, OnsiteMethod onsite,
                                                               std::vector<std::size_t>& flagged);

/**
 * Fraction of the requests served from the target MEC that keep at least one
 * slice with every VNF on a surviving server, averaged over failure sets of
 * the given size. Monte Carlo trials draw a seeded random server permutation
 * each and fail its first k entries, so estimates for growing k are nested.
 * Returns 1.0 when no request is served from the target.
 */
AvailabilityResult availability(const Placement& p, const Instance& inst, const FailureScenario& scenario,
                                const AvailabilityOptions& options = {});

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

enum class ThroughputMode { aggregate, duplicate };

struct ThroughputResult {
    double total = 0.0;
    std::vector<double> per_request;  // 0 for rejected requests
};

/// Aggregate mode doubles b^r for admitted multi-connectivity requests.
ThroughputResult throughput(const Placement& p, const Instance& inst, ThroughputMode mode);

struct AvailabilityPoint {
    BackupMode mode = BackupMode::none;
    std::size_t failed_servers = 0;
    AvailabilityResult result;
};

struct EvaluationReport {
    std::string method;
    CostBreakdown cost;
    ResourceUsage usage;
    std::size_t admitted = 0;
    std::vector<std::size_t> rejected;
    double throughput_mbps = 0.0;
    std::size_t violations = 0;  // check_feasibility findings; costs are reported regardless
    std::vector<AvailabilityPoint> availability;
};

EvaluationReport evaluate_placement(const std::string& method, const Placement& p, const Instance& inst,
                                    const CostWeights& weights);

/// The MEC hosting the most primary slices, ties to the lowest id.
std::size_t busiest_mec(const Placement& p, std::size_t site_count);

nlohmann::json to_json(const EvaluationReport& report);

/// "method,metric,value" rows, header included.
std::string to_csv(const std::vector<EvaluationReport>& reports);

}  // namespace mecslice

#endif  // MECSLICE_EVALUATION_HPP
