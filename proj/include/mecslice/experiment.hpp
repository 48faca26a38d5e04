#ifndef MECSLICE_EXPERIMENT_HPP
#define MECSLICE_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecslice/evaluation.hpp"
#include "mecslice/model.hpp"
#include "mecslice/solver_exact.hpp"
#include "mecslice/solver_heuristic.hpp"
#include "mecslice/topology.hpp"

namespace mecslice {

enum class Method { exact, exact_sc, mga, greedy, nsp_proxy, baseline };

const char* to_string(Method m);
Method method_from_string(const std::string& name);
bool is_exact(Method m);
Connectivity connectivity_of(Method m);

struct SubstrateOptions {
    std::size_t servers_per_mec = 10;
    int server_vcpu = 56;
    Mbps mec_bandwidth = 10'000.0;
};

/**
 * Seeded request set over the given MEC hosts. A request that has no
 * admissible MEC pair under either connectivity mode is redrawn (same id,
 * derived seed, bounded attempts) so that every method faces the same
 * admissible request set.
 */
Instance make_instance(const DelayMatrix& delays, const std::vector<NodeId>& hosts, const SubstrateOptions& substrate,
                       std::size_t requests, std::uint64_t seed);

/// The first `n` requests of an instance, same substrate.
Instance prefix_instance(const Instance& inst, std::size_t n);

struct MethodRun {
    Placement placement;
    CostBreakdown cost;
    bool proven_optimal = false;  // meaningful for exact methods only
    std::uint64_t nodes = 0;
    double seconds = 0.0;
    std::vector<GenerationStats> history;  // MGA only
};

MethodRun run_method(Method m, const Instance& inst, const CostWeights& weights, std::uint64_t seed,
                     const GaConfig& ga = {}, const ExactConfig& exact = {});

struct AvailabilityGrid {
    std::vector<std::size_t> failed_servers;  // empty: 0..servers_per_mec
    std::vector<BackupMode> modes{BackupMode::none, BackupMode::onsite, BackupMode::inter_mec};
    OnsiteMethod onsite = OnsiteMethod::disjoint_servers;
    std::size_t trials = 10'000;
    Method source = Method::mga;  // placement whose busiest MEC is failed
};

/**
 * Sweep description, read from JSON:
 *
 *   {"name": "desk", "topology": "data/germany50.txt", "mec_sites": 7, "site_seed": 1,
 *    "servers_per_mec": 10, "server_vcpu": 56, "mec_bandwidth_mbps": 10000,
 *    "fiber_us_per_km": 5, "weights": {...},
 *    "request_counts": [20, 40], "methods": ["mga", "greedy"], "seeds": [1, 2],
 *    "ga": {"population", "generations", "crossover_threshold", "mutation_threshold"},
 *    "exact": {"max_requests": 8, "node_cap": 5000000},
 *    "availability": {"failed_servers": [0, 1, 2], "modes": ["none", "onsite", "inter-mec"],
 *                     "onsite_method": 2, "trials": 10000, "source": "mga"},
 *    "output_dir": "out"}
 *
 * Every key except "topology" is optional. A relative topology path is
 * resolved against `base_dir` when the file exists there.
 */
struct ExperimentConfig {
    std::string name = "experiment";
    std::string topology;
    std::size_t mec_sites = 7;
    std::uint64_t site_seed = 1;
    SubstrateOptions substrate;
    double fiber_us_per_km = kDefaultMicrosPerKm;
    CostWeights weights;
    std::vector<std::size_t> request_counts{20, 40, 60, 80, 100};
    std::vector<Method> methods{Method::exact,     Method::exact_sc, Method::mga,
                                Method::greedy,    Method::nsp_proxy, Method::baseline};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    GaConfig ga;
    std::size_t exact_max_requests = 8;
    std::uint64_t exact_node_cap = 5'000'000;
    AvailabilityGrid availability;
    std::string output_dir = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

struct RunRecord {
    std::size_t requests = 0;
    std::uint64_t seed = 0;
    Method method = Method::greedy;
    std::string status;  // "ok", "node-cap", "skipped: scale" or "error: ..."
    EvaluationReport report;
    bool proven_optimal = false;
    double seconds = 0.0;
    std::string placement_file;  // relative to the experiment directory
};

struct AvailabilityRow {
    std::size_t requests = 0;
    BackupMode mode = BackupMode::none;
    std::size_t failed_servers = 0;
    std::size_t samples = 0;  // seeds contributing
    double mean = 0.0;
    double stddev = 0.0;
};

struct ExperimentResults {
    std::vector<RunRecord> runs;
    std::vector<AvailabilityRow> availability;
};

/// Computes every (count, seed, method) cell; writes nothing.
ExperimentResults run_sweep(const ExperimentConfig& cfg, std::ostream* log = nullptr,
                            std::map<std::string, std::string>* artifacts = nullptr);

/**
 * One CSV per figure keyed by file name: fig7.csv (cost), fig8.csv (MECs),
 * fig9.csv (servers), fig10.csv (availability by mode and k), fig11.csv
 * (throughput), plus summary.csv. Throws std::invalid_argument when there
 * is no completed run.
 */
std::map<std::string, std::string> emit_plot_data(const ExperimentResults& results);

std::string runs_csv(const ExperimentResults& results);
std::string timing_csv(const ExperimentResults& results);
std::string table2_csv(const ExperimentResults& results);

/// Runs the sweep and writes out/<name>/...; returns the experiment directory.
std::string run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace mecslice

#endif  // MECSLICE_EXPERIMENT_HPP
