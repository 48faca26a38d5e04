#ifndef MECSLICE_MODEL_HPP
#define MECSLICE_MODEL_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecslice/topology.hpp"

namespace mecslice {

using Mbps = double;

struct ServiceType {
    std::string name;
    Mbps bandwidth = 0.0;
    Millis max_delay = 0.0;

    friend bool operator==(const ServiceType&, const ServiceType&) = default;
};

/// AR/VR, V2X, e-health, 8K TV and Gaming.
const std::array<ServiceType, 4>& standard_services();

struct Vnf {
    int vcpu = 1;
    Millis processing_delay = 0.05;

    friend bool operator==(const Vnf&, const Vnf&) = default;
};

struct SliceRequest {
    int id = 0;
    std::vector<Vnf> vnfs;
    NodeId master = 0;
    NodeId secondary = 0;
    ServiceType service;

    int total_vcpu() const;
    Millis processing_delay() const;

    friend bool operator==(const SliceRequest&, const SliceRequest&) = default;
};

struct MecSite {
    NodeId host = 0;
    std::vector<int> server_capacity;
    Mbps bandwidth = 10'000.0;

    std::size_t server_count() const noexcept { return server_capacity.size(); }
    int total_capacity() const;
    int max_server_capacity() const;

    friend bool operator==(const MecSite&, const MecSite&) = default;
};

MecSite make_site(NodeId host, std::size_t servers = 10, int vcpu_per_server = 56, Mbps bandwidth = 10'000.0);

struct CostWeights {
    double mec_cost = 100.0;
    double server_cost = 10.0;
    double traffic_cost = 1.0;  // per Mbps*ms
    double alpha_mec = 1.0;
    double alpha_server = 1.0;
    double alpha_traffic = 1.0;

    friend bool operator==(const CostWeights&, const CostWeights&) = default;
};

/// Multi-connectivity reaches the backup slice through the secondary base
/// station; single connectivity reaches both slices through the master.
enum class Connectivity { multi, single };

const char* to_string(Connectivity mode);

struct Instance {
    DelayMatrix delays;
    std::vector<MecSite> sites;
    std::vector<SliceRequest> requests;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// VNF i of the slice runs on servers[i] of site `mec`.
struct SliceMapping {
    std::size_t mec = 0;
    std::vector<std::size_t> servers;

    friend bool operator==(const SliceMapping&, const SliceMapping&) = default;
};

struct RequestPlacement {
    SliceMapping primary;
    SliceMapping backup;

    friend bool operator==(const RequestPlacement&, const RequestPlacement&) = default;
};

/**
 * Complete assignment of primary and backup slices.
 *
 * Entry r corresponds to instance.requests[r]. A request without an entry
 * was rejected by the solver that produced the placement. The BIP decision
 * variables are exposed as indicator accessors.
 */
class Placement {
public:
    Placement() = default;
    Placement(Connectivity mode, std::size_t request_count) : mode_(mode), requests_(request_count) {}

    Connectivity mode() const noexcept { return mode_; }
    std::size_t request_count() const noexcept { return requests_.size(); }

    const std::optional<RequestPlacement>& at(std::size_t r) const { return requests_.at(r); }
    bool admitted(std::size_t r) const { return requests_.at(r).has_value(); }
    void assign(std::size_t r, RequestPlacement rp) { requests_.at(r) = std::move(rp); }
    void reject(std::size_t r) { requests_.at(r).reset(); }
    std::vector<std::size_t> rejected() const;
    std::size_t admitted_count() const;

    // q_m
    bool mec_used(std::size_t m) const;
    // u_ms
    bool server_active(std::size_t m, std::size_t s) const;
    // w^m_{n1 r}
    bool primary_served_by(std::size_t r, std::size_t m) const;
    // x^m_{n2 r}
    bool backup_served_by(std::size_t r, std::size_t m) const;
    // y^{msv}_{n1 r}
    bool primary_vnf_on(std::size_t r, std::size_t v, std::size_t m, std::size_t s) const;
    // z^{msv}_{n2 r}
    bool backup_vnf_on(std::size_t r, std::size_t v, std::size_t m, std::size_t s) const;

    std::vector<std::size_t> used_mecs() const;
    std::vector<std::pair<std::size_t, std::size_t>> active_servers() const;

    friend bool operator==(const Placement&, const Placement&) = default;

private:
    Connectivity mode_ = Connectivity::multi;
    std::vector<std::optional<RequestPlacement>> requests_;
};

/// The base station from which the backup slice is reached.
NodeId backup_attachment(const SliceRequest& r, Connectivity mode);

/// Propagation from `attachment` to the site plus the summed VNF processing delay.
Millis e2e_delay(const SliceRequest& r, NodeId attachment, const MecSite& site, const DelayMatrix& delays);

struct Violation {
    int constraint = 0;  // BIP constraint number, 11..20; 0 for structural problems
    std::optional<std::size_t> request;
    std::optional<std::size_t> mec;
    std::optional<std::size_t> server;
    std::string message;

    std::string to_string() const;
};

/**
 * Full check of every placement constraint over the admitted requests.
 * Violations are collected exhaustively; an empty result means feasible.
 */
std::vector<Violation> check_feasibility(const Placement& p, const Instance& inst);

struct CostBreakdown {
    double mec = 0.0;      // MC
    double server = 0.0;   // SC
    double traffic = 0.0;  // TC
    double total = 0.0;    // weighted sum
};

class InfeasiblePlacement : public std::runtime_error {
public:
    explicit InfeasiblePlacement(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Objective terms without a feasibility pre-check.
CostBreakdown cost_breakdown(const Placement& p, const Instance& inst, const CostWeights& w);

/// Objective terms; throws InfeasiblePlacement if check_feasibility reports anything.
CostBreakdown total_cost(const Placement& p, const Instance& inst, const CostWeights& w);

struct MecPair {
    std::size_t primary = 0;
    std::size_t backup = 0;

    friend bool operator==(const MecPair&, const MecPair&) = default;
};

/// Whether a lone slice of `r` could be hosted at `site` (per-VNF, total vCPU and bandwidth).
bool slice_fits_site(const SliceRequest& r, const MecSite& site);

/// Ordered pairs of distinct sites meeting both latency budgets and slice_fits_site().
std::vector<MecPair> candidate_pairs(const Instance& inst, std::size_t r, Connectivity mode);

/// Forwarding-cost contribution (before c_tc and alpha) of a pair.
double pair_traffic(const Instance& inst, std::size_t r, MecPair pair, Connectivity mode);

struct RequestGenerationOptions {
    int min_vnfs = 2;
    int max_vnfs = 5;
    int min_vcpu = 1;
    int max_vcpu = 4;
    Millis vnf_processing_delay = 0.05;
};

/**
 * Draws n requests: master uniform over nodes, secondary the nearest other
 * node by delay (ties to lowest id), service type uniform over
 * standard_services(), VNF count and per-VNF vCPU uniform in their ranges.
 */
std::vector<SliceRequest> generate_requests(std::size_t n, const DelayMatrix& delays, std::uint64_t seed,
                                            const RequestGenerationOptions& options = {});

NodeId nearest_other_node(const DelayMatrix& delays, NodeId node);

}  // namespace mecslice

#endif  // MECSLICE_MODEL_HPP
