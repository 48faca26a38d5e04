#include "mecslice/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace mecslice {

namespace {

// Delay sums come from Dijkstra; compare budgets with a little slack.
constexpr double kDelaySlack = 1e-9;

bool within_budget(Millis delay, Millis budget) { return delay <= budget + kDelaySlack; }

}  // namespace

const std::array<ServiceType, 4>& standard_services() {
    static const std::array<ServiceType, 4> services{{
        {"AR/VR", 200.0, 2.0},
        {"V2X", 100.0, 3.0},
        {"e-health", 50.0, 5.0},
        {"8K TV and Gaming", 250.0, 10.0},
    }};
    return services;
}

int SliceRequest::total_vcpu() const {
    return std::accumulate(vnfs.begin(), vnfs.end(), 0, [](int acc, const Vnf& v) { return acc + v.vcpu; });
}

Millis SliceRequest::processing_delay() const {
    return std::accumulate(vnfs.begin(), vnfs.end(), 0.0,
                           [](Millis acc, const Vnf& v) { return acc + v.processing_delay; });
}

int MecSite::total_capacity() const { return std::accumulate(server_capacity.begin(), server_capacity.end(), 0); }

int MecSite::max_server_capacity() const {
    return server_capacity.empty() ? 0 : *std::max_element(server_capacity.begin(), server_capacity.end());
}

MecSite make_site(NodeId host, std::size_t servers, int vcpu_per_server, Mbps bandwidth) {
    return MecSite{host, std::vector<int>(servers, vcpu_per_server), bandwidth};
}

const char* to_string(Connectivity mode) { return mode == Connectivity::multi ? "mc" : "sc"; }

std::vector<std::size_t> Placement::rejected() const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < requests_.size(); ++r)
        if (!requests_[r]) out.push_back(r);
    return out;
}

std::size_t Placement::admitted_count() const {
    return static_cast<std::size_t>(
        std::count_if(requests_.begin(), requests_.end(), [](const auto& rp) { return rp.has_value(); }));
}

bool Placement::mec_used(std::size_t m) const {
    return std::any_of(requests_.begin(), requests_.end(), [m](const auto& rp) {
        return rp && (rp->primary.mec == m || rp->backup.mec == m);
    });
}

bool Placement::server_active(std::size_t m, std::size_t s) const {
    auto hosts = [m, s](const SliceMapping& sm) {
        return sm.mec == m && std::find(sm.servers.begin(), sm.servers.end(), s) != sm.servers.end();
    };
    return std::any_of(requests_.begin(), requests_.end(),
                       [&](const auto& rp) { return rp && (hosts(rp->primary) || hosts(rp->backup)); });
}

bool Placement::primary_served_by(std::size_t r, std::size_t m) const {
    const auto& rp = requests_.at(r);
    return rp && rp->primary.mec == m;
}

bool Placement::backup_served_by(std::size_t r, std::size_t m) const {
    const auto& rp = requests_.at(r);
    return rp && rp->backup.mec == m;
}

bool Placement::primary_vnf_on(std::size_t r, std::size_t v, std::size_t m, std::size_t s) const {
    const auto& rp = requests_.at(r);
    return rp && rp->primary.mec == m && v < rp->primary.servers.size() && rp->primary.servers[v] == s;
}

bool Placement::backup_vnf_on(std::size_t r, std::size_t v, std::size_t m, std::size_t s) const {
    const auto& rp = requests_.at(r);
    return rp && rp->backup.mec == m && v < rp->backup.servers.size() && rp->backup.servers[v] == s;
}

std::vector<std::size_t> Placement::used_mecs() const {
    std::set<std::size_t> used;
    for (const auto& rp : requests_)
        if (rp) {
            used.insert(rp->primary.mec);
            used.insert(rp->backup.mec);
        }
    return {used.begin(), used.end()};
}

std::vector<std::pair<std::size_t, std::size_t>> Placement::active_servers() const {
    std::set<std::pair<std::size_t, std::size_t>> active;
    for (const auto& rp : requests_)
        if (rp)
            for (const SliceMapping* sm : {&rp->primary, &rp->backup})
                for (std::size_t s : sm->servers) active.insert({sm->mec, s});
    return {active.begin(), active.end()};
}

NodeId backup_attachment(const SliceRequest& r, Connectivity mode) {
    return mode == Connectivity::multi ? r.secondary : r.master;
}

Millis e2e_delay(const SliceRequest& r, NodeId attachment, const MecSite& site, const DelayMatrix& delays) {
    return delays(attachment, site.host) + r.processing_delay();
}

std::string Violation::to_string() const {
    std::string out = constraint == 0 ? std::string("structure") : "constraint " + std::to_string(constraint);
    if (request) out += " request " + std::to_string(*request);
    if (mec) out += " mec " + std::to_string(*mec);
    if (server) out += " server " + std::to_string(*server);
    return out + ": " + message;
}

std::vector<Violation> check_feasibility(const Placement& p, const Instance& inst) {
    std::vector<Violation> out;
    if (p.request_count() != inst.requests.size()) {
        out.push_back({0, {}, {}, {},
                       "placement covers " + std::to_string(p.request_count()) + " requests, instance has " +
                           std::to_string(inst.requests.size())});
        return out;
    }
    const std::size_t sites = inst.sites.size();
    std::vector<std::vector<long>> load(sites);
    for (std::size_t m = 0; m < sites; ++m) load[m].assign(inst.sites[m].server_count(), 0);
    std::vector<double> bandwidth(sites, 0.0);
    std::vector<bool> slice_hosted(sites, false);

    for (std::size_t r = 0; r < p.request_count(); ++r) {
        const auto& rp = p.at(r);
        if (!rp) continue;
        const SliceRequest& req = inst.requests[r];
        struct Slice {
            const SliceMapping* map;
            NodeId attachment;
            int anchor;  // constraint ids differ for primary and backup
            int latency;
            int mapping;
            const char* role;
        };
        const Slice slices[2] = {
            {&rp->primary, req.master, 12, 15, 17, "primary"},
            {&rp->backup, backup_attachment(req, p.mode()), 13, 16, 18, "backup"},
        };
        bool both_known = true;
        for (const auto& sl : slices) {
            const std::size_t m = sl.map->mec;
            if (m >= sites) {
                out.push_back({sl.anchor, r, m, {}, std::string(sl.role) + " slice assigned to unknown MEC"});
                both_known = false;
                continue;
            }
            const MecSite& site = inst.sites[m];
            slice_hosted[m] = true;
            bandwidth[m] += req.service.bandwidth;
            const Millis delay = e2e_delay(req, sl.attachment, site, inst.delays);
            if (!within_budget(delay, req.service.max_delay))
                out.push_back({sl.latency, r, m, {},
                               std::string(sl.role) + " e2e delay " + std::to_string(delay) + " ms exceeds budget " +
                                   std::to_string(req.service.max_delay) + " ms"});
            if (sl.map->servers.size() != req.vnfs.size()) {
                out.push_back({sl.mapping, r, m, {},
                               std::string(sl.role) + " slice maps " + std::to_string(sl.map->servers.size()) +
                                   " of " + std::to_string(req.vnfs.size()) + " VNFs"});
            }
            const std::size_t mapped = std::min(sl.map->servers.size(), req.vnfs.size());
            for (std::size_t v = 0; v < mapped; ++v) {
                const std::size_t s = sl.map->servers[v];
                if (s >= site.server_count()) {
                    out.push_back({sl.mapping, r, m, s,
                                   std::string(sl.role) + " VNF " + std::to_string(v) + " mapped outside the MEC"});
                    continue;
                }
                load[m][s] += req.vnfs[v].vcpu;
            }
        }
        if (both_known && rp->primary.mec == rp->backup.mec)
            out.push_back({14, r, rp->primary.mec, {}, "primary and backup slices share one MEC"});
    }

    for (std::size_t m = 0; m < sites; ++m) {
        const MecSite& site = inst.sites[m];
        std::size_t active = 0;
        for (std::size_t s = 0; s < site.server_count(); ++s) {
            if (load[m][s] > 0) ++active;
            if (load[m][s] > site.server_capacity[s])
                out.push_back({11, {}, m, s,
                               "load " + std::to_string(load[m][s]) + " vCPU exceeds capacity " +
                                   std::to_string(site.server_capacity[s])});
        }
        const double q = slice_hosted[m] ? 1.0 : 0.0;
        if (bandwidth[m] > site.bandwidth * q + 1e-9)
            out.push_back({19, {}, m, {},
                           "bandwidth " + std::to_string(bandwidth[m]) + " Mbps exceeds " +
                               std::to_string(site.bandwidth * q) + " Mbps"});
        if (static_cast<double>(active) > static_cast<double>(site.server_count()) * q)
            out.push_back({20, {}, m, {}, "servers active in an unused MEC"});
    }
    return out;
}

InfeasiblePlacement::InfeasiblePlacement(std::vector<Violation> violations)
    : std::runtime_error([&] {
          std::string msg = "infeasible placement (" + std::to_string(violations.size()) + " violations)";
          if (!violations.empty()) msg += ": " + violations.front().to_string();
          return msg;
      }()),
      violations_(std::move(violations)) {}

CostBreakdown cost_breakdown(const Placement& p, const Instance& inst, const CostWeights& w) {
    CostBreakdown c;
    std::size_t mecs = 0;
    for (std::size_t m : p.used_mecs())
        if (m < inst.sites.size()) ++mecs;
    c.mec = w.mec_cost * static_cast<double>(mecs);
    c.server = w.server_cost * static_cast<double>(p.active_servers().size());
    double traffic = 0.0;
    for (std::size_t r = 0; r < p.request_count() && r < inst.requests.size(); ++r) {
        const auto& rp = p.at(r);
        if (!rp || rp->primary.mec >= inst.sites.size() || rp->backup.mec >= inst.sites.size()) continue;
        traffic += pair_traffic(inst, r, {rp->primary.mec, rp->backup.mec}, p.mode());
    }
    c.traffic = w.traffic_cost * traffic;
    c.total = w.alpha_mec * c.mec + w.alpha_server * c.server + w.alpha_traffic * c.traffic;
    return c;
}

CostBreakdown total_cost(const Placement& p, const Instance& inst, const CostWeights& w) {
    auto violations = check_feasibility(p, inst);
    if (!violations.empty()) throw InfeasiblePlacement(std::move(violations));
    return cost_breakdown(p, inst, w);
}

bool slice_fits_site(const SliceRequest& r, const MecSite& site) {
    const int largest = site.max_server_capacity();
    for (const auto& v : r.vnfs)
        if (v.vcpu > largest) return false;
    return r.total_vcpu() <= site.total_capacity() && r.service.bandwidth <= site.bandwidth;
}

std::vector<MecPair> candidate_pairs(const Instance& inst, std::size_t r, Connectivity mode) {
    const SliceRequest& req = inst.requests.at(r);
    const NodeId backup_from = backup_attachment(req, mode);
    std::vector<bool> primary_ok(inst.sites.size()), backup_ok(inst.sites.size());
    for (std::size_t m = 0; m < inst.sites.size(); ++m) {
        const MecSite& site = inst.sites[m];
        const bool fits = slice_fits_site(req, site);
        primary_ok[m] = fits && within_budget(e2e_delay(req, req.master, site, inst.delays), req.service.max_delay);
        backup_ok[m] = fits && within_budget(e2e_delay(req, backup_from, site, inst.delays), req.service.max_delay);
    }
    std::vector<MecPair> pairs;
    for (std::size_t a = 0; a < inst.sites.size(); ++a)
        for (std::size_t b = 0; b < inst.sites.size(); ++b)
            if (a != b && primary_ok[a] && backup_ok[b]) pairs.push_back({a, b});
    return pairs;
}

double pair_traffic(const Instance& inst, std::size_t r, MecPair pair, Connectivity mode) {
    const SliceRequest& req = inst.requests[r];
    const Millis dp = inst.delays(req.master, inst.sites[pair.primary].host);
    const Millis db = inst.delays(backup_attachment(req, mode), inst.sites[pair.backup].host);
    return (dp + db) * req.service.bandwidth;
}

NodeId nearest_other_node(const DelayMatrix& delays, NodeId node) {
    if (delays.size() < 2) throw std::invalid_argument("need at least two nodes for dual attachment");
    std::optional<NodeId> best;
    for (NodeId m = 0; m < delays.size(); ++m) {
        if (m == node) continue;
        if (!best || delays(node, m) < delays(node, *best)) best = m;
    }
    return *best;
}

std::vector<SliceRequest> generate_requests(std::size_t n, const DelayMatrix& delays, std::uint64_t seed,
                                            const RequestGenerationOptions& options) {
    std::vector<SliceRequest> out;
    if (n == 0) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<NodeId> pick_node(0, delays.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_service(0, standard_services().size() - 1);
    std::uniform_int_distribution<int> pick_count(options.min_vnfs, options.max_vnfs);
    std::uniform_int_distribution<int> pick_vcpu(options.min_vcpu, options.max_vcpu);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SliceRequest r;
        r.id = static_cast<int>(i);
        r.master = pick_node(rng);
        r.secondary = nearest_other_node(delays, r.master);
        r.service = standard_services()[pick_service(rng)];
        const int count = pick_count(rng);
        for (int v = 0; v < count; ++v) r.vnfs.push_back(Vnf{pick_vcpu(rng), options.vnf_processing_delay});
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace mecslice
