// Independent reference implementations used only by the tests. None of
// these call into the library's solvers, packers or checkers; they work from
// the raw instance data.
#ifndef MECSLICE_TESTS_ORACLES_HPP
#define MECSLICE_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "mecslice/model.hpp"
#include "mecslice/topology.hpp"

namespace oracle {

using namespace mecslice;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::vector<std::vector<double>> floyd_warshall(const Network& net) {
    const std::size_t n = net.node_count();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
    for (const Link& l : net.links()) {
        d[l.a][l.b] = std::min(d[l.a][l.b], l.delay);
        d[l.b][l.a] = std::min(d[l.b][l.a], l.delay);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

// Smallest number of servers that can hold all items, by trying every
// assignment of items to servers. nullopt if no assignment fits.
inline std::optional<std::size_t> min_servers_bruteforce(const std::vector<int>& items, const std::vector<int>& caps) {
    const std::size_t n = items.size();
    const std::size_t S = caps.size();
    if (n == 0) return 0;
    std::optional<std::size_t> best;
    std::vector<std::size_t> assign(n, 0);
    while (true) {
        std::vector<int> load(S, 0);
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            load[assign[i]] += items[i];
            ok = load[assign[i]] <= caps[assign[i]];
        }
        if (ok) {
            const std::size_t used =
                static_cast<std::size_t>(std::count_if(load.begin(), load.end(), [](int l) { return l > 0; }));
            if (!best || used < *best) best = used;
        }
        std::size_t i = 0;
        while (i < n && ++assign[i] == S) assign[i++] = 0;
        if (i == n) break;
    }
    return best;
}

struct EnumResult {
    bool feasible = false;
    double cost = kInf;
};

/**
 * Exhaustive optimum: every combination of (primary, backup) MEC pairs, each
 * MEC's server count minimised by brute force over VNF-to-server
 * assignments. Latency, bandwidth and the cost terms are evaluated straight
 * from the instance fields.
 */
inline EnumResult exhaustive_optimum(const Instance& inst, const CostWeights& w, Connectivity mode) {
    const std::size_t R = inst.requests.size();
    const std::size_t M = inst.sites.size();
    auto reach = [&](const SliceRequest& r, NodeId from, std::size_t m) {
        double proc = 0.0;
        for (const Vnf& v : r.vnfs) proc += v.processing_delay;
        return inst.delays(from, inst.sites[m].host) + proc <= r.service.max_delay + 1e-9;
    };
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> options(R);
    for (std::size_t r = 0; r < R; ++r) {
        const auto& req = inst.requests[r];
        const NodeId from_b = mode == Connectivity::multi ? req.secondary : req.master;
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t b = 0; b < M; ++b)
                if (a != b && reach(req, req.master, a) && reach(req, from_b, b)) options[r].push_back({a, b});
        if (options[r].empty()) return {};
    }

    std::map<std::pair<std::size_t, std::vector<int>>, std::optional<std::size_t>> cache;
    EnumResult best;
    std::vector<std::size_t> choice(R, 0);
    while (true) {
        std::vector<std::vector<int>> items(M);
        std::vector<double> bw(M, 0.0);
        double traffic = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& req = inst.requests[r];
            const auto [a, b] = options[r][choice[r]];
            const NodeId from_b = mode == Connectivity::multi ? req.secondary : req.master;
            for (std::size_t m : {a, b}) {
                for (const Vnf& v : req.vnfs) items[m].push_back(v.vcpu);
                bw[m] += req.service.bandwidth;
            }
            traffic += req.service.bandwidth * (inst.delays(req.master, inst.sites[a].host) +
                                                inst.delays(from_b, inst.sites[b].host));
        }
        bool ok = true;
        std::size_t mecs = 0, servers = 0;
        for (std::size_t m = 0; m < M && ok; ++m) {
            if (items[m].empty()) continue;
            if (bw[m] > inst.sites[m].bandwidth + 1e-9) {
                ok = false;
                break;
            }
            std::sort(items[m].begin(), items[m].end());
            auto key = std::make_pair(m, items[m]);
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache.emplace(key, min_servers_bruteforce(items[m], inst.sites[m].server_capacity)).first;
            if (!it->second) {
                ok = false;
                break;
            }
            ++mecs;
            servers += *it->second;
        }
        if (ok) {
            const double cost = w.alpha_mec * w.mec_cost * static_cast<double>(mecs) +
                                w.alpha_server * w.server_cost * static_cast<double>(servers) +
                                w.alpha_traffic * w.traffic_cost * traffic;
            if (cost < best.cost) best = {true, cost};
        }
        std::size_t r = 0;
        while (r < R && ++choice[r] == options[r].size()) choice[r++] = 0;
        if (r == R) break;
    }
    return best;
}

// Cost terms recomputed from the raw per-VNF assignment.
struct RawCost {
    std::size_t mecs = 0;
    std::size_t servers = 0;
    double traffic = 0.0;
};

inline RawCost recount(const Placement& p, const Instance& inst) {
    std::set<std::size_t> mecs;
    std::set<std::pair<std::size_t, std::size_t>> servers;
    RawCost c;
    for (std::size_t r = 0; r < p.request_count(); ++r) {
        if (!p.at(r)) continue;
        const auto& rp = *p.at(r);
        const auto& req = inst.requests[r];
        for (const SliceMapping* sm : {&rp.primary, &rp.backup}) {
            mecs.insert(sm->mec);
            for (std::size_t s : sm->servers) servers.insert({sm->mec, s});
        }
        const NodeId from_b = p.mode() == Connectivity::multi ? req.secondary : req.master;
        c.traffic += req.service.bandwidth * (inst.delays(req.master, inst.sites[rp.primary.mec].host) +
                                              inst.delays(from_b, inst.sites[rp.backup.mec].host));
    }
    c.mecs = mecs.size();
    c.servers = servers.size();
    return c;
}

// Feasibility of the admitted requests judged directly from loads and delays.
inline bool feasible(const Placement& p, const Instance& inst) {
    if (p.request_count() != inst.requests.size()) return false;
    const std::size_t M = inst.sites.size();
    std::vector<std::vector<int>> load(M);
    std::vector<double> bw(M, 0.0);
    for (std::size_t m = 0; m < M; ++m) load[m].assign(inst.sites[m].server_count(), 0);
    for (std::size_t r = 0; r < p.request_count(); ++r) {
        if (!p.at(r)) continue;
        const auto& rp = *p.at(r);
        const auto& req = inst.requests[r];
        if (rp.primary.mec == rp.backup.mec) return false;
        double proc = 0.0;
        for (const Vnf& v : req.vnfs) proc += v.processing_delay;
        const NodeId from_b = p.mode() == Connectivity::multi ? req.secondary : req.master;
        if (rp.primary.mec >= M || rp.backup.mec >= M) return false;
        if (inst.delays(req.master, inst.sites[rp.primary.mec].host) + proc > req.service.max_delay + 1e-9) return false;
        if (inst.delays(from_b, inst.sites[rp.backup.mec].host) + proc > req.service.max_delay + 1e-9) return false;
        for (const SliceMapping* sm : {&rp.primary, &rp.backup}) {
            if (sm->servers.size() != req.vnfs.size()) return false;
            for (std::size_t v = 0; v < req.vnfs.size(); ++v) {
                if (sm->servers[v] >= load[sm->mec].size()) return false;
                load[sm->mec][sm->servers[v]] += req.vnfs[v].vcpu;
            }
            bw[sm->mec] += req.service.bandwidth;
        }
    }
    for (std::size_t m = 0; m < M; ++m) {
        if (bw[m] > inst.sites[m].bandwidth + 1e-9) return false;
        for (std::size_t s = 0; s < load[m].size(); ++s)
            if (load[m][s] > inst.sites[m].server_capacity[s]) return false;
    }
    return true;
}

struct ToyOptions {
    std::size_t max_requests = 4;
    std::size_t max_sites = 3;
    std::size_t servers = 2;
    int vcpu = 8;
    int max_vnfs = 3;
    int max_vnf_vcpu = 4;
};

// Small random instance on a random metric over 6 nodes. Budgets are drawn
// so that some requests are tight and a few are unplaceable.
inline Instance toy_instance(std::uint64_t seed, const ToyOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    const std::size_t N = 6;
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(N);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    Instance inst;
    inst.delays = DelayMatrix(N);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b)
            inst.delays(a, b) = 2.0 * std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
    const std::size_t M = std::uniform_int_distribution<std::size_t>(2, opt.max_sites)(rng);
    std::vector<std::size_t> hosts(N);
    for (std::size_t i = 0; i < N; ++i) hosts[i] = i;
    std::shuffle(hosts.begin(), hosts.end(), rng);
    for (std::size_t m = 0; m < M; ++m) inst.sites.push_back(make_site(hosts[m], opt.servers, opt.vcpu, 600.0));
    const std::size_t R = std::uniform_int_distribution<std::size_t>(1, opt.max_requests)(rng);
    const double bws[] = {50.0, 100.0, 200.0, 250.0};
    for (std::size_t r = 0; r < R; ++r) {
        SliceRequest req;
        req.id = static_cast<int>(r);
        req.master = std::uniform_int_distribution<std::size_t>(0, N - 1)(rng);
        do req.secondary = std::uniform_int_distribution<std::size_t>(0, N - 1)(rng);
        while (req.secondary == req.master);
        req.service = ServiceType{"toy", bws[rng() % 4], std::uniform_real_distribution<double>(0.8, 3.0)(rng)};
        const int nv = std::uniform_int_distribution<int>(1, opt.max_vnfs)(rng);
        for (int v = 0; v < nv; ++v) req.vnfs.push_back({std::uniform_int_distribution<int>(1, opt.max_vnf_vcpu)(rng), 0.05});
        inst.requests.push_back(req);
    }
    return inst;
}

}  // namespace oracle

#endif  // MECSLICE_TESTS_ORACLES_HPP
