#include "mecslice/solver_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "mecslice/packing.hpp"

namespace mecslice {

NoFeasiblePlacement diagnose_unplaceable(const Instance& inst, std::size_t r, Connectivity mode) {
    const SliceRequest& req = inst.requests.at(r);
    const std::string who = "request " + std::to_string(req.id);
    bool any_fit = false, any_bandwidth = false, any_primary = false, any_backup = false;
    for (const auto& site : inst.sites) {
        const bool fits = slice_fits_site(req, site);
        any_fit |= fits;
        any_bandwidth |= req.service.bandwidth <= site.bandwidth;
        if (!fits) continue;
        const bool p = e2e_delay(req, req.master, site, inst.delays) <= req.service.max_delay + 1e-9;
        const bool b =
            e2e_delay(req, backup_attachment(req, mode), site, inst.delays) <= req.service.max_delay + 1e-9;
        any_primary |= p;
        any_backup |= b;
    }
    if (!any_bandwidth) return {r, 19, who + ": bandwidth exceeds every MEC facility (constraint 19)"};
    if (!any_fit) return {r, 11, who + ": slice does not fit into any MEC (constraint 11)"};
    if (!any_primary) return {r, 15, who + ": no MEC meets the primary latency budget (constraint 15)"};
    if (!any_backup) return {r, 16, who + ": no MEC meets the backup latency budget (constraint 16)"};
    return {r, 14, who + ": no two distinct MECs meet the latency budgets (constraint 14)"};
}

namespace {

using Key = std::vector<std::size_t>;

class BranchAndBound {
public:
    BranchAndBound(const Instance& inst, const CostWeights& w, const ExactConfig& cfg)
        : inst_(inst), cfg_(cfg), sites_(inst.sites.size()), wm_(w.alpha_mec * w.mec_cost),
          ws_(w.alpha_server * w.server_cost), wt_(w.alpha_traffic * w.traffic_cost) {
        const std::size_t n = inst.requests.size();
        pairs_.resize(n);
        traffic_.resize(n);
        for (std::size_t r = 0; r < n; ++r) {
            pairs_[r] = candidate_pairs(inst, r, cfg.mode);
            if (pairs_[r].empty()) throw diagnose_unplaceable(inst, r, cfg.mode);
            // Under single connectivity (a, b) and (b, a) carry the same traffic and
            // the same per-MEC content, and the tie-break prefers a < b.
            if (cfg.mode == Connectivity::single)
                std::erase_if(pairs_[r], [](const MecPair& p) { return p.primary > p.backup; });
            for (const auto& pr : pairs_[r]) traffic_[r].push_back(wt_ * pair_traffic(inst, r, pr, cfg.mode));
        }
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            if (pairs_[a].size() != pairs_[b].size()) return pairs_[a].size() < pairs_[b].size();
            return inst.requests[a].total_vcpu() > inst.requests[b].total_vcpu();
        });
        suffix_traffic_.assign(n + 1, 0.0);
        for (std::size_t d = n; d-- > 0;) {
            const auto& t = traffic_[order_[d]];
            suffix_traffic_[d] = suffix_traffic_[d + 1] + *std::min_element(t.begin(), t.end());
        }
        caps_sorted_.resize(sites_);
        for (std::size_t m = 0; m < sites_; ++m) {
            caps_sorted_[m] = inst.sites[m].server_capacity;
            std::sort(caps_sorted_[m].rbegin(), caps_sorted_[m].rend());
        }
        items_.resize(sites_);
        load_.assign(sites_, 0);
        bandwidth_.assign(sites_, 0.0);
        slices_.assign(sites_, 0);
        choice_.assign(n, 0);
    }

    ExactResult run() {
        search(0, 0.0);
        ExactResult result;
        result.nodes = nodes_;
        result.proven_optimal = !aborted_;
        if (!best_choice_) {
            if (aborted_)
                throw NoFeasiblePlacement(std::nullopt, 11,
                                          "node cap reached before any feasible placement was found");
            throw NoFeasiblePlacement(std::nullopt, 11, "no combination of MEC pairs satisfies the server capacities");
        }
        result.placement = build(*best_choice_);
        if (cfg_.trace)
            *cfg_.trace << "exact done nodes=" << nodes_ << " best=" << best_cost_
                        << " proven=" << (result.proven_optimal ? 1 : 0) << "\n";
        return result;
    }

private:
    std::size_t servers_lower_bound(std::size_t m, long load) const {
        std::size_t count = 0;
        long covered = 0;
        const auto& caps = caps_sorted_[m];
        while (covered < load && count < caps.size()) covered += caps[count++];
        return covered < load ? caps.size() + 1 : count;
    }

    double partial_cost() const {
        double cost = 0.0;
        for (std::size_t m = 0; m < sites_; ++m)
            if (slices_[m] > 0) cost += wm_ + ws_ * static_cast<double>(servers_lower_bound(m, load_[m]));
        return cost;
    }

    // Every remaining request needs a pair; at least the worst-off one has to
    // open as many new MECs as its cheapest option in that respect.
    double remaining_mec_bound(std::size_t depth) const {
        std::size_t need = 0;
        for (std::size_t d = depth; d < order_.size() && need < 2; ++d) {
            std::size_t best = 2;
            for (const auto& pr : pairs_[order_[d]]) {
                const std::size_t fresh = (slices_[pr.primary] == 0) + (slices_[pr.backup] == 0);
                best = std::min(best, fresh);
                if (best == 0) break;
            }
            need = std::max(need, best);
        }
        return wm_ * static_cast<double>(need);
    }

    bool prune(double bound) const {
        if (!best_choice_) return false;
        const double slack = 1e-9 * std::max(1.0, std::abs(best_cost_));
        return bound > best_cost_ - cfg_.tolerance * std::abs(best_cost_) + slack;
    }

    void push(std::size_t m, const SliceRequest& req) {
        for (const auto& v : req.vnfs) items_[m].push_back(v.vcpu);
        load_[m] += req.total_vcpu();
        bandwidth_[m] += req.service.bandwidth;
        ++slices_[m];
    }
    void pop(std::size_t m, const SliceRequest& req) {
        items_[m].resize(items_[m].size() - req.vnfs.size());
        load_[m] -= req.total_vcpu();
        bandwidth_[m] -= req.service.bandwidth;
        --slices_[m];
    }
    bool fits(std::size_t m, const SliceRequest& req) const {
        const MecSite& site = inst_.sites[m];
        return load_[m] + req.total_vcpu() <= site.total_capacity() &&
               bandwidth_[m] + req.service.bandwidth <= site.bandwidth + 1e-9;
    }

    void search(std::size_t depth, double traffic) {
        if (aborted_) return;
        if (++nodes_ > cfg_.node_cap) {
            aborted_ = true;
            return;
        }
        if (cfg_.trace && nodes_ % 1'000'000 == 0)
            *cfg_.trace << "exact progress nodes=" << nodes_ << " depth=" << depth << " best=" << best_cost_ << "\n";
        if (depth == order_.size()) {
            leaf(traffic);
            return;
        }
        const std::size_t r = order_[depth];
        const SliceRequest& req = inst_.requests[r];

        struct Option {
            double increment;
            std::size_t index;
        };
        std::vector<Option> options;
        options.reserve(pairs_[r].size());
        for (std::size_t i = 0; i < pairs_[r].size(); ++i) {
            const auto& pr = pairs_[r][i];
            if (!fits(pr.primary, req) || !fits(pr.backup, req)) continue;
            double inc = traffic_[r][i];
            for (std::size_t m : {pr.primary, pr.backup}) {
                if (slices_[m] == 0) inc += wm_;
                inc += ws_ * static_cast<double>(servers_lower_bound(m, load_[m] + req.total_vcpu()) -
                                                 servers_lower_bound(m, load_[m]));
            }
            options.push_back({inc, i});
        }
        std::stable_sort(options.begin(), options.end(),
                         [](const Option& a, const Option& b) { return a.increment < b.increment; });

        for (const auto& opt : options) {
            const auto& pr = pairs_[r][opt.index];
            push(pr.primary, req);
            push(pr.backup, req);
            const double t = traffic + traffic_[r][opt.index];
            const double bound = partial_cost() + t + suffix_traffic_[depth + 1] + remaining_mec_bound(depth + 1);
            if (!prune(bound)) {
                choice_[r] = opt.index;
                search(depth + 1, t);
            }
            pop(pr.backup, req);
            pop(pr.primary, req);
            if (aborted_) return;
        }
    }

    std::optional<std::size_t> exact_servers(std::size_t m) {
        std::vector<int> key = items_[m];
        std::sort(key.begin(), key.end());
        key.push_back(-static_cast<int>(m) - 1);
        auto it = packing_cache_.find(key);
        if (it != packing_cache_.end()) return it->second;
        std::optional<std::size_t> result;
        if (auto packed = pack_min_servers(items_[m], inst_.sites[m].server_capacity)) result = servers_used(*packed);
        packing_cache_.emplace(std::move(key), result);
        return result;
    }

    Key tie_key() const {
        Key key;
        for (std::size_t m = 0; m < sites_; ++m)
            if (slices_[m] > 0) key.push_back(m);
        key.push_back(std::numeric_limits<std::size_t>::max());
        for (std::size_t r = 0; r < choice_.size(); ++r) {
            const auto& pr = pairs_[r][choice_[r]];
            key.push_back(pr.primary);
            key.push_back(pr.backup);
        }
        return key;
    }

    void leaf(double traffic) {
        double cost = traffic;
        for (std::size_t m = 0; m < sites_; ++m) {
            if (slices_[m] == 0) continue;
            auto servers = exact_servers(m);
            if (!servers) return;
            cost += wm_ + ws_ * static_cast<double>(*servers);
        }
        bool better = !best_choice_;
        if (!better) {
            const double slack = 1e-9 * std::max(1.0, std::abs(best_cost_));
            if (cost < best_cost_ - slack)
                better = true;
            else if (cost <= best_cost_ + slack)
                better = tie_key() < best_key_;
        }
        if (!better) return;
        best_cost_ = cost;
        best_choice_ = choice_;
        best_key_ = tie_key();
        if (cfg_.trace) *cfg_.trace << "exact incumbent nodes=" << nodes_ << " cost=" << cost << "\n";
    }

    Placement build(const std::vector<std::size_t>& choice) const {
        Placement p(cfg_.mode, inst_.requests.size());
        struct Owner {
            std::size_t request;
            bool backup;
            std::size_t vnf;
        };
        std::vector<std::vector<int>> items(sites_);
        std::vector<std::vector<Owner>> owners(sites_);
        std::vector<RequestPlacement> rps(inst_.requests.size());
        for (std::size_t r = 0; r < inst_.requests.size(); ++r) {
            const auto& pr = pairs_[r][choice[r]];
            const auto& req = inst_.requests[r];
            rps[r].primary = {pr.primary, std::vector<std::size_t>(req.vnfs.size())};
            rps[r].backup = {pr.backup, std::vector<std::size_t>(req.vnfs.size())};
            for (std::size_t v = 0; v < req.vnfs.size(); ++v) {
                items[pr.primary].push_back(req.vnfs[v].vcpu);
                owners[pr.primary].push_back({r, false, v});
                items[pr.backup].push_back(req.vnfs[v].vcpu);
                owners[pr.backup].push_back({r, true, v});
            }
        }
        for (std::size_t m = 0; m < sites_; ++m) {
            if (items[m].empty()) continue;
            auto packed = pack_min_servers(items[m], inst_.sites[m].server_capacity);
            for (std::size_t i = 0; i < owners[m].size(); ++i) {
                const Owner& o = owners[m][i];
                auto& slot = o.backup ? rps[o.request].backup : rps[o.request].primary;
                slot.servers[o.vnf] = (*packed)[i];
            }
        }
        for (std::size_t r = 0; r < rps.size(); ++r) p.assign(r, std::move(rps[r]));
        return p;
    }

    const Instance& inst_;
    const ExactConfig& cfg_;
    const std::size_t sites_;
    const double wm_, ws_, wt_;

    std::vector<std::vector<MecPair>> pairs_;
    std::vector<std::vector<double>> traffic_;
    std::vector<std::size_t> order_;
    std::vector<double> suffix_traffic_;
    std::vector<std::vector<int>> caps_sorted_;

    std::vector<std::vector<int>> items_;
    std::vector<long> load_;
    std::vector<double> bandwidth_;
    std::vector<std::size_t> slices_;
    std::vector<std::size_t> choice_;

    std::map<std::vector<int>, std::optional<std::size_t>> packing_cache_;
    std::optional<std::vector<std::size_t>> best_choice_;
    double best_cost_ = std::numeric_limits<double>::infinity();
    Key best_key_;
    std::uint64_t nodes_ = 0;
    bool aborted_ = false;
};

}  // namespace

ExactResult solve_exact(const Instance& inst, const CostWeights& weights, const ExactConfig& cfg) {
    if (cfg.node_cap < 1) throw std::invalid_argument("node cap must be at least 1");
    if (inst.requests.empty()) {
        ExactResult empty;
        empty.placement = Placement(cfg.mode, 0);
        empty.proven_optimal = true;
        return empty;
    }
    BranchAndBound bnb(inst, weights, cfg);
    ExactResult result = bnb.run();
    result.cost = cost_breakdown(result.placement, inst, weights);
    return result;
}

}  // namespace mecslice
