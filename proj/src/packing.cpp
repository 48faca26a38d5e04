#include "mecslice/packing.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mecslice {

Occupancy::Occupancy(const Instance& inst) {
    for (const auto& site : inst.sites) {
        capacity_.push_back(site.server_capacity);
        load_.emplace_back(site.server_count(), 0);
        bandwidth_.push_back(0.0);
        bandwidth_cap_.push_back(site.bandwidth);
        slices_.push_back(0);
    }
}

Occupancy Occupancy::of(const Placement& p, const Instance& inst) {
    Occupancy occ(inst);
    for (std::size_t r = 0; r < p.request_count(); ++r) {
        const auto& rp = p.at(r);
        if (!rp) continue;
        occ.add(rp->primary, inst.requests[r]);
        occ.add(rp->backup, inst.requests[r]);
    }
    return occ;
}

std::size_t Occupancy::active_mecs() const {
    return static_cast<std::size_t>(std::count_if(slices_.begin(), slices_.end(), [](std::size_t n) { return n > 0; }));
}

std::size_t Occupancy::active_servers(std::size_t m) const {
    return static_cast<std::size_t>(std::count_if(load_[m].begin(), load_[m].end(), [](int l) { return l > 0; }));
}

std::size_t Occupancy::active_servers() const {
    std::size_t total = 0;
    for (std::size_t m = 0; m < load_.size(); ++m) total += active_servers(m);
    return total;
}

std::optional<std::vector<std::size_t>> Occupancy::pack(std::size_t m, std::span<const Vnf> vnfs, Mbps bandwidth,
                                                        std::span<const std::size_t> excluded) const {
    if (bandwidth_[m] + bandwidth > bandwidth_cap_[m] + 1e-9) return std::nullopt;
    const std::size_t servers = load_[m].size();
    std::vector<std::size_t> order;
    order.reserve(servers);
    auto allowed = [&](std::size_t s) { return std::find(excluded.begin(), excluded.end(), s) == excluded.end(); };
    for (std::size_t s = 0; s < servers; ++s)
        if (load_[m][s] > 0 && allowed(s)) order.push_back(s);
    for (std::size_t s = 0; s < servers; ++s)
        if (load_[m][s] == 0 && allowed(s)) order.push_back(s);

    std::vector<std::size_t> items(vnfs.size());
    std::iota(items.begin(), items.end(), 0);
    std::stable_sort(items.begin(), items.end(), [&](std::size_t a, std::size_t b) { return vnfs[a].vcpu > vnfs[b].vcpu; });

    std::vector<int> residual(servers);
    for (std::size_t s = 0; s < servers; ++s) residual[s] = capacity_[m][s] - load_[m][s];
    std::vector<std::size_t> assignment(vnfs.size());
    for (std::size_t v : items) {
        bool placed = false;
        for (std::size_t s : order) {
            if (residual[s] >= vnfs[v].vcpu) {
                residual[s] -= vnfs[v].vcpu;
                assignment[v] = s;
                placed = true;
                break;
            }
        }
        if (!placed) return std::nullopt;
    }
    return assignment;
}

void Occupancy::add(std::size_t m, std::span<const std::size_t> servers, std::span<const Vnf> vnfs, Mbps bandwidth) {
    for (std::size_t v = 0; v < vnfs.size(); ++v) load_[m][servers[v]] += vnfs[v].vcpu;
    bandwidth_[m] += bandwidth;
    ++slices_[m];
}

void Occupancy::remove(std::size_t m, std::span<const std::size_t> servers, std::span<const Vnf> vnfs,
                       Mbps bandwidth) {
    if (slices_[m] == 0) throw std::logic_error("removing a slice from an empty MEC");
    for (std::size_t v = 0; v < vnfs.size(); ++v) load_[m][servers[v]] -= vnfs[v].vcpu;
    bandwidth_[m] -= bandwidth;
    --slices_[m];
}

std::optional<std::vector<std::size_t>> first_fit_decreasing(std::span<const int> demands,
                                                             std::span<const int> capacities) {
    std::vector<std::size_t> items(demands.size());
    std::iota(items.begin(), items.end(), 0);
    std::stable_sort(items.begin(), items.end(), [&](std::size_t a, std::size_t b) { return demands[a] > demands[b]; });
    std::vector<int> residual(capacities.begin(), capacities.end());
    std::vector<std::size_t> opened;
    std::vector<bool> is_open(capacities.size(), false);
    std::vector<std::size_t> assignment(demands.size());
    for (std::size_t i : items) {
        std::optional<std::size_t> target;
        for (std::size_t s : opened)
            if (residual[s] >= demands[i]) {
                target = s;
                break;
            }
        if (!target)
            for (std::size_t s = 0; s < capacities.size(); ++s)
                if (!is_open[s] && residual[s] >= demands[i]) {
                    target = s;
                    is_open[s] = true;
                    opened.push_back(s);
                    break;
                }
        if (!target) return std::nullopt;
        residual[*target] -= demands[i];
        assignment[i] = *target;
    }
    return assignment;
}

std::size_t servers_used(std::span<const std::size_t> assignment) {
    return std::set<std::size_t>(assignment.begin(), assignment.end()).size();
}

namespace {

class MinServerSearch {
public:
    MinServerSearch(std::span<const int> demands, std::span<const int> capacities)
        : demands_(demands), capacities_(capacities), residual_(capacities.begin(), capacities.end()),
          open_(capacities.size(), false), current_(demands.size()) {
        order_.resize(demands.size());
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return demands[a] > demands[b]; });
        remaining_ = std::accumulate(demands.begin(), demands.end(), 0L);

        std::vector<int> caps(capacities.begin(), capacities.end());
        std::sort(caps.rbegin(), caps.rend());
        long covered = 0;
        lower_bound_ = 0;
        while (covered < remaining_ && lower_bound_ < caps.size()) covered += caps[lower_bound_++];
    }

    std::optional<std::vector<std::size_t>> run() {
        auto ffd = first_fit_decreasing(demands_, capacities_);
        if (ffd) {
            best_ = *ffd;
            best_count_ = servers_used(*ffd);
        } else {
            best_count_ = capacities_.size() + 1;
        }
        if (best_count_ > lower_bound_) search(0, 0, 0);
        if (best_count_ > capacities_.size()) return std::nullopt;
        return best_;
    }

private:
    void search(std::size_t depth, std::size_t used, long open_residual) {
        if (best_count_ <= lower_bound_) return;
        if (depth == order_.size()) {
            if (used < best_count_) {
                best_count_ = used;
                best_ = current_;
            }
            return;
        }
        if (remaining_ > open_residual && used + 1 >= best_count_) return;

        const std::size_t item = order_[depth];
        const int d = demands_[item];
        std::set<std::pair<int, int>> tried;
        for (std::size_t s = 0; s < capacities_.size(); ++s) {
            if (!open_[s] || residual_[s] < d) continue;
            if (!tried.insert({residual_[s], capacities_[s]}).second) continue;
            place(item, s, d);
            search(depth + 1, used, open_residual - d);
            unplace(item, s, d);
            if (best_count_ <= lower_bound_) return;
        }
        if (used + 1 >= best_count_) return;
        std::set<int> opened_caps;
        for (std::size_t s = 0; s < capacities_.size(); ++s) {
            if (open_[s] || capacities_[s] < d) continue;
            if (!opened_caps.insert(capacities_[s]).second) continue;
            open_[s] = true;
            place(item, s, d);
            search(depth + 1, used + 1, open_residual + capacities_[s] - d);
            unplace(item, s, d);
            open_[s] = false;
            if (best_count_ <= lower_bound_) return;
        }
    }

    void place(std::size_t item, std::size_t s, int d) {
        residual_[s] -= d;
        remaining_ -= d;
        current_[item] = s;
    }
    void unplace(std::size_t, std::size_t s, int d) {
        residual_[s] += d;
        remaining_ += d;
    }

    std::span<const int> demands_;
    std::span<const int> capacities_;
    std::vector<int> residual_;
    std::vector<bool> open_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> current_;
    std::vector<std::size_t> best_;
    std::size_t best_count_ = 0;
    std::size_t lower_bound_ = 0;
    long remaining_ = 0;
};

}  // namespace

std::optional<std::vector<std::size_t>> pack_min_servers(std::span<const int> demands, std::span<const int> capacities) {
    if (demands.empty()) return std::vector<std::size_t>{};
    return MinServerSearch(demands, capacities).run();
}

}  // namespace mecslice
