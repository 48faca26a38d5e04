#ifndef MECSLICE_PACKING_HPP
#define MECSLICE_PACKING_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mecslice/model.hpp"

namespace mecslice {

/**
 * Mutable per-server vCPU load and per-site bandwidth for a placement under
 * construction. Heuristics keep one of these next to their Placement so a
 * move can be tested without rescanning every request.
 */
class Occupancy {
public:
    Occupancy() = default;
    explicit Occupancy(const Instance& inst);
    static Occupancy of(const Placement& p, const Instance& inst);

    std::size_t site_count() const noexcept { return load_.size(); }
    int load(std::size_t m, std::size_t s) const { return load_[m][s]; }
    int residual(std::size_t m, std::size_t s) const { return capacity_[m][s] - load_[m][s]; }
    Mbps bandwidth(std::size_t m) const { return bandwidth_[m]; }
    std::size_t slices(std::size_t m) const { return slices_[m]; }
    bool mec_active(std::size_t m) const { return slices_[m] > 0; }
    bool server_active(std::size_t m, std::size_t s) const { return load_[m][s] > 0; }
    std::size_t active_mecs() const;
    std::size_t active_servers() const;
    std::size_t active_servers(std::size_t m) const;

    /**
     * First-fit-decreasing trial packing of a slice into site m: VNFs by
     * descending vCPU, already-active servers (ascending index) before idle
     * ones. Servers listed in `excluded` are never used. Returns the server
     * per VNF, or nullopt if vCPU or bandwidth does not fit. Does not commit.
     */
    std::optional<std::vector<std::size_t>> pack(std::size_t m, std::span<const Vnf> vnfs, Mbps bandwidth,
                                                 std::span<const std::size_t> excluded = {}) const;

    void add(std::size_t m, std::span<const std::size_t> servers, std::span<const Vnf> vnfs, Mbps bandwidth);
    void remove(std::size_t m, std::span<const std::size_t> servers, std::span<const Vnf> vnfs, Mbps bandwidth);

    void add(const SliceMapping& map, const SliceRequest& req) {
        add(map.mec, map.servers, req.vnfs, req.service.bandwidth);
    }
    void remove(const SliceMapping& map, const SliceRequest& req) {
        remove(map.mec, map.servers, req.vnfs, req.service.bandwidth);
    }

    friend bool operator==(const Occupancy&, const Occupancy&) = default;

private:
    std::vector<std::vector<int>> capacity_;
    std::vector<std::vector<int>> load_;
    std::vector<Mbps> bandwidth_;
    std::vector<Mbps> bandwidth_cap_;
    std::vector<std::size_t> slices_;
};

/// First-fit-decreasing onto empty servers; nullopt if some item does not fit.
std::optional<std::vector<std::size_t>> first_fit_decreasing(std::span<const int> demands,
                                                             std::span<const int> capacities);

/**
 * Exact minimum-server packing by branch-and-bound, seeded with FFD as the
 * upper bound. Returns the server index per item, or nullopt if the items
 * cannot be packed at all.
 */
std::optional<std::vector<std::size_t>> pack_min_servers(std::span<const int> demands, std::span<const int> capacities);

std::size_t servers_used(std::span<const std::size_t> assignment);

}  // namespace mecslice

#endif  // MECSLICE_PACKING_HPP
