#include "mecslice/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mecslice/packing.hpp"

namespace mecslice {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool slice_survives(const SliceMapping& slice, std::size_t target, const std::vector<char>& failed) {
    if (slice.mec != target) return true;
    return std::none_of(slice.servers.begin(), slice.servers.end(), [&](std::size_t s) { return failed[s] != 0; });
}

}  // namespace

ResourceUsage resource_usage(const Placement& p) {
    return ResourceUsage{p.used_mecs().size(), p.active_servers().size()};
}

const char* to_string(BackupMode mode) {
    switch (mode) {
        case BackupMode::none: return "none";
        case BackupMode::onsite: return "onsite";
        case BackupMode::inter_mec: return "inter-mec";
    }
    return "?";
}

BackupMode backup_mode_from_string(const std::string& name) {
    if (name == "none") return BackupMode::none;
    if (name == "onsite") return BackupMode::onsite;
    if (name == "inter-mec") return BackupMode::inter_mec;
    throw std::invalid_argument("unknown backup mode '" + name + "' (none, onsite, inter-mec)");
}

std::vector<std::optional<RequestPlacement>> apply_backup_mode(const Placement& p, const Instance& inst,
                                                               BackupMode mode, OnsiteMethod onsite,
                                                               std::vector<std::size_t>& flagged) {
    std::vector<std::optional<RequestPlacement>> out(p.request_count());
    for (std::size_t r = 0; r < p.request_count(); ++r) out[r] = p.at(r);
    if (mode == BackupMode::inter_mec) return out;

    if (mode == BackupMode::none) {
        for (auto& rp : out)
            if (rp) rp->backup.servers.clear();
        return out;
    }

    // Onsite: start from the primaries alone and repack every backup next to its primary.
    Occupancy occ(inst);
    for (std::size_t r = 0; r < out.size(); ++r)
        if (out[r]) occ.add(out[r]->primary, inst.requests[r]);
    for (std::size_t r = 0; r < out.size(); ++r) {
        if (!out[r]) continue;
        auto& rp = *out[r];
        const SliceRequest& req = inst.requests[r];
        if (onsite == OnsiteMethod::same_server) {
            rp.backup = rp.primary;
            continue;
        }
        auto servers = occ.pack(rp.primary.mec, req.vnfs, req.service.bandwidth, rp.primary.servers);
        if (!servers) {
            flagged.push_back(r);
            rp.backup.servers.clear();
            continue;
        }
        rp.backup = SliceMapping{rp.primary.mec, std::move(*servers)};
        occ.add(rp.backup, req);
    }
    return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // c * (n - k + i) / i stays integral at every step
        const std::uint64_t num = n - k + i;
        if (c > UINT64_MAX / num) return UINT64_MAX;
        c = c * num / i;
    }
    return c;
}

AvailabilityResult availability(const Placement& p, const Instance& inst, const FailureScenario& scenario,
                                const AvailabilityOptions& options) {
    if (scenario.target_mec >= inst.sites.size()) throw std::invalid_argument("target MEC out of range");
    if (options.trials < 1) throw std::invalid_argument("trials must be at least 1");
    const std::size_t S = inst.sites[scenario.target_mec].server_count();
    const std::size_t k = scenario.whole_facility ? S : scenario.failed_servers;
    if (k > S) throw std::invalid_argument("cannot fail more servers than the target MEC has");

    AvailabilityResult result;
    const auto view = apply_backup_mode(p, inst, scenario.mode, scenario.onsite, result.flagged);
    std::vector<const RequestPlacement*> exposed;
    for (const auto& rp : view)
        if (rp && rp->primary.mec == scenario.target_mec) exposed.push_back(&*rp);
    result.exposed = exposed.size();
    if (exposed.empty()) return result;

    std::vector<char> failed(S, 0);
    auto served_fraction = [&]() {
        std::size_t alive = 0;
        for (const RequestPlacement* rp : exposed) {
            const bool primary_ok = slice_survives(rp->primary, scenario.target_mec, failed);
            const bool backup_ok =
                !rp->backup.servers.empty() && slice_survives(rp->backup, scenario.target_mec, failed);
            if (primary_ok || backup_ok) ++alive;
        }
        return static_cast<double>(alive) / static_cast<double>(exposed.size());
    };

    const std::uint64_t subsets = binomial(S, k);
    bool enumerate = options.method == SamplingMethod::exhaustive;
    if (options.method == SamplingMethod::automatic) enumerate = subsets <= options.exhaustive_limit;

    double sum = 0.0;
    if (enumerate) {
        // Walk k-subsets as selection masks in lexicographic order.
        std::vector<char> mask(S, 0);
        std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), 1);
        std::uint64_t count = 0;
        do {
            failed = mask;
            sum += served_fraction();
            ++count;
        } while (std::prev_permutation(mask.begin(), mask.end()));
        result.exhaustive = true;
        result.samples = count;
        result.value = sum / static_cast<double>(count);
        return result;
    }

    std::vector<std::size_t> order(S);
    for (std::size_t t = 0; t < options.trials; ++t) {
        std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(t)));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::fill(failed.begin(), failed.end(), 0);
        for (std::size_t i = 0; i < k; ++i) failed[order[i]] = 1;
        sum += served_fraction();
    }
    result.samples = options.trials;
    result.value = sum / static_cast<double>(options.trials);
    return result;
}

ThroughputResult throughput(const Placement& p, const Instance& inst, ThroughputMode mode) {
    ThroughputResult out;
    out.per_request.assign(p.request_count(), 0.0);
    const bool multiplex = mode == ThroughputMode::aggregate && p.mode() == Connectivity::multi;
    for (std::size_t r = 0; r < p.request_count(); ++r) {
        if (!p.admitted(r)) continue;
        const double b = inst.requests[r].service.bandwidth;
        out.per_request[r] = multiplex ? 2.0 * b : b;
        out.total += out.per_request[r];
    }
    return out;
}

std::size_t busiest_mec(const Placement& p, std::size_t site_count) {
    std::vector<std::size_t> primaries(site_count, 0);
    for (std::size_t r = 0; r < p.request_count(); ++r)
        if (p.admitted(r)) ++primaries.at(p.at(r)->primary.mec);
    return static_cast<std::size_t>(std::max_element(primaries.begin(), primaries.end()) - primaries.begin());
}

EvaluationReport evaluate_placement(const std::string& method, const Placement& p, const Instance& inst,
                                    const CostWeights& weights) {
    EvaluationReport rep;
    rep.method = method;
    rep.cost = cost_breakdown(p, inst, weights);
    rep.violations = check_feasibility(p, inst).size();
    rep.usage = resource_usage(p);
    rep.admitted = p.admitted_count();
    rep.rejected = p.rejected();
    rep.throughput_mbps = throughput(p, inst, ThroughputMode::aggregate).total;
    return rep;
}

nlohmann::json to_json(const EvaluationReport& report) {
    nlohmann::json j;
    j["method"] = report.method;
    j["cost"] = {{"mec", report.cost.mec},
                 {"server", report.cost.server},
                 {"traffic", report.cost.traffic},
                 {"total", report.cost.total}};
    j["mecs_activated"] = report.usage.mecs;
    j["servers_activated"] = report.usage.servers;
    j["admitted"] = report.admitted;
    j["rejected"] = report.rejected;
    j["throughput_mbps"] = report.throughput_mbps;
    j["violations"] = report.violations;
    auto& av = j["availability"] = nlohmann::json::array();
    for (const auto& pt : report.availability)
        av.push_back({{"mode", to_string(pt.mode)},
                      {"failed_servers", pt.failed_servers},
                      {"value", pt.result.value},
                      {"exhaustive", pt.result.exhaustive},
                      {"samples", pt.result.samples},
                      {"exposed", pt.result.exposed},
                      {"flagged", pt.result.flagged}});
    return j;
}

std::string to_csv(const std::vector<EvaluationReport>& reports) {
    std::ostringstream out;
    out.precision(17);
    out << "method,metric,value\n";
    for (const auto& r : reports) {
        out << r.method << ",cost_total," << r.cost.total << '\n';
        out << r.method << ",cost_mec," << r.cost.mec << '\n';
        out << r.method << ",cost_server," << r.cost.server << '\n';
        out << r.method << ",cost_traffic," << r.cost.traffic << '\n';
        out << r.method << ",mecs_activated," << r.usage.mecs << '\n';
        out << r.method << ",servers_activated," << r.usage.servers << '\n';
        out << r.method << ",admitted," << r.admitted << '\n';
        out << r.method << ",throughput_mbps," << r.throughput_mbps << '\n';
        out << r.method << ",violations," << r.violations << '\n';
        for (const auto& pt : r.availability)
            out << r.method << ",availability_" << to_string(pt.mode) << "_k" << pt.failed_servers << ','
                << pt.result.value << '\n';
    }
    return out.str();
}

}  // namespace mecslice
