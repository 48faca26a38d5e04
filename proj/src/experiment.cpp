#include "mecslice/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mecslice/instance_io.hpp"

namespace mecslice {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

struct Stats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

Stats stats_of(const std::vector<double>& xs) {
    Stats s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double sq = 0.0;
        for (double x : xs) sq += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
    }
    return s;
}

bool completed(const RunRecord& r) { return r.status == "ok" || r.status == "node-cap"; }

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool admissible_everywhere(const Instance& inst, std::size_t r) {
    return !candidate_pairs(inst, r, Connectivity::multi).empty() &&
           !candidate_pairs(inst, r, Connectivity::single).empty();
}

std::string cell_name(std::size_t requests, std::uint64_t seed) {
    return "n" + std::to_string(requests) + "-s" + std::to_string(seed);
}

using MetricFn = std::function<double(const RunRecord&)>;

// Groups completed runs by (method, request count) and renders mean and
// sample std of each metric per group.
std::string grouped_csv(const ExperimentResults& results, const std::vector<std::pair<std::string, MetricFn>>& metrics) {
    std::ostringstream out;
    out << "method,requests,runs";
    for (const auto& [column, fn] : metrics) out << ',' << column << "_mean," << column << "_std";
    out << '\n';
    std::vector<std::pair<Method, std::size_t>> keys;
    for (const auto& r : results.runs) {
        if (!completed(r)) continue;
        const std::pair<Method, std::size_t> key{r.method, r.requests};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
        return std::make_pair(static_cast<int>(a.first), a.second) <
               std::make_pair(static_cast<int>(b.first), b.second);
    });
    for (const auto& [method, requests] : keys) {
        std::vector<const RunRecord*> group;
        for (const auto& r : results.runs)
            if (completed(r) && r.method == method && r.requests == requests) group.push_back(&r);
        out << to_string(method) << ',' << requests << ',' << group.size();
        for (const auto& [column, fn] : metrics) {
            std::vector<double> xs;
            for (const RunRecord* r : group) xs.push_back(fn(*r));
            const Stats s = stats_of(xs);
            out << ',' << num(s.mean) << ',' << num(s.stddev);
        }
        out << '\n';
    }
    return out.str();
}

double cost_of(const RunRecord& r) { return r.report.cost.total; }
double mecs_of(const RunRecord& r) { return static_cast<double>(r.report.usage.mecs); }
double servers_of(const RunRecord& r) { return static_cast<double>(r.report.usage.servers); }
double throughput_of(const RunRecord& r) { return r.report.throughput_mbps; }

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::exact: return "exact";
        case Method::exact_sc: return "exact-sc";
        case Method::mga: return "mga";
        case Method::greedy: return "greedy";
        case Method::nsp_proxy: return "nsp-proxy";
        case Method::baseline: return "baseline";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::exact, Method::exact_sc, Method::mga, Method::greedy, Method::nsp_proxy, Method::baseline})
        if (name == to_string(m)) return m;
    throw std::invalid_argument("unknown method '" + name +
                                "' (exact, exact-sc, mga, greedy, nsp-proxy, baseline)");
}

bool is_exact(Method m) { return m == Method::exact || m == Method::exact_sc; }

Connectivity connectivity_of(Method m) {
    switch (m) {
        case Method::exact:
        case Method::mga:
        case Method::greedy: return Connectivity::multi;
        default: return Connectivity::single;
    }
}

Instance make_instance(const DelayMatrix& delays, const std::vector<NodeId>& hosts, const SubstrateOptions& substrate,
                       std::size_t requests, std::uint64_t seed) {
    Instance inst;
    inst.delays = delays;
    for (NodeId h : hosts)
        inst.sites.push_back(make_site(h, substrate.servers_per_mec, substrate.server_vcpu, substrate.mec_bandwidth));
    inst.requests = generate_requests(requests, delays, seed);
    for (std::size_t r = 0; r < inst.requests.size(); ++r) {
        for (std::uint64_t attempt = 1; attempt <= 1000 && !admissible_everywhere(inst, r); ++attempt) {
            const int id = inst.requests[r].id;
            inst.requests[r] = generate_requests(1, delays, mix(mix(seed, r), attempt)).front();
            inst.requests[r].id = id;
        }
    }
    return inst;
}

Instance prefix_instance(const Instance& inst, std::size_t n) {
    Instance out;
    out.delays = inst.delays;
    out.sites = inst.sites;
    out.requests.assign(inst.requests.begin(),
                        inst.requests.begin() + static_cast<std::ptrdiff_t>(std::min(n, inst.requests.size())));
    return out;
}

MethodRun run_method(Method m, const Instance& inst, const CostWeights& weights, std::uint64_t seed,
                     const GaConfig& ga, const ExactConfig& exact) {
    MethodRun run;
    const auto start = std::chrono::steady_clock::now();
    switch (m) {
        case Method::exact:
        case Method::exact_sc: {
            ExactConfig cfg = exact;
            cfg.mode = connectivity_of(m);
            ExactResult res = solve_exact(inst, weights, cfg);
            run.placement = std::move(res.placement);
            run.proven_optimal = res.proven_optimal;
            run.nodes = res.nodes;
            break;
        }
        case Method::mga: {
            GaConfig cfg = ga;
            cfg.seed = seed;
            MgaResult res = solve_mga(inst, weights, cfg);
            run.placement = std::move(res.placement);
            run.history = std::move(res.history);
            break;
        }
        case Method::greedy: run.placement = solve_greedy(inst, weights); break;
        case Method::nsp_proxy: run.placement = solve_nsp_proxy(inst, weights, seed); break;
        case Method::baseline: run.placement = solve_baseline(inst, weights, seed); break;
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.cost = cost_breakdown(run.placement, inst, weights);
    return run;
}

ExperimentConfig config_from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw FormatError("experiment config must be a JSON object");
    ExperimentConfig cfg;
    try {
        cfg.name = j.value("name", cfg.name);
        if (!j.contains("topology")) throw FormatError("experiment config needs a 'topology' path");
        cfg.topology = j.at("topology").get<std::string>();
        if (!base_dir.empty() && std::filesystem::path(cfg.topology).is_relative()) {
            const auto candidate = std::filesystem::path(base_dir) / cfg.topology;
            if (std::filesystem::exists(candidate)) cfg.topology = candidate.string();
        }
        cfg.mec_sites = j.value("mec_sites", cfg.mec_sites);
        cfg.site_seed = j.value("site_seed", cfg.site_seed);
        cfg.substrate.servers_per_mec = j.value("servers_per_mec", cfg.substrate.servers_per_mec);
        cfg.substrate.server_vcpu = j.value("server_vcpu", cfg.substrate.server_vcpu);
        cfg.substrate.mec_bandwidth = j.value("mec_bandwidth_mbps", cfg.substrate.mec_bandwidth);
        cfg.fiber_us_per_km = j.value("fiber_us_per_km", cfg.fiber_us_per_km);
        if (j.contains("weights")) cfg.weights = weights_from_json(j.at("weights"));
        if (j.contains("request_counts")) cfg.request_counts = j.at("request_counts").get<std::vector<std::size_t>>();
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const auto& name : j.at("methods").get<std::vector<std::string>>())
                cfg.methods.push_back(method_from_string(name));
        }
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("ga")) {
            const auto& g = j.at("ga");
            cfg.ga.population = g.value("population", cfg.ga.population);
            cfg.ga.generations = g.value("generations", cfg.ga.generations);
            cfg.ga.crossover_threshold = g.value("crossover_threshold", cfg.ga.crossover_threshold);
            cfg.ga.mutation_threshold = g.value("mutation_threshold", cfg.ga.mutation_threshold);
            cfg.ga.init_retries = g.value("init_retries", cfg.ga.init_retries);
        }
        if (j.contains("exact")) {
            const auto& e = j.at("exact");
            cfg.exact_max_requests = e.value("max_requests", cfg.exact_max_requests);
            cfg.exact_node_cap = e.value("node_cap", cfg.exact_node_cap);
        }
        if (j.contains("availability")) {
            const auto& a = j.at("availability");
            if (a.contains("failed_servers"))
                cfg.availability.failed_servers = a.at("failed_servers").get<std::vector<std::size_t>>();
            if (a.contains("modes")) {
                cfg.availability.modes.clear();
                for (const auto& name : a.at("modes").get<std::vector<std::string>>())
                    cfg.availability.modes.push_back(backup_mode_from_string(name));
            }
            const int onsite = a.value("onsite_method", 2);
            if (onsite != 1 && onsite != 2) throw FormatError("availability.onsite_method must be 1 or 2");
            cfg.availability.onsite = static_cast<OnsiteMethod>(onsite);
            cfg.availability.trials = a.value("trials", cfg.availability.trials);
            if (a.contains("source")) cfg.availability.source = method_from_string(a.at("source").get<std::string>());
        }
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
    } catch (const json::exception& e) {
        throw FormatError(std::string("experiment config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("experiment config: ") + e.what());
    }
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(to_string(m));
    json modes = json::array();
    for (BackupMode m : cfg.availability.modes) modes.push_back(to_string(m));
    return {{"name", cfg.name},
            {"topology", cfg.topology},
            {"mec_sites", cfg.mec_sites},
            {"site_seed", cfg.site_seed},
            {"servers_per_mec", cfg.substrate.servers_per_mec},
            {"server_vcpu", cfg.substrate.server_vcpu},
            {"mec_bandwidth_mbps", cfg.substrate.mec_bandwidth},
            {"fiber_us_per_km", cfg.fiber_us_per_km},
            {"weights", to_json(cfg.weights)},
            {"request_counts", cfg.request_counts},
            {"methods", methods},
            {"seeds", cfg.seeds},
            {"ga",
             {{"population", cfg.ga.population},
              {"generations", cfg.ga.generations},
              {"crossover_threshold", cfg.ga.crossover_threshold},
              {"mutation_threshold", cfg.ga.mutation_threshold},
              {"init_retries", cfg.ga.init_retries}}},
            {"exact", {{"max_requests", cfg.exact_max_requests}, {"node_cap", cfg.exact_node_cap}}},
            {"availability",
             {{"failed_servers", cfg.availability.failed_servers},
              {"modes", modes},
              {"onsite_method", static_cast<int>(cfg.availability.onsite)},
              {"trials", cfg.availability.trials},
              {"source", to_string(cfg.availability.source)}}},
            {"output_dir", cfg.output_dir}};
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.topology.empty()) throw std::invalid_argument("no topology given");
    if (cfg.seeds.empty()) throw std::invalid_argument("seeds must not be empty");
    if (cfg.methods.empty()) throw std::invalid_argument("methods must not be empty");
    if (cfg.request_counts.empty()) throw std::invalid_argument("request_counts must not be empty");
    for (std::size_t n : cfg.request_counts)
        if (n == 0) throw std::invalid_argument("request counts must be positive");
    if (cfg.mec_sites < 2) throw std::invalid_argument("at least two MEC sites are needed");
    if (cfg.substrate.servers_per_mec < 1 || cfg.substrate.server_vcpu < 1 || !(cfg.substrate.mec_bandwidth > 0.0))
        throw std::invalid_argument("MEC capacities must be positive");
    if (!(cfg.fiber_us_per_km > 0.0)) throw std::invalid_argument("fiber_us_per_km must be positive");
    if (cfg.exact_node_cap < 1) throw std::invalid_argument("exact node cap must be at least 1");
    if (cfg.availability.trials < 1) throw std::invalid_argument("availability trials must be at least 1");
    for (std::size_t k : cfg.availability.failed_servers)
        if (k > cfg.substrate.servers_per_mec)
            throw std::invalid_argument("availability k exceeds servers per MEC");
    if (cfg.name.empty() || cfg.name.find('/') != std::string::npos)
        throw std::invalid_argument("experiment name must be a plain directory name");
    validate(cfg.ga);
}

ExperimentResults run_sweep(const ExperimentConfig& cfg, std::ostream* log,
                            std::map<std::string, std::string>* artifacts) {
    validate(cfg);
    const Network net = load_sndlib(cfg.topology, cfg.fiber_us_per_km);
    const DelayMatrix delays = all_pairs_delay(net);
    const auto hosts = select_mec_sites(net, delays, cfg.mec_sites, cfg.site_seed);

    std::vector<std::size_t> ks = cfg.availability.failed_servers;
    if (ks.empty())
        for (std::size_t k = 0; k <= cfg.substrate.servers_per_mec; ++k) ks.push_back(k);

    ExactConfig exact;
    exact.node_cap = cfg.exact_node_cap;

    ExperimentResults results;
    for (std::size_t count : cfg.request_counts) {
        // availability samples per (mode, k) across seeds
        std::vector<std::vector<double>> avail(cfg.availability.modes.size() * ks.size());
        for (std::uint64_t seed : cfg.seeds) {
            const Instance inst = make_instance(delays, hosts, cfg.substrate, count, seed);
            const std::string cell = cell_name(count, seed);
            if (artifacts) (*artifacts)["instances/" + cell + ".json"] = to_json(inst).dump(1) + "\n";
            for (Method m : cfg.methods) {
                RunRecord rec;
                rec.requests = count;
                rec.seed = seed;
                rec.method = m;
                rec.report.method = to_string(m);
                if (is_exact(m) && count > cfg.exact_max_requests) {
                    rec.status = "skipped: scale";
                    results.runs.push_back(std::move(rec));
                    continue;
                }
                try {
                    MethodRun run = run_method(m, inst, cfg.weights, seed, cfg.ga, exact);
                    rec.report = evaluate_placement(to_string(m), run.placement, inst, cfg.weights);
                    rec.proven_optimal = run.proven_optimal;
                    rec.seconds = run.seconds;
                    rec.status = is_exact(m) && !run.proven_optimal ? "node-cap" : "ok";
                    rec.placement_file = "placements/" + std::string(to_string(m)) + "-" + cell + ".json";
                    if (artifacts) {
                        (*artifacts)[rec.placement_file] = to_json(run.placement).dump(1) + "\n";
                        if (m == Method::mga)
                            (*artifacts)["history/mga-" + cell + ".csv"] = history_csv(run.history);
                    }
                    if (m == cfg.availability.source) {
                        FailureScenario sc;
                        sc.target_mec = busiest_mec(run.placement, inst.sites.size());
                        sc.onsite = cfg.availability.onsite;
                        AvailabilityOptions opt;
                        opt.trials = cfg.availability.trials;
                        opt.seed = seed;
                        for (std::size_t mi = 0; mi < cfg.availability.modes.size(); ++mi) {
                            sc.mode = cfg.availability.modes[mi];
                            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                                sc.failed_servers = ks[ki];
                                AvailabilityPoint pt{sc.mode, ks[ki], availability(run.placement, inst, sc, opt)};
                                avail[mi * ks.size() + ki].push_back(pt.result.value);
                                rec.report.availability.push_back(std::move(pt));
                            }
                        }
                    }
                } catch (const std::exception& e) {
                    rec.status = std::string("error: ") + e.what();
                }
                if (log)
                    *log << "n=" << count << " seed=" << seed << " " << to_string(m) << ": " << rec.status
                         << (completed(rec) ? " cost=" + num(rec.report.cost.total) : std::string()) << "\n";
                results.runs.push_back(std::move(rec));
            }
        }
        for (std::size_t mi = 0; mi < cfg.availability.modes.size(); ++mi)
            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                const auto& xs = avail[mi * ks.size() + ki];
                if (xs.empty()) continue;
                const Stats s = stats_of(xs);
                results.availability.push_back({count, cfg.availability.modes[mi], ks[ki], s.n, s.mean, s.stddev});
            }
    }
    return results;
}

std::map<std::string, std::string> emit_plot_data(const ExperimentResults& results) {
    if (std::none_of(results.runs.begin(), results.runs.end(), completed))
        throw std::invalid_argument("no completed runs to plot");
    std::map<std::string, std::string> out;
    out["fig7.csv"] = grouped_csv(results, {{"cost", cost_of}});
    out["fig8.csv"] = grouped_csv(results, {{"mecs", mecs_of}});
    out["fig9.csv"] = grouped_csv(results, {{"servers", servers_of}});
    out["fig11.csv"] = grouped_csv(results, {{"throughput_mbps", throughput_of}});

    std::ostringstream fig10;
    fig10 << "requests,mode,failed_servers,runs,availability_mean,availability_std\n";
    for (const auto& a : results.availability)
        fig10 << a.requests << ',' << to_string(a.mode) << ',' << a.failed_servers << ',' << a.samples << ','
              << num(a.mean) << ',' << num(a.stddev) << '\n';
    out["fig10.csv"] = fig10.str();

    out["summary.csv"] = grouped_csv(
        results, {{"cost", cost_of},
                  {"mecs", mecs_of},
                  {"servers", servers_of},
                  {"throughput_mbps", throughput_of},
                  {"admitted", [](const RunRecord& r) { return static_cast<double>(r.report.admitted); }}});
    return out;
}

std::string runs_csv(const ExperimentResults& results) {
    std::ostringstream out;
    out << "requests,seed,method,status,admitted,rejected,cost_total,cost_mec,cost_server,cost_traffic,mecs,servers,"
           "throughput_mbps,violations,proven_optimal,placement\n";
    for (const auto& r : results.runs) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << r.requests << ',' << r.seed << ',' << to_string(r.method) << ',' << status << ',';
        if (completed(r)) {
            out << r.report.admitted << ',' << r.report.rejected.size() << ',' << num(r.report.cost.total) << ','
                << num(r.report.cost.mec) << ',' << num(r.report.cost.server) << ',' << num(r.report.cost.traffic)
                << ',' << r.report.usage.mecs << ',' << r.report.usage.servers << ','
                << num(r.report.throughput_mbps) << ',' << r.report.violations << ',' << (is_exact(r.method) ? (r.proven_optimal ? "1" : "0") : "")
                << ',' << r.placement_file << '\n';
        } else {
            out << ",,,,,,,,,,,\n";
        }
    }
    return out.str();
}

std::string timing_csv(const ExperimentResults& results) {
    std::ostringstream out;
    out << "requests,seed,method,seconds\n";
    for (const auto& r : results.runs)
        if (completed(r)) out << r.requests << ',' << r.seed << ',' << to_string(r.method) << ',' << num(r.seconds) << '\n';
    return out.str();
}

std::string table2_csv(const ExperimentResults& results) {
    return grouped_csv(results, {{"seconds", [](const RunRecord& r) { return r.seconds; }}});
}

std::string run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    std::map<std::string, std::string> artifacts;
    const ExperimentResults results = run_sweep(cfg, log, &artifacts);
    const std::filesystem::path dir = std::filesystem::path(cfg.output_dir) / cfg.name;
    std::filesystem::create_directories(dir);
    for (const auto& [file, text] : emit_plot_data(results)) write_text_file((dir / file).string(), text);
    for (const auto& [file, text] : artifacts) write_text_file((dir / file).string(), text);
    write_text_file((dir / "runs.csv").string(), runs_csv(results));
    write_text_file((dir / "timing.csv").string(), timing_csv(results));
    write_text_file((dir / "table2.csv").string(), table2_csv(results));

    const Network net = load_sndlib(cfg.topology, cfg.fiber_us_per_km);
    const DelayMatrix delays = all_pairs_delay(net);
    json meta;
    meta["config"] = to_json(cfg);
    meta["topology"] = {{"name", net.name()}, {"nodes", net.node_count()}, {"links", net.link_count()}};
    json sites = json::array();
    for (NodeId h : select_mec_sites(net, delays, cfg.mec_sites, cfg.site_seed))
        sites.push_back({{"node", h}, {"name", net.node(h).name}});
    meta["mec_sites"] = sites;
    meta["runs"] = results.runs.size();
    meta["files"] = {{"runs", "runs.csv"},       {"summary", "summary.csv"}, {"timing", "timing.csv"},
                     {"table2", "table2.csv"},   {"fig7", "fig7.csv"},       {"fig8", "fig8.csv"},
                     {"fig9", "fig9.csv"},       {"fig10", "fig10.csv"},     {"fig11", "fig11.csv"}};
    write_text_file((dir / "meta.json").string(), meta.dump(2) + "\n");
    return dir.string();
}

}  // namespace mecslice
