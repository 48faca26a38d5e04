#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mecslice/evaluation.hpp"
#include "mecslice/experiment.hpp"
#include "mecslice/instance_io.hpp"

using namespace mecslice;

namespace {

#ifndef MECSLICE_DEFAULT_TOPOLOGY
#define MECSLICE_DEFAULT_TOPOLOGY "data/germany50.txt"
#endif

struct Common {
    std::string topology = MECSLICE_DEFAULT_TOPOLOGY;
    std::size_t mec_sites = 7;
    std::string config;
    std::string out;
    bool verbose = false;
};

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) {
        ExperimentConfig cfg;
        cfg.topology = MECSLICE_DEFAULT_TOPOLOGY;
        return cfg;
    }
    const auto base = std::filesystem::path(path).parent_path().string();
    return config_from_json(read_json_file(path), base);
}

void print_report(std::ostream& os, const EvaluationReport& rep, std::size_t total) {
    os << std::setprecision(10);
    os << "method:     " << rep.method << "\n"
       << "admitted:   " << rep.admitted << "/" << total << "\n"
       << "cost:       " << rep.cost.total << " (mec " << rep.cost.mec << ", server " << rep.cost.server
       << ", traffic " << rep.cost.traffic << ")\n"
       << "mecs:       " << rep.usage.mecs << "\n"
       << "servers:    " << rep.usage.servers << "\n"
       << "throughput: " << rep.throughput_mbps << " Mbps\n"
       << "violations: " << rep.violations << "\n";
}

int cmd_topo(const Common& c, std::uint64_t seed, bool as_json) {
    const Network net = load_sndlib(c.topology);
    const DelayMatrix d = all_pairs_delay(net);
    if (as_json) {
        nlohmann::json j = to_json(net);
        j["delays_ms"] = to_json(d);
        if (c.mec_sites > 0) j["mec_sites"] = select_mec_sites(net, d, c.mec_sites, seed);
        std::cout << j.dump(1) << "\n";
        return 0;
    }
    double diameter = 0.0;
    for (std::size_t a = 0; a < d.size(); ++a)
        for (std::size_t b = 0; b < d.size(); ++b) diameter = std::max(diameter, d(a, b));
    std::cout << "network:  " << net.name() << "\n"
              << "nodes:    " << net.node_count() << "\n"
              << "links:    " << net.link_count() << "\n"
              << "diameter: " << diameter << " ms\n";
    if (c.mec_sites > 0) {
        std::cout << "mec sites (k=" << c.mec_sites << ", seed " << seed << "):\n";
        for (NodeId h : select_mec_sites(net, d, c.mec_sites, seed))
            std::cout << "  " << std::setw(3) << h << "  " << std::left << std::setw(14) << net.node(h).name
                      << std::right << " closeness " << closeness_centrality(d, h) << "\n";
    }
    return 0;
}

int cmd_solve(const Common& c, const std::string& method_name, std::size_t requests, std::uint64_t seed,
              const std::string& instance_path) {
    ExperimentConfig cfg = load_config(c.config);
    const Method method = method_from_string(method_name);
    Instance inst;
    if (!instance_path.empty()) {
        inst = instance_from_json(read_json_file(instance_path));
    } else {
        const std::string topo = c.config.empty() || c.topology != MECSLICE_DEFAULT_TOPOLOGY ? c.topology : cfg.topology;
        const Network net = load_sndlib(topo, cfg.fiber_us_per_km);
        const DelayMatrix d = all_pairs_delay(net);
        const auto hosts = select_mec_sites(net, d, c.mec_sites, cfg.site_seed);
        inst = make_instance(d, hosts, cfg.substrate, requests, seed);
    }
    ExactConfig exact;
    exact.node_cap = cfg.exact_node_cap;
    if (c.verbose) exact.trace = &std::cerr;
    const MethodRun run = run_method(method, inst, cfg.weights, seed, cfg.ga, exact);
    if (c.verbose && method == Method::mga) std::cerr << history_csv(run.history);
    const EvaluationReport rep = evaluate_placement(to_string(method), run.placement, inst, cfg.weights);
    print_report(std::cout, rep, inst.requests.size());
    if (is_exact(method)) std::cout << "optimal:    " << (run.proven_optimal ? "proven" : "node cap hit") << "\n";
    std::cout << "time:       " << run.seconds << " s\n";
    if (!c.out.empty()) {
        const std::filesystem::path dir(c.out);
        write_text_file((dir / "instance.json").string(), to_json(inst).dump(1) + "\n");
        write_text_file((dir / "placement.json").string(), to_json(run.placement).dump(1) + "\n");
        write_text_file((dir / "report.json").string(), to_json(rep).dump(2) + "\n");
        if (method == Method::mga) write_text_file((dir / "history.csv").string(), history_csv(run.history));
    }
    return 0;
}

int cmd_validate(const Common& c, const std::string& instance_path, const std::string& placement_path) {
    const ExperimentConfig cfg = load_config(c.config);
    const Instance inst = instance_from_json(read_json_file(instance_path));
    const Placement p = placement_from_json(read_json_file(placement_path));
    const auto violations = check_feasibility(p, inst);
    for (const auto& v : violations) std::cout << v.to_string() << "\n";
    const EvaluationReport rep = evaluate_placement(std::string("placement file (") + to_string(p.mode()) + ")", p, inst, cfg.weights);
    print_report(std::cout, rep, inst.requests.size());
    std::cout << (violations.empty() ? "feasible" : "infeasible") << "\n";
    return violations.empty() ? 0 : 2;
}

int cmd_sweep(const Common& c, const std::vector<std::size_t>& requests, const std::vector<std::string>& methods,
              const std::vector<std::uint64_t>& seeds, bool topology_given, bool sites_given) {
    if (c.config.empty()) throw std::invalid_argument("sweep needs --config");
    ExperimentConfig cfg = load_config(c.config);
    if (topology_given) cfg.topology = c.topology;
    if (sites_given) cfg.mec_sites = c.mec_sites;
    if (!requests.empty()) cfg.request_counts = requests;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : methods) cfg.methods.push_back(method_from_string(m));
    }
    if (!c.out.empty()) cfg.output_dir = c.out;
    const std::string dir = run_experiment(cfg, c.verbose ? &std::cerr : nullptr);
    std::cout << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Resilient primary/backup slice placement on MEC servers"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--topology", c.topology, "SNDlib native topology file");
        sub->add_option("--mec-sites", c.mec_sites, "number of MEC host sites");
        sub->add_option("--config", c.config, "experiment config (JSON)");
        sub->add_flag("--verbose,-v", c.verbose, "solver trace on stderr");
    };

    std::uint64_t seed = 1;
    bool as_json = false;
    auto* topo = app.add_subcommand("topo", "parse a topology, print its stats and selected MEC sites");
    add_common(topo);
    topo->add_option("--seed", seed, "site selection seed");
    topo->add_flag("--json", as_json, "dump nodes, links, delays and sites as JSON");

    std::string method = "mga";
    std::size_t requests = 20;
    std::string instance_path;
    auto* solve = app.add_subcommand("solve", "solve one instance with one method");
    add_common(solve);
    solve->add_option("--method", method, "exact, exact-sc, mga, greedy, nsp-proxy or baseline");
    solve->add_option("--requests", requests, "number of generated requests");
    solve->add_option("--seed", seed, "request and solver seed");
    solve->add_option("--instance", instance_path, "instance JSON instead of generating one");
    solve->add_option("--out", c.out, "directory for instance, placement and report files");

    std::string placement_path;
    auto* validate = app.add_subcommand("validate", "check a placement file against an instance");
    add_common(validate);
    validate->add_option("--instance", instance_path, "instance JSON")->required();
    validate->add_option("--placement", placement_path, "placement JSON")->required();

    std::vector<std::size_t> sweep_requests;
    std::vector<std::string> sweep_methods;
    std::vector<std::uint64_t> sweep_seeds;
    auto* sweep = app.add_subcommand("sweep", "run a full experiment and write result tables");
    add_common(sweep);
    auto* sweep_topology = sweep->get_option("--topology");
    auto* sweep_sites = sweep->get_option("--mec-sites");
    sweep->add_option("--requests", sweep_requests, "request counts (overrides config)");
    sweep->add_option("--method", sweep_methods, "methods (overrides config)");
    sweep->add_option("--seed", sweep_seeds, "seeds (overrides config)");
    sweep->add_option("--out", c.out, "output root (overrides config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*topo) return cmd_topo(c, seed, as_json);
        if (*solve) return cmd_solve(c, method, requests, seed, instance_path);
        if (*validate) return cmd_validate(c, instance_path, placement_path);
        if (*sweep)
            return cmd_sweep(c, sweep_requests, sweep_methods, sweep_seeds, sweep_topology->count() > 0,
                             sweep_sites->count() > 0);
    } catch (const NoFeasiblePlacement& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
