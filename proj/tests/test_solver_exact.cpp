#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "mecslice/solver_exact.hpp"
#include "oracles.hpp"

using namespace mecslice;

namespace {

Instance symmetric_two_site() {
    Instance inst;
    inst.delays = DelayMatrix(3);
    // node 0 master, node 1 secondary, MECs at 1 and 2
    const double d[3][3] = {{0, 1, 1}, {1, 0, 1.5}, {1, 1.5, 0}};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) inst.delays(a, b) = d[a][b];
    inst.sites = {make_site(1, 2, 8, 1000.0), make_site(2, 2, 8, 1000.0)};
    SliceRequest r;
    r.master = 0;
    r.secondary = 1;
    r.service = {"t", 100.0, 3.0};
    r.vnfs = {{2, 0.05}, {3, 0.05}};
    inst.requests = {r};
    return inst;
}

}  // namespace

TEST_CASE("one request, two candidate MECs: the cheaper ordering wins") {
    const Instance inst = symmetric_two_site();
    const ExactResult res = solve_exact(inst, CostWeights{});
    CHECK(res.proven_optimal);
    CHECK(check_feasibility(res.placement, inst).empty());
    // primary at MEC0 (d=1) + backup at MEC1 from n2 (d=1.5): 100*2.5
    // primary at MEC1 (d=1) + backup at MEC0 from n2 (d=0):   100*1.0
    const auto& rp = *res.placement.at(0);
    CHECK(rp.primary.mec == 1);
    CHECK(rp.backup.mec == 0);
    CHECK(res.cost.total == doctest::Approx(200.0 + 20.0 + 100.0));
    CHECK(res.cost.total == doctest::Approx(oracle::exhaustive_optimum(inst, CostWeights{}, Connectivity::multi).cost));
}

TEST_CASE("co-locating primaries saves a MEC") {
    Instance inst = symmetric_two_site();
    inst.sites.push_back(make_site(0, 2, 8, 1000.0));
    SliceRequest r2 = inst.requests[0];
    r2.id = 1;
    inst.requests.push_back(r2);
    const ExactResult res = solve_exact(inst, CostWeights{});
    CHECK(res.placement.used_mecs().size() == 2);
    CHECK(res.cost.total == doctest::Approx(oracle::exhaustive_optimum(inst, CostWeights{}, Connectivity::multi).cost));
}

TEST_CASE("empty instance") {
    Instance inst = symmetric_two_site();
    inst.requests.clear();
    const ExactResult res = solve_exact(inst, CostWeights{});
    CHECK(res.proven_optimal);
    CHECK(res.cost.total == 0.0);
    CHECK(res.placement.request_count() == 0);
}

TEST_CASE("infeasibility names the request and binding constraint") {
    Instance inst = symmetric_two_site();
    inst.requests.push_back(inst.requests[0]);
    inst.requests[1].id = 1;
    SUBCASE("latency") {
        inst.requests[1].service.max_delay = 0.5;
        try {
            solve_exact(inst, CostWeights{});
            FAIL("expected NoFeasiblePlacement");
        } catch (const NoFeasiblePlacement& e) {
            CHECK(e.request() == std::size_t{1});
            CHECK(e.constraint() == 15);
        }
    }
    SUBCASE("size") {
        inst.requests[1].vnfs = {{9, 0.05}};
        try {
            solve_exact(inst, CostWeights{});
            FAIL("expected NoFeasiblePlacement");
        } catch (const NoFeasiblePlacement& e) {
            CHECK(e.request() == std::size_t{1});
            CHECK(e.constraint() == 11);
        }
    }
    SUBCASE("joint capacity") {
        // Each MEC has 16 vCPU; two requests of 12 vCPU need a primary and a backup each.
        inst.requests[0].vnfs = {{6, 0.05}, {6, 0.05}};
        inst.requests[1].vnfs = {{6, 0.05}, {6, 0.05}};
        Instance three = inst;
        three.requests.push_back(inst.requests[0]);
        three.requests[2].id = 2;
        CHECK_THROWS_AS(solve_exact(three, CostWeights{}), NoFeasiblePlacement);
    }
}

TEST_CASE("exact matches exhaustive enumeration on random toys") {
    std::mt19937_64 rng(2024);
    int solved = 0;
    for (int t = 0; t < 120; ++t) {
        const Instance inst = oracle::toy_instance(rng());
        for (Connectivity mode : {Connectivity::multi, Connectivity::single}) {
            const auto ref = oracle::exhaustive_optimum(inst, CostWeights{}, mode);
            ExactConfig cfg;
            cfg.mode = mode;
            if (!ref.feasible) {
                CHECK_THROWS_AS(solve_exact(inst, CostWeights{}, cfg), NoFeasiblePlacement);
                continue;
            }
            const ExactResult res = solve_exact(inst, CostWeights{}, cfg);
            CHECK(res.proven_optimal);
            CHECK(res.cost.total == doctest::Approx(ref.cost).epsilon(1e-12));
            CHECK(check_feasibility(res.placement, inst).empty());
            CHECK(res.placement.mode() == mode);
            ++solved;
        }
    }
    CHECK(solved > 100);
}

TEST_CASE("optimum is invariant under reordering, relabeling and scaling") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 40; ++t) {
        const Instance inst = oracle::toy_instance(rng());
        if (!oracle::exhaustive_optimum(inst, CostWeights{}, Connectivity::multi).feasible) continue;
        const double base = solve_exact(inst, CostWeights{}).cost.total;

        Instance reordered = inst;
        std::shuffle(reordered.requests.begin(), reordered.requests.end(), rng);
        CHECK(solve_exact(reordered, CostWeights{}).cost.total == doctest::Approx(base));

        Instance relabeled = inst;
        std::shuffle(relabeled.sites.begin(), relabeled.sites.end(), rng);
        CHECK(solve_exact(relabeled, CostWeights{}).cost.total == doctest::Approx(base));

        CostWeights scaled;
        scaled.mec_cost *= 3.5;
        scaled.server_cost *= 3.5;
        scaled.traffic_cost *= 3.5;
        const ExactResult s = solve_exact(inst, scaled);
        CHECK(s.cost.total == doctest::Approx(3.5 * base));
        CHECK(s.placement == solve_exact(inst, CostWeights{}).placement);
    }
}

TEST_CASE("ties resolve deterministically") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const Instance inst = oracle::toy_instance(rng());
        if (!oracle::exhaustive_optimum(inst, CostWeights{}, Connectivity::single).feasible) continue;
        ExactConfig cfg;
        cfg.mode = Connectivity::single;
        const auto a = solve_exact(inst, CostWeights{}, cfg);
        const auto b = solve_exact(inst, CostWeights{}, cfg);
        CHECK(a.placement == b.placement);
        // Under single connectivity every tie between (a, b) and (b, a) resolves to a < b.
        for (std::size_t r = 0; r < inst.requests.size(); ++r)
            CHECK(a.placement.at(r)->primary.mec < a.placement.at(r)->backup.mec);
    }
}

TEST_CASE("node cap returns a feasible incumbent and a trace") {
    std::mt19937_64 rng(3);
    Instance inst;
    do inst = oracle::toy_instance(rng(), {4, 3, 2, 8, 3, 4});
    while (inst.requests.size() < 3 || !oracle::exhaustive_optimum(inst, CostWeights{}, Connectivity::multi).feasible);
    std::ostringstream trace;
    ExactConfig cfg;
    cfg.trace = &trace;
    const ExactResult full = solve_exact(inst, CostWeights{}, cfg);
    CHECK(full.proven_optimal);
    CHECK(trace.str().find("exact incumbent") != std::string::npos);
    CHECK(trace.str().find("exact done") != std::string::npos);

    cfg.trace = nullptr;
    cfg.node_cap = 1;
    CHECK_THROWS_AS(solve_exact(inst, CostWeights{}, cfg), NoFeasiblePlacement);

    // Depth-first search reaches its first leaf after R + 1 nodes.
    if (full.nodes > inst.requests.size() + 2) {
        cfg.node_cap = full.nodes - 1;
        const ExactResult capped = solve_exact(inst, CostWeights{}, cfg);
        CHECK_FALSE(capped.proven_optimal);
        CHECK(check_feasibility(capped.placement, inst).empty());
        CHECK(capped.cost.total >= full.cost.total - 1e-9);
    }
}
