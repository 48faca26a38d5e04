#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "mecslice/model.hpp"
#include "oracles.hpp"

using namespace mecslice;

namespace {

bool has_constraint(const std::vector<Violation>& vs, int c) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.constraint == c; });
}

// Four nodes on a line, 1 ms apart; MECs at nodes 0 and 3.
Instance line_instance() {
    Instance inst;
    inst.delays = DelayMatrix(4);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) inst.delays(a, b) = std::abs(double(a) - double(b));
    inst.sites = {make_site(0, 2, 8, 1000.0), make_site(3, 2, 8, 1000.0)};
    SliceRequest r;
    r.id = 0;
    r.master = 1;
    r.secondary = 2;
    r.service = {"t", 100.0, 2.5};
    r.vnfs = {{3, 0.05}, {2, 0.05}};
    inst.requests = {r};
    return inst;
}

Placement line_placement() {
    Placement p(Connectivity::multi, 1);
    p.assign(0, {{0, {0, 0}}, {1, {1, 1}}});
    return p;
}

}  // namespace

TEST_CASE("standard service table") {
    const auto& s = standard_services();
    REQUIRE(s.size() == 4);
    CHECK(s[0].bandwidth == 200.0);
    CHECK(s[0].max_delay == 2.0);
    CHECK(s[1].bandwidth == 100.0);
    CHECK(s[1].max_delay == 3.0);
    CHECK(s[2].bandwidth == 50.0);
    CHECK(s[2].max_delay == 5.0);
    CHECK(s[3].bandwidth == 250.0);
    CHECK(s[3].max_delay == 10.0);
}

TEST_CASE("default MEC site") {
    const MecSite m = make_site(4);
    CHECK(m.server_count() == 10);
    CHECK(m.total_capacity() == 560);
    CHECK(m.max_server_capacity() == 56);
    CHECK(m.bandwidth == 10000.0);
}

TEST_CASE("request generation") {
    DelayMatrix d(6);
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b) d(a, b) = a == b ? 0.0 : 1.0 + double((a * 7 + b * 7) % 5);
    const auto reqs = generate_requests(400, d, 42);
    REQUIRE(reqs.size() == 400);
    CHECK(reqs == generate_requests(400, d, 42));
    CHECK(reqs != generate_requests(400, d, 43));
    std::map<std::string, int> per_service;
    std::set<std::size_t> vnf_counts;
    std::set<int> vcpus;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const auto& r = reqs[i];
        CHECK(r.id == int(i));
        CHECK(r.master != r.secondary);
        CHECK(r.secondary == nearest_other_node(d, r.master));
        CHECK(r.vnfs.size() >= 2);
        CHECK(r.vnfs.size() <= 5);
        vnf_counts.insert(r.vnfs.size());
        for (const auto& v : r.vnfs) {
            CHECK(v.vcpu >= 1);
            CHECK(v.vcpu <= 4);
            CHECK(v.processing_delay == 0.05);
            vcpus.insert(v.vcpu);
        }
        ++per_service[r.service.name];
    }
    CHECK(per_service.size() == 4);
    for (const auto& [name, count] : per_service) CHECK(count > 60);
    CHECK(vnf_counts.size() == 4);
    CHECK(vcpus.size() == 4);
    CHECK(generate_requests(0, d, 1).empty());
}

TEST_CASE("nearest other node breaks ties by lowest id") {
    DelayMatrix d(4, 2.0);
    for (std::size_t i = 0; i < 4; ++i) d(i, i) = 0.0;
    d(3, 1) = d(1, 3) = 1.0;
    d(3, 2) = d(2, 3) = 1.0;
    CHECK(nearest_other_node(d, 3) == 1);
    CHECK(nearest_other_node(d, 0) == 1);
}

TEST_CASE("e2e delay adds VNF processing") {
    const Instance inst = line_instance();
    const auto& r = inst.requests[0];
    CHECK(e2e_delay(r, 1, inst.sites[0], inst.delays) == doctest::Approx(1.1));
    CHECK(e2e_delay(r, 2, inst.sites[1], inst.delays) == doctest::Approx(1.1));
    CHECK(e2e_delay(r, 1, inst.sites[1], inst.delays) == doctest::Approx(2.1));
}

TEST_CASE("cost of a hand-built placement") {
    const Instance inst = line_instance();
    const Placement p = line_placement();
    const CostBreakdown c = total_cost(p, inst, CostWeights{});
    CHECK(c.mec == 200.0);
    CHECK(c.server == 20.0);
    // b * (d(n1, MEC0) + d(n2, MEC1)) = 100 * (1 + 1)
    CHECK(c.traffic == doctest::Approx(200.0));
    CHECK(c.total == doctest::Approx(420.0));

    CostWeights w;
    w.alpha_mec = 0.5;
    w.alpha_server = 2.0;
    w.alpha_traffic = 0.0;
    CHECK(total_cost(p, inst, w).total == doctest::Approx(100.0 + 40.0));

    // Single connectivity measures the backup from the master.
    Placement sc(Connectivity::single, 1);
    sc.assign(0, *p.at(0));
    CHECK(total_cost(sc, inst, CostWeights{}).traffic == doctest::Approx(100.0 * (1 + 2)));
}

TEST_CASE("indicator views") {
    const Instance inst = line_instance();
    const Placement p = line_placement();
    CHECK(p.mec_used(0));
    CHECK(p.mec_used(1));
    CHECK(p.server_active(0, 0));
    CHECK_FALSE(p.server_active(0, 1));
    CHECK(p.server_active(1, 1));
    CHECK(p.primary_served_by(0, 0));
    CHECK_FALSE(p.primary_served_by(0, 1));
    CHECK(p.backup_served_by(0, 1));
    CHECK(p.primary_vnf_on(0, 1, 0, 0));
    CHECK_FALSE(p.primary_vnf_on(0, 1, 0, 1));
    CHECK(p.backup_vnf_on(0, 0, 1, 1));
    CHECK(p.used_mecs() == std::vector<std::size_t>{0, 1});
    CHECK(p.active_servers().size() == 2);
    CHECK(p.admitted_count() == 1);
    CHECK(p.rejected().empty());
}

TEST_CASE("feasibility checker flags each constraint") {
    const Instance base = line_instance();
    CHECK(check_feasibility(line_placement(), base).empty());

    SUBCASE("capacity") {
        Instance inst = base;
        inst.requests[0].vnfs = {{6, 0.05}, {5, 0.05}};
        const auto vs = check_feasibility(line_placement(), inst);
        CHECK(has_constraint(vs, 11));
        CHECK_THROWS_AS(total_cost(line_placement(), inst, CostWeights{}), InfeasiblePlacement);
    }
    SUBCASE("unknown MEC") {
        Placement p(Connectivity::multi, 1);
        p.assign(0, {{5, {0, 0}}, {1, {1, 1}}});
        CHECK(has_constraint(check_feasibility(p, base), 12));
        p.assign(0, {{0, {0, 0}}, {7, {1, 1}}});
        CHECK(has_constraint(check_feasibility(p, base), 13));
    }
    SUBCASE("anti-affinity") {
        Placement p(Connectivity::multi, 1);
        p.assign(0, {{0, {0, 0}}, {0, {1, 1}}});
        const auto vs = check_feasibility(p, base);
        CHECK(has_constraint(vs, 14));
        CHECK(vs.front().request == std::size_t{0});
    }
    SUBCASE("latency") {
        Instance inst = base;
        inst.requests[0].service.max_delay = 1.1;  // exactly the e2e delay
        CHECK(check_feasibility(line_placement(), inst).empty());
        inst.requests[0].service.max_delay = 1.09;
        const auto tight = check_feasibility(line_placement(), inst);
        CHECK(has_constraint(tight, 15));
        CHECK(has_constraint(tight, 16));
        // Under single connectivity only the backup gets further away.
        Instance sc = base;
        sc.requests[0].service.max_delay = 1.5;
        Placement p(Connectivity::single, 1);
        p.assign(0, *line_placement().at(0));
        const auto vs2 = check_feasibility(p, sc);
        CHECK_FALSE(has_constraint(vs2, 15));
        CHECK(has_constraint(vs2, 16));
    }
    SUBCASE("VNF mapping") {
        Placement p(Connectivity::multi, 1);
        p.assign(0, {{0, {0}}, {1, {1, 1}}});
        CHECK(has_constraint(check_feasibility(p, base), 17));
        p.assign(0, {{0, {0, 0}}, {1, {1, 9}}});
        CHECK(has_constraint(check_feasibility(p, base), 18));
    }
    SUBCASE("bandwidth") {
        Instance inst = base;
        inst.sites[0].bandwidth = 50.0;
        CHECK(has_constraint(check_feasibility(line_placement(), inst), 19));
    }
    SUBCASE("request count mismatch") {
        const auto vs = check_feasibility(Placement(Connectivity::multi, 3), base);
        REQUIRE(vs.size() == 1);
        CHECK(vs.front().constraint == 0);
    }
    SUBCASE("rejected requests are not checked") {
        Instance inst = base;
        inst.requests[0].vnfs = {{60, 0.05}};
        Placement p(Connectivity::multi, 1);
        CHECK(check_feasibility(p, inst).empty());
        CHECK(p.rejected() == std::vector<std::size_t>{0});
        CHECK(total_cost(p, inst, CostWeights{}).total == 0.0);
    }
}

TEST_CASE("violation text names the constraint") {
    Violation v{14, 3, 1, {}, "primary and backup slices share one MEC"};
    const std::string s = v.to_string();
    CHECK(s.find("14") != std::string::npos);
    CHECK(s.find("request 3") != std::string::npos);
    CHECK(s.find("mec 1") != std::string::npos);
}

TEST_CASE("candidate pairs respect latency and size") {
    Instance inst = line_instance();
    auto pairs = candidate_pairs(inst, 0, Connectivity::multi);
    CHECK(pairs.size() == 2);
    inst.requests[0].service.max_delay = 1.5;
    pairs = candidate_pairs(inst, 0, Connectivity::multi);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == MecPair{0, 1});
    CHECK(candidate_pairs(inst, 0, Connectivity::single).empty());
    inst.requests[0].service.max_delay = 9.0;
    inst.requests[0].vnfs = {{9, 0.05}};
    CHECK(candidate_pairs(inst, 0, Connectivity::multi).empty());
}

TEST_CASE("checker agrees with the independent oracle on random placements") {
    std::mt19937_64 rng(99);
    int feasible_seen = 0;
    for (int t = 0; t < 1000; ++t) {
        const Instance inst = oracle::toy_instance(rng());
        Placement p(rng() % 2 ? Connectivity::multi : Connectivity::single, inst.requests.size());
        for (std::size_t r = 0; r < inst.requests.size(); ++r) {
            if (rng() % 5 == 0) continue;
            auto slice = [&]() {
                SliceMapping m{static_cast<std::size_t>(rng() % inst.sites.size()), {}};
                for (std::size_t v = 0; v < inst.requests[r].vnfs.size(); ++v) m.servers.push_back(rng() % 2);
                return m;
            };
            p.assign(r, {slice(), slice()});
        }
        const bool ok = check_feasibility(p, inst).empty();
        CHECK(ok == oracle::feasible(p, inst));
        if (ok) {
            ++feasible_seen;
            const auto raw = oracle::recount(p, inst);
            const auto c = total_cost(p, inst, CostWeights{});
            CHECK(c.mec == doctest::Approx(100.0 * double(raw.mecs)));
            CHECK(c.server == doctest::Approx(10.0 * double(raw.servers)));
            CHECK(c.traffic == doctest::Approx(raw.traffic));
        }
    }
    CHECK(feasible_seen > 50);
}
