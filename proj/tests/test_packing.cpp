#include <doctest.h>

#include <random>

#include "mecslice/packing.hpp"
#include "oracles.hpp"

using namespace mecslice;

namespace {

bool fits(std::span<const int> demands, std::span<const int> caps, const std::vector<std::size_t>& assign) {
    std::vector<int> load(caps.size(), 0);
    for (std::size_t i = 0; i < demands.size(); ++i) load.at(assign[i]) += demands[i];
    for (std::size_t s = 0; s < caps.size(); ++s)
        if (load[s] > caps[s]) return false;
    return true;
}

Instance one_site(std::size_t servers, int vcpu, double bw = 1000.0) {
    Instance inst;
    inst.delays = DelayMatrix(1);
    inst.sites = {make_site(0, servers, vcpu, bw)};
    return inst;
}

}  // namespace

TEST_CASE("first-fit-decreasing") {
    const std::vector<int> caps{10, 10, 10};
    auto a = first_fit_decreasing(std::vector<int>{4, 7, 3, 6}, caps);
    REQUIRE(a);
    // 7 -> s0, 6 -> s1, 4 -> s1, 3 -> s0
    CHECK(*a == std::vector<std::size_t>{1, 0, 0, 1});
    CHECK(servers_used(*a) == 2);
    CHECK_FALSE(first_fit_decreasing(std::vector<int>{11}, caps));
    CHECK(first_fit_decreasing(std::vector<int>{}, caps)->empty());
}

TEST_CASE("FFD is not always optimal but the exact packer is") {
    // FFD: 6+5 | 4+4+3 | 2, optimum: 6+4+2 | 5+4+3
    const std::vector<int> caps(4, 12);
    const std::vector<int> items{6, 5, 4, 4, 3, 2};
    auto ffd = first_fit_decreasing(items, caps);
    auto exact = pack_min_servers(items, caps);
    REQUIRE(ffd);
    REQUIRE(exact);
    CHECK(servers_used(*ffd) == 3);
    CHECK(servers_used(*exact) == 2);
    CHECK(fits(items, caps, *exact));
}

TEST_CASE("exact packer matches brute force on random instances") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 300; ++t) {
        const std::size_t S = 1 + rng() % 4;
        std::vector<int> caps(S);
        for (auto& c : caps) c = 4 + static_cast<int>(rng() % 9);
        std::vector<int> items(rng() % 8);
        for (auto& i : items) i = 1 + static_cast<int>(rng() % 6);
        const auto brute = oracle::min_servers_bruteforce(items, caps);
        const auto exact = pack_min_servers(items, caps);
        REQUIRE(brute.has_value() == exact.has_value());
        if (exact) {
            CHECK(fits(items, caps, *exact));
            CHECK(servers_used(*exact) == *brute);
        }
    }
}

TEST_CASE("occupancy trial packing prefers active servers") {
    const Instance inst = one_site(3, 8);
    Occupancy occ(inst);
    const std::vector<Vnf> first{{3, 0.05}};
    occ.add(0, std::vector<std::size_t>{2}, first, 100.0);
    CHECK(occ.server_active(0, 2));
    CHECK(occ.mec_active(0));
    CHECK(occ.residual(0, 2) == 5);

    const std::vector<Vnf> next{{4, 0.05}, {2, 0.05}};
    auto s = occ.pack(0, next, 100.0);
    REQUIRE(s);
    // 4 goes to the active server 2, then 2 no longer fits there (1 left) and opens server 0.
    CHECK(*s == std::vector<std::size_t>{2, 0});
    // Excluding server 2 forces idle servers.
    auto e = occ.pack(0, next, 100.0, std::vector<std::size_t>{2});
    REQUIRE(e);
    CHECK(*e == std::vector<std::size_t>{0, 0});
    // Bandwidth cap.
    CHECK_FALSE(occ.pack(0, next, 901.0));

    occ.remove(0, std::vector<std::size_t>{2}, first, 100.0);
    CHECK_FALSE(occ.mec_active(0));
    CHECK(occ.active_servers() == 0);
    CHECK(occ == Occupancy(inst));
}

TEST_CASE("occupancy of a placement") {
    Instance inst = one_site(2, 8);
    inst.sites.push_back(make_site(0, 2, 8, 1000.0));
    SliceRequest r;
    r.vnfs = {{3, 0.05}, {2, 0.05}};
    r.service = {"x", 10.0, 5.0};
    inst.requests = {r};
    Placement p(Connectivity::multi, 1);
    p.assign(0, {{0, {0, 1}}, {1, {1, 1}}});
    const Occupancy occ = Occupancy::of(p, inst);
    CHECK(occ.load(0, 0) == 3);
    CHECK(occ.load(0, 1) == 2);
    CHECK(occ.load(1, 1) == 5);
    CHECK(occ.active_mecs() == 2);
    CHECK(occ.active_servers() == 3);
    CHECK(occ.bandwidth(1) == 10.0);
}
