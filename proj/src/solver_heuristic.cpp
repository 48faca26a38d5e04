#include "mecslice/solver_heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace mecslice {

namespace {

struct UnitCosts {
    double mec, server, traffic;

    explicit UnitCosts(const CostWeights& w)
        : mec(w.alpha_mec * w.mec_cost), server(w.alpha_server * w.server_cost),
          traffic(w.alpha_traffic * w.traffic_cost) {}
};

bool latency_ok(const Instance& inst, const SliceRequest& req, NodeId attachment, std::size_t m) {
    return e2e_delay(req, attachment, inst.sites[m], inst.delays) <= req.service.max_delay + 1e-9;
}

std::size_t fresh_servers(const Occupancy& occ, std::size_t m, const std::vector<std::size_t>& servers) {
    std::set<std::size_t> distinct(servers.begin(), servers.end());
    return static_cast<std::size_t>(
        std::count_if(distinct.begin(), distinct.end(), [&](std::size_t s) { return !occ.server_active(m, s); }));
}

struct PairTrial {
    MecPair pair;
    std::vector<std::size_t> primary_servers;
    std::vector<std::size_t> backup_servers;
    double increment = 0.0;
};

// Packs both slices of request r into the pair against the current occupancy
// and prices what the placement would newly consume.
std::optional<PairTrial> try_pair(const Occupancy& occ, const Instance& inst, std::size_t r, MecPair pair,
                                  Connectivity mode, const UnitCosts& unit,
                                  std::span<const std::size_t> exclude_primary = {},
                                  std::span<const std::size_t> exclude_backup = {}) {
    const SliceRequest& req = inst.requests[r];
    auto ps = occ.pack(pair.primary, req.vnfs, req.service.bandwidth, exclude_primary);
    if (!ps) return std::nullopt;
    auto bs = occ.pack(pair.backup, req.vnfs, req.service.bandwidth, exclude_backup);
    if (!bs) return std::nullopt;
    PairTrial t{pair, std::move(*ps), std::move(*bs), 0.0};
    const std::size_t new_mecs = !occ.mec_active(pair.primary) + !occ.mec_active(pair.backup);
    const std::size_t new_servers =
        fresh_servers(occ, pair.primary, t.primary_servers) + fresh_servers(occ, pair.backup, t.backup_servers);
    t.increment = unit.mec * static_cast<double>(new_mecs) + unit.server * static_cast<double>(new_servers) +
                  unit.traffic * pair_traffic(inst, r, pair, mode);
    return t;
}

auto pair_order_key(MecPair p) { return std::make_tuple(std::min(p.primary, p.backup), std::max(p.primary, p.backup), p.primary); }

void commit(Placement& p, Occupancy& occ, const Instance& inst, std::size_t r, PairTrial&& t) {
    RequestPlacement rp{{t.pair.primary, std::move(t.primary_servers)}, {t.pair.backup, std::move(t.backup_servers)}};
    occ.add(rp.primary, inst.requests[r]);
    occ.add(rp.backup, inst.requests[r]);
    p.assign(r, std::move(rp));
}

std::vector<std::size_t> latency_order(const Instance& inst, std::span<const std::size_t> requests) {
    std::vector<std::size_t> order(requests.begin(), requests.end());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = inst.requests[a];
        const auto& rb = inst.requests[b];
        return std::make_tuple(ra.service.max_delay, ra.service.bandwidth, ra.id) <
               std::make_tuple(rb.service.max_delay, rb.service.bandwidth, rb.id);
    });
    return order;
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffu;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t placement_hash(const Placement& p) {
    std::uint64_t h = 14695981039346656037ULL;
    h = fnv1a(h, static_cast<std::uint64_t>(p.mode()));
    for (std::size_t r = 0; r < p.request_count(); ++r) {
        const auto& rp = p.at(r);
        if (!rp) {
            h = fnv1a(h, ~0ULL);
            continue;
        }
        for (const SliceMapping* sm : {&rp->primary, &rp->backup}) {
            h = fnv1a(h, sm->mec);
            for (std::size_t s : sm->servers) h = fnv1a(h, s);
        }
    }
    return h;
}

void evaluate(Chromosome& c, const Instance& inst, const CostWeights& w) {
    double traffic = 0.0;
    for (std::size_t r = 0; r < c.placement.request_count(); ++r) {
        const auto& rp = c.placement.at(r);
        if (rp) traffic += pair_traffic(inst, r, {rp->primary.mec, rp->backup.mec}, c.placement.mode());
    }
    c.mecs = c.occupancy.active_mecs();
    c.servers = c.occupancy.active_servers();
    c.cost.mec = w.mec_cost * static_cast<double>(c.mecs);
    c.cost.server = w.server_cost * static_cast<double>(c.servers);
    c.cost.traffic = w.traffic_cost * traffic;
    c.cost.total = w.alpha_mec * c.cost.mec + w.alpha_server * c.cost.server + w.alpha_traffic * c.cost.traffic;
    c.hash = placement_hash(c.placement);
}

// Moves one slice of request r to `dest`, FFD-repacking it there.
bool relocate(Chromosome& c, const Instance& inst, std::size_t r, bool backup, std::size_t dest) {
    const SliceRequest& req = inst.requests[r];
    RequestPlacement rp = *c.placement.at(r);
    SliceMapping& moving = backup ? rp.backup : rp.primary;
    const SliceMapping& other = backup ? rp.primary : rp.backup;
    if (dest == other.mec || dest == moving.mec) return false;
    const NodeId attachment = backup ? backup_attachment(req, c.placement.mode()) : req.master;
    if (!latency_ok(inst, req, attachment, dest)) return false;
    c.occupancy.remove(moving, req);
    auto servers = c.occupancy.pack(dest, req.vnfs, req.service.bandwidth);
    if (!servers) {
        c.occupancy.add(moving, req);
        return false;
    }
    moving = SliceMapping{dest, std::move(*servers)};
    c.occupancy.add(moving, req);
    c.placement.assign(r, std::move(rp));
    return true;
}

void restore(Chromosome& c, const Instance& inst, std::size_t r, const RequestPlacement& previous) {
    const SliceRequest& req = inst.requests[r];
    const RequestPlacement& current = *c.placement.at(r);
    c.occupancy.remove(current.primary, req);
    c.occupancy.remove(current.backup, req);
    c.occupancy.add(previous.primary, req);
    c.occupancy.add(previous.backup, req);
    c.placement.assign(r, previous);
}

// Exchanges the primary and backup roles of request r; loads are unchanged.
bool swap_roles(Chromosome& c, const Instance& inst, std::size_t r) {
    const SliceRequest& req = inst.requests[r];
    RequestPlacement rp = *c.placement.at(r);
    if (!latency_ok(inst, req, req.master, rp.backup.mec)) return false;
    if (!latency_ok(inst, req, backup_attachment(req, c.placement.mode()), rp.primary.mec)) return false;
    std::swap(rp.primary, rp.backup);
    c.placement.assign(r, std::move(rp));
    return true;
}

// Uniform draw in (0, 1] so that a threshold of 0 never fires and 1 always does.
double draw_unit(std::mt19937_64& rng) { return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

std::vector<std::size_t> admissible_requests(const Instance& inst, Connectivity mode) {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < inst.requests.size(); ++r)
        if (!candidate_pairs(inst, r, mode).empty()) out.push_back(r);
    return out;
}

Placement solve_greedy(const Instance& inst, const CostWeights& weights) {
    const UnitCosts unit(weights);
    Placement p(Connectivity::multi, inst.requests.size());
    Occupancy occ(inst);
    std::vector<std::size_t> all(inst.requests.size());
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t r : latency_order(inst, all)) {
        std::optional<PairTrial> best;
        for (const MecPair& pair : candidate_pairs(inst, r, Connectivity::multi)) {
            auto trial = try_pair(occ, inst, r, pair, Connectivity::multi, unit);
            if (!trial) continue;
            if (!best || trial->increment < best->increment - 1e-9 ||
                (trial->increment <= best->increment + 1e-9 && pair_order_key(pair) < pair_order_key(best->pair)))
                best = std::move(trial);
        }
        if (best) commit(p, occ, inst, r, std::move(*best));
    }
    return p;
}

Placement solve_baseline(const Instance& inst, const CostWeights& /*weights*/, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Placement p(Connectivity::single, inst.requests.size());
    Occupancy occ(inst);
    std::vector<std::size_t> order(inst.requests.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> scan(inst.sites.size());
    for (std::size_t r : order) {
        const SliceRequest& req = inst.requests[r];
        std::iota(scan.begin(), scan.end(), 0);
        std::shuffle(scan.begin(), scan.end(), rng);
        bool placed = false;
        for (std::size_t a : scan) {
            if (!slice_fits_site(req, inst.sites[a]) || !latency_ok(inst, req, req.master, a)) continue;
            auto ps = occ.pack(a, req.vnfs, req.service.bandwidth);
            if (!ps) continue;
            for (std::size_t b : scan) {
                if (b == a || !slice_fits_site(req, inst.sites[b]) || !latency_ok(inst, req, req.master, b)) continue;
                auto bs = occ.pack(b, req.vnfs, req.service.bandwidth);
                if (!bs) continue;
                commit(p, occ, inst, r, PairTrial{{a, b}, std::move(*ps), std::move(*bs), 0.0});
                placed = true;
                break;
            }
            if (placed) break;
        }
    }
    return p;
}

Placement solve_nsp_proxy(const Instance& inst, const CostWeights& weights, std::uint64_t seed) {
    const UnitCosts unit(weights);
    std::mt19937_64 rng(seed);
    Placement p(Connectivity::single, inst.requests.size());
    Occupancy occ(inst);
    // 0 idle, 1 hosts primaries, 2 hosts backups
    std::vector<std::vector<int>> role(inst.sites.size());
    for (std::size_t m = 0; m < inst.sites.size(); ++m) role[m].assign(inst.sites[m].server_count(), 0);
    auto servers_with_role = [&](std::size_t m, int which) {
        std::vector<std::size_t> out;
        for (std::size_t s = 0; s < role[m].size(); ++s)
            if (role[m][s] == which) out.push_back(s);
        return out;
    };

    std::vector<std::size_t> order(inst.requests.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r : order) {
        const SliceRequest& req = inst.requests[r];
        std::vector<std::size_t> reachable;
        for (std::size_t m = 0; m < inst.sites.size(); ++m)
            if (slice_fits_site(req, inst.sites[m]) && latency_ok(inst, req, req.master, m)) reachable.push_back(m);

        std::optional<PairTrial> best;
        for (std::size_t a : reachable)
            for (std::size_t b : reachable) {
                if (a == b) continue;
                const auto no_backups = servers_with_role(a, 2);
                const auto no_primaries = servers_with_role(b, 1);
                auto trial = try_pair(occ, inst, r, {a, b}, Connectivity::single, unit, no_backups, no_primaries);
                if (!trial) continue;
                if (!best || trial->increment < best->increment - 1e-9 ||
                    (trial->increment <= best->increment + 1e-9 &&
                     pair_order_key(trial->pair) < pair_order_key(best->pair)))
                    best = std::move(trial);
            }
        if (!best) {
            // Onsite fallback: backup on primary-free servers of the same MEC.
            for (std::size_t a : reachable) {
                const SliceRequest& rq = req;
                auto ps = occ.pack(a, rq.vnfs, rq.service.bandwidth, servers_with_role(a, 2));
                if (!ps) continue;
                Occupancy trial_occ = occ;
                trial_occ.add(a, *ps, rq.vnfs, rq.service.bandwidth);
                auto excluded = servers_with_role(a, 1);
                excluded.insert(excluded.end(), ps->begin(), ps->end());
                auto bs = trial_occ.pack(a, rq.vnfs, rq.service.bandwidth, excluded);
                if (!bs) continue;
                best = PairTrial{{a, a}, std::move(*ps), std::move(*bs), 0.0};
                break;
            }
        }
        if (!best) continue;
        const MecPair pair = best->pair;
        for (std::size_t s : best->primary_servers) role[pair.primary][s] = 1;
        for (std::size_t s : best->backup_servers) role[pair.backup][s] = 2;
        commit(p, occ, inst, r, std::move(*best));
    }
    return p;
}

Chromosome make_chromosome(Placement placement, const Instance& inst, const CostWeights& weights) {
    Chromosome c;
    c.occupancy = Occupancy::of(placement, inst);
    c.placement = std::move(placement);
    evaluate(c, inst, weights);
    return c;
}

bool fitter(const Chromosome& a, const Chromosome& b) {
    const double slack = 1e-9 * std::max(1.0, std::abs(a.fitness()));
    if (a.fitness() < b.fitness() - slack) return true;
    if (a.fitness() > b.fitness() + slack) return false;
    return std::tie(a.mecs, a.servers, a.hash) < std::tie(b.mecs, b.servers, b.hash);
}

void validate(const GaConfig& cfg) {
    if (cfg.population < 2 || cfg.population % 2 != 0) throw GaError("population must be even and at least 2");
    if (cfg.generations < 1) throw GaError("generations must be at least 1");
    if (cfg.crossover_threshold < 0.0 || cfg.crossover_threshold > 1.0 || cfg.mutation_threshold < 0.0 ||
        cfg.mutation_threshold > 1.0)
        throw GaError("crossover and mutation thresholds must lie in [0, 1]");
}

std::vector<Chromosome> mga_init(const Instance& inst, const CostWeights& weights, std::size_t population,
                                 std::mt19937_64& rng, std::size_t retries) {
    if (population < 2) throw GaError("population must be at least 2");
    const auto admissible = admissible_requests(inst, Connectivity::multi);
    const auto order = latency_order(inst, admissible);
    std::vector<std::vector<MecPair>> pairs(inst.requests.size());
    for (std::size_t r : admissible) pairs[r] = candidate_pairs(inst, r, Connectivity::multi);

    std::vector<Chromosome> pop;
    pop.reserve(population);
    Placement greedy = solve_greedy(inst, weights);
    if (greedy.admitted_count() == admissible.size()) pop.push_back(make_chromosome(std::move(greedy), inst, weights));

    while (pop.size() < population) {
        bool built = false;
        for (std::size_t attempt = 0; attempt < retries && !built; ++attempt) {
            Placement p(Connectivity::multi, inst.requests.size());
            Occupancy occ(inst);
            bool ok = true;
            for (std::size_t r : order) {
                const SliceRequest& req = inst.requests[r];
                std::vector<PairTrial> feasible;
                for (const MecPair& pair : pairs[r]) {
                    auto ps = occ.pack(pair.primary, req.vnfs, req.service.bandwidth);
                    if (!ps) continue;
                    auto bs = occ.pack(pair.backup, req.vnfs, req.service.bandwidth);
                    if (!bs) continue;
                    feasible.push_back(PairTrial{pair, std::move(*ps), std::move(*bs), 0.0});
                }
                if (feasible.empty()) {
                    ok = false;
                    break;
                }
                std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
                commit(p, occ, inst, r, std::move(feasible[pick(rng)]));
            }
            if (ok) {
                pop.push_back(make_chromosome(std::move(p), inst, weights));
                built = true;
            }
        }
        if (!built)
            throw GaError("could not build a feasible chromosome after " + std::to_string(retries) + " attempts");
    }
    return pop;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& parent1, const Chromosome& parent2,
                                            const Instance& inst, const CostWeights& weights) {
    Chromosome c1 = parent1;
    Chromosome c2 = parent2;
    const std::size_t n = std::min(c1.placement.request_count(), c2.placement.request_count());
    for (std::size_t r = 0; r < n; ++r) {
        if (!c1.placement.admitted(r) || !c2.placement.admitted(r)) continue;
        const std::size_t ma = c1.placement.at(r)->primary.mec;
        const std::size_t mb = c1.placement.at(r)->backup.mec;
        const std::size_t mc = c2.placement.at(r)->primary.mec;
        const std::size_t md = c2.placement.at(r)->backup.mec;
        if (ma == md && mb != mc) {
            const RequestPlacement before = *c1.placement.at(r);
            if (relocate(c1, inst, r, /*backup=*/true, mc) && !relocate(c2, inst, r, /*backup=*/false, mb))
                restore(c1, inst, r, before);
        } else if (ma != md && mb == mc) {
            const RequestPlacement before = *c1.placement.at(r);
            if (relocate(c1, inst, r, /*backup=*/false, md) && !relocate(c2, inst, r, /*backup=*/true, ma))
                restore(c1, inst, r, before);
        } else if ((ma == md && mb == mc) || (ma == mc && mb == md)) {
            swap_roles(c1, inst, r);
            swap_roles(c2, inst, r);
        }
        // ma == mc with mb != md (and the fully disjoint case) leave the gene as is.
    }
    evaluate(c1, inst, weights);
    evaluate(c2, inst, weights);
    return {std::move(c1), std::move(c2)};
}

Chromosome mutate(const Chromosome& child, const Instance& inst, const CostWeights& weights, std::mt19937_64& rng) {
    Chromosome out = child;
    std::vector<std::size_t> admitted;
    for (std::size_t r = 0; r < out.placement.request_count(); ++r)
        if (out.placement.admitted(r)) admitted.push_back(r);
    if (admitted.empty()) return out;
    const std::size_t r = admitted[std::uniform_int_distribution<std::size_t>(0, admitted.size() - 1)(rng)];
    const SliceRequest& req = inst.requests[r];
    const std::size_t ma = out.placement.at(r)->primary.mec;
    const std::size_t mb = out.placement.at(r)->backup.mec;
    const NodeId backup_from = backup_attachment(req, out.placement.mode());

    std::vector<std::size_t> third;
    for (std::size_t m = 0; m < inst.sites.size(); ++m) {
        if (m == ma || m == mb) continue;
        if (latency_ok(inst, req, req.master, m) || latency_ok(inst, req, backup_from, m)) third.push_back(m);
    }
    if (third.empty()) return out;
    const std::size_t mc = third[std::uniform_int_distribution<std::size_t>(0, third.size() - 1)(rng)];
    if (relocate(out, inst, r, /*backup=*/false, mc) || relocate(out, inst, r, /*backup=*/true, mc))
        evaluate(out, inst, weights);
    return out;
}

MgaResult solve_mga(const Instance& inst, const CostWeights& weights, const GaConfig& cfg) {
    validate(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::vector<Chromosome> population = mga_init(inst, weights, cfg.population, rng, cfg.init_retries);
    std::stable_sort(population.begin(), population.end(), fitter);

    auto stats = [](std::size_t g, const std::vector<Chromosome>& pop) {
        GenerationStats s;
        s.generation = g;
        s.best = pop.front().fitness();
        s.worst = pop.back().fitness();
        double sum = 0.0;
        for (const auto& c : pop) sum += c.fitness();
        s.mean = sum / static_cast<double>(pop.size());
        return s;
    };

    MgaResult result;
    result.history.push_back(stats(0, population));

    const std::size_t P = cfg.population;
    std::vector<double> rank_weight(P);
    for (std::size_t i = 0; i < P; ++i) rank_weight[i] = static_cast<double>(P - i);
    std::discrete_distribution<std::size_t> select(rank_weight.begin(), rank_weight.end());

    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        std::vector<Chromosome> pool = population;
        pool.reserve(2 * P);
        for (std::size_t j = 0; j < P / 2; ++j) {
            const std::size_t i1 = select(rng);
            std::size_t i2 = select(rng);
            while (i2 == i1) i2 = select(rng);
            std::pair<Chromosome, Chromosome> children =
                draw_unit(rng) <= cfg.crossover_threshold
                    ? crossover(population[i1], population[i2], inst, weights)
                    : std::pair<Chromosome, Chromosome>{population[i1], population[i2]};
            for (Chromosome* child : {&children.first, &children.second}) {
                if (draw_unit(rng) <= cfg.mutation_threshold)
                    pool.push_back(mutate(*child, inst, weights, rng));
                else
                    pool.push_back(std::move(*child));
            }
        }
        std::stable_sort(pool.begin(), pool.end(), fitter);
        pool.resize(P);
        population = std::move(pool);
        result.history.push_back(stats(g, population));
    }
    result.placement = population.front().placement;
    result.cost = population.front().cost;
    return result;
}

std::string history_csv(const std::vector<GenerationStats>& history) {
    std::ostringstream out;
    out.precision(17);
    out << "generation,best,mean,worst\n";
    for (const auto& h : history) out << h.generation << ',' << h.best << ',' << h.mean << ',' << h.worst << '\n';
    return out.str();
}

}  // namespace mecslice
