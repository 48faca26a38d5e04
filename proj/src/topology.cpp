#include "mecslice/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

namespace mecslice {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            tokens.push_back(line.substr(i, 1));
            ++i;
        } else {
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '(' &&
                   line[j] != ')')
                ++j;
            tokens.push_back(line.substr(i, j - i));
            i = j;
        }
    }
    return tokens;
}

double parse_double(std::string_view token, std::size_t line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ParseError(line, "expected a number, got '" + std::string(token) + "'");
    return value;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

enum class Section { none, nodes, links, skipped };

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : TopologyError("line " + std::to_string(line) + ": " + what), line_(line) {}

NodeId Network::add_node(std::string name, GeoPoint position) {
    if (name.empty()) throw TopologyError("node name must not be empty");
    if (find_node(name)) throw TopologyError("duplicate node '" + name + "'");
    nodes_.push_back(Node{std::move(name), position});
    adjacency_.emplace_back();
    return nodes_.size() - 1;
}

void Network::add_link(std::string name, NodeId a, NodeId b, Millis delay) {
    if (a >= nodes_.size() || b >= nodes_.size()) throw TopologyError("link '" + name + "' references unknown node");
    if (a == b) throw TopologyError("link '" + name + "' is a self-loop on '" + nodes_[a].name + "'");
    if (has_link(a, b))
        throw TopologyError("duplicate link '" + name + "' between '" + nodes_[a].name + "' and '" + nodes_[b].name +
                            "'");
    if (!(delay > 0.0)) throw TopologyError("link '" + name + "' must have a positive delay");
    links_.push_back(Link{std::move(name), a, b, delay});
    adjacency_[a].push_back({b, delay});
    adjacency_[b].push_back({a, delay});
}

std::optional<NodeId> Network::find_node(std::string_view name) const {
    for (NodeId i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].name == name) return i;
    return std::nullopt;
}

bool Network::has_link(NodeId a, NodeId b) const {
    if (a >= adjacency_.size()) return false;
    return std::any_of(adjacency_[a].begin(), adjacency_[a].end(),
                       [b](const Adjacency& adj) { return adj.neighbor == b; });
}

Millis DelayMatrix::at(NodeId a, NodeId b) const {
    if (a >= n_ || b >= n_) throw std::out_of_range("DelayMatrix index out of range");
    return data_[a * n_ + b];
}

double great_circle_km(GeoPoint a, GeoPoint b) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (b.latitude - a.latitude) * rad;
    const double dlon = (b.longitude - a.longitude) * rad;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.latitude * rad) * std::cos(b.latitude * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Millis link_delay(GeoPoint a, GeoPoint b, double micros_per_km) {
    return great_circle_km(a, b) * micros_per_km / 1000.0;
}

Network parse_sndlib(std::string_view text, double micros_per_km) {
    Network net;
    std::string network_name;
    struct PendingNode {
        std::string name;
        GeoPoint pos;
    };
    std::vector<std::pair<std::size_t, std::vector<std::string>>> link_lines;
    std::vector<std::pair<std::size_t, PendingNode>> node_lines;

    Section section = Section::none;
    int skip_depth = 0;
    bool seen_nodes = false;
    bool seen_links = false;
    std::size_t section_start = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::string_view trimmed = line;
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
        if (trimmed.empty() || trimmed.front() == '?') continue;
        if (trimmed.front() == '#') {
            constexpr std::string_view tag = "# network ";
            if (trimmed.starts_with(tag) && network_name.empty()) {
                network_name = std::string(trimmed.substr(tag.size()));
                while (!network_name.empty() && std::isspace(static_cast<unsigned char>(network_name.back())))
                    network_name.pop_back();
            }
            continue;
        }

        auto tokens = tokenize(trimmed);
        switch (section) {
        case Section::none: {
            if (tokens.size() < 2 || tokens[1] != "(")
                throw ParseError(line_no, "expected '<SECTION> (', got '" + std::string(trimmed) + "'");
            const std::string_view keyword = tokens[0];
            section_start = line_no;
            if (keyword == "NODES") {
                if (seen_nodes) throw ParseError(line_no, "repeated NODES section");
                seen_nodes = true;
                section = Section::nodes;
            } else if (keyword == "LINKS") {
                if (seen_links) throw ParseError(line_no, "repeated LINKS section");
                seen_links = true;
                section = Section::links;
            } else if (keyword == "META" || keyword == "DEMANDS" || keyword == "ADMISSIBLE_PATHS") {
                section = Section::skipped;
                skip_depth = 0;
                for (auto t : tokens) skip_depth += (t == "(") - (t == ")");
                if (skip_depth == 0) section = Section::none;
            } else {
                throw ParseError(line_no, "unknown section '" + std::string(keyword) + "'");
            }
            if ((keyword == "NODES" || keyword == "LINKS") && tokens.size() != 2)
                throw ParseError(line_no, "section header must end the line");
            break;
        }
        case Section::skipped:
            for (auto t : tokens) skip_depth += (t == "(") - (t == ")");
            if (skip_depth < 0) throw ParseError(line_no, "unbalanced ')'");
            if (skip_depth == 0) section = Section::none;
            break;
        case Section::nodes:
            if (tokens.size() == 1 && tokens[0] == ")") {
                section = Section::none;
                break;
            }
            if (tokens.size() != 5 || tokens[1] != "(" || tokens[4] != ")")
                throw ParseError(line_no, "malformed node entry, expected '<id> ( <longitude> <latitude> )'");
            {
                GeoPoint p{parse_double(tokens[2], line_no), parse_double(tokens[3], line_no)};
                if (std::abs(p.longitude) > 180.0 || std::abs(p.latitude) > 90.0)
                    throw ParseError(line_no, "coordinates out of range");
                node_lines.push_back({line_no, PendingNode{std::string(tokens[0]), p}});
            }
            break;
        case Section::links:
            if (tokens.size() == 1 && tokens[0] == ")") {
                section = Section::none;
                break;
            }
            if (tokens.size() < 5 || tokens[1] != "(" || tokens[4] != ")")
                throw ParseError(line_no, "malformed link entry, expected '<id> ( <source> <target> ) ...'");
            {
                int depth = 0;
                for (auto t : tokens) {
                    depth += (t == "(") - (t == ")");
                    if (depth < 0) break;
                }
                if (depth != 0) throw ParseError(line_no, "unbalanced parentheses in link entry");
                link_lines.push_back({line_no, {std::string(tokens[0]), std::string(tokens[2]), std::string(tokens[3])}});
            }
            break;
        }
    }
    if (section != Section::none) throw ParseError(section_start, "unterminated section");
    if (!seen_nodes) throw ParseError(line_no, "missing NODES section");
    if (!seen_links) throw ParseError(line_no, "missing LINKS section");

    net = Network(network_name);
    for (auto& [ln, pending] : node_lines) {
        try {
            net.add_node(pending.name, pending.pos);
        } catch (const TopologyError& e) {
            throw ParseError(ln, e.what());
        }
    }
    for (auto& [ln, fields] : link_lines) {
        auto a = net.find_node(fields[1]);
        auto b = net.find_node(fields[2]);
        if (!a) throw ParseError(ln, "link '" + fields[0] + "' references unknown node '" + fields[1] + "'");
        if (!b) throw ParseError(ln, "link '" + fields[0] + "' references unknown node '" + fields[2] + "'");
        try {
            net.add_link(fields[0], *a, *b, link_delay(net.node(*a).position, net.node(*b).position, micros_per_km));
        } catch (const TopologyError& e) {
            throw ParseError(ln, e.what());
        }
    }
    return net;
}

Network load_sndlib(const std::string& path, double micros_per_km) {
    std::ifstream in(path);
    if (!in) throw TopologyError("cannot open topology file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_sndlib(buf.str(), micros_per_km);
}

std::string serialize_sndlib(const Network& net) {
    std::ostringstream out;
    out << "?SNDlib native format; type: network; version: 1.0\n";
    if (!net.name().empty()) out << "# network " << net.name() << "\n";
    out << "\nNODES (\n";
    for (const auto& n : net.nodes())
        out << "  " << n.name << " ( " << format_double(n.position.longitude) << " "
            << format_double(n.position.latitude) << " )\n";
    out << ")\n\nLINKS (\n";
    for (const auto& l : net.links())
        out << "  " << l.name << " ( " << net.node(l.a).name << " " << net.node(l.b).name
            << " ) 0.00 0.00 0.00 0.00 ( )\n";
    out << ")\n";
    return out.str();
}

DelayMatrix all_pairs_delay(const Network& net) {
    const std::size_t n = net.node_count();
    constexpr Millis inf = std::numeric_limits<Millis>::infinity();
    DelayMatrix d(n, inf);
    using Entry = std::pair<Millis, NodeId>;
    for (NodeId src = 0; src < n; ++src) {
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        d(src, src) = 0.0;
        heap.push({0.0, src});
        while (!heap.empty()) {
            auto [dist, u] = heap.top();
            heap.pop();
            if (dist > d(src, u)) continue;
            for (const auto& adj : net.neighbors(u)) {
                const Millis nd = dist + adj.delay;
                if (nd < d(src, adj.neighbor)) {
                    d(src, adj.neighbor) = nd;
                    heap.push({nd, adj.neighbor});
                }
            }
        }
    }
    // Dijkstra sums in different orders per source; pin exact symmetry.
    std::size_t unreachable = 0;
    std::string listed;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) {
            if (d(a, b) == inf) {
                if (unreachable < 10) listed += " (" + net.node(a).name + ", " + net.node(b).name + ")";
                ++unreachable;
                continue;
            }
            const Millis v = std::min(d(a, b), d(b, a));
            d(a, b) = d(b, a) = v;
        }
    if (unreachable > 0)
        throw TopologyError("network is disconnected: " + std::to_string(unreachable) + " unreachable pairs:" + listed +
                            (unreachable > 10 ? " ..." : ""));
    return d;
}

double closeness_centrality(const DelayMatrix& delays, NodeId node) {
    double sum = 0.0;
    for (NodeId m = 0; m < delays.size(); ++m) sum += delays(node, m);
    return sum > 0.0 ? 1.0 / sum : 0.0;
}

std::vector<NodeId> select_mec_sites(const Network& net, const DelayMatrix& delays, std::size_t k, std::uint64_t seed,
                                     SiteSelectionOptions options) {
    const std::size_t n = net.node_count();
    if (k == 0 || k > n)
        throw TopologyError("MEC site count " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
    if (delays.size() != n) throw TopologyError("delay matrix does not match network size");

    auto sq_dist = [](GeoPoint a, GeoPoint b) {
        const double dx = a.longitude - b.longitude;
        const double dy = a.latitude - b.latitude;
        return dx * dx + dy * dy;
    };
    std::vector<GeoPoint> points;
    points.reserve(n);
    for (const auto& node : net.nodes()) points.push_back(node.position);

    // k-means++ seeding
    std::mt19937_64 rng(seed);
    std::vector<GeoPoint> centroids;
    centroids.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> nearest(n);
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::numeric_limits<double>::max();
            for (const auto& c : centroids) nearest[i] = std::min(nearest[i], sq_dist(points[i], c));
            total += nearest[i];
        }
        std::size_t pick = 0;
        if (total <= 0.0) {
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        } else {
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            pick = n;
            std::size_t last_positive = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (nearest[i] <= 0.0) continue;
                last_positive = i;
                if (r < nearest[i]) {
                    pick = i;
                    break;
                }
                r -= nearest[i];
            }
            if (pick == n) pick = last_positive;
        }
        centroids.push_back(points[pick]);
    }

    std::vector<std::size_t> assignment(n, k);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(points[i], centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double dd = sq_dist(points[i], centroids[c]);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (assignment[i] != best) {
                assignment[i] = best;
                changed = true;
            }
        }
        // An emptied cluster takes the point farthest from its own centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (std::find(assignment.begin(), assignment.end(), c) != assignment.end()) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto members = std::count(assignment.begin(), assignment.end(), assignment[i]);
                const double dd = sq_dist(points[i], centroids[assignment[i]]);
                if (members > 1 && dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            assignment[far] = c;
            changed = true;
        }
        for (std::size_t c = 0; c < k; ++c) {
            double sx = 0.0, sy = 0.0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (assignment[i] == c) {
                    sx += points[i].longitude;
                    sy += points[i].latitude;
                    ++count;
                }
            centroids[c] = GeoPoint{sx / static_cast<double>(count), sy / static_cast<double>(count)};
        }
        if (!changed) break;
    }

    std::vector<NodeId> sites;
    for (std::size_t c = 0; c < k; ++c) {
        std::optional<NodeId> best;
        double best_closeness = -1.0;
        for (NodeId i = 0; i < n; ++i) {
            if (assignment[i] != c) continue;
            const double cc = closeness_centrality(delays, i);
            if (cc > best_closeness) {
                best_closeness = cc;
                best = i;
            }
        }
        sites.push_back(*best);
    }
    std::sort(sites.begin(), sites.end());
    return sites;
}

nlohmann::json to_json(const Network& net) {
    nlohmann::json j;
    j["name"] = net.name();
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (NodeId i = 0; i < net.node_count(); ++i) {
        const auto& n = net.node(i);
        nodes.push_back({{"id", i}, {"name", n.name}, {"longitude", n.position.longitude}, {"latitude", n.position.latitude}});
    }
    auto& links = j["links"] = nlohmann::json::array();
    for (const auto& l : net.links()) links.push_back({{"name", l.name}, {"a", l.a}, {"b", l.b}, {"delay_ms", l.delay}});
    return j;
}

nlohmann::json to_json(const DelayMatrix& delays) {
    nlohmann::json rows = nlohmann::json::array();
    for (NodeId a = 0; a < delays.size(); ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (NodeId b = 0; b < delays.size(); ++b) row.push_back(delays(a, b));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace mecslice
