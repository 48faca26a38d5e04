#ifndef MECSLICE_TOPOLOGY_HPP
#define MECSLICE_TOPOLOGY_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mecslice {

using NodeId = std::size_t;

/// Milliseconds. All delays in the library share this unit.
using Millis = double;

/// Fiber propagation constant used when a caller does not supply one.
inline constexpr double kDefaultMicrosPerKm = 5.0;

struct GeoPoint {
    double longitude = 0.0;
    double latitude = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct Node {
    std::string name;
    GeoPoint position;

    friend bool operator==(const Node&, const Node&) = default;
};

struct Link {
    std::string name;
    NodeId a = 0;
    NodeId b = 0;
    Millis delay = 0.0;

    friend bool operator==(const Link&, const Link&) = default;
};

struct Adjacency {
    NodeId neighbor;
    Millis delay;
};

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public TopologyError {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/**
 * Undirected substrate graph of base stations.
 *
 * Links are rejected on insertion if they would create a self-loop, a
 * parallel edge or carry a non-positive delay, so every Network value
 * satisfies those invariants. Connectivity is checked lazily by
 * all_pairs_delay().
 */
class Network {
public:
    Network() = default;
    explicit Network(std::string name) : name_(std::move(name)) {}

    NodeId add_node(std::string name, GeoPoint position);
    void add_link(std::string name, NodeId a, NodeId b, Millis delay);

    const std::string& name() const noexcept { return name_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t link_count() const noexcept { return links_.size(); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Link>& links() const noexcept { return links_; }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::span<const Adjacency> neighbors(NodeId id) const { return adjacency_.at(id); }

    std::optional<NodeId> find_node(std::string_view name) const;
    bool has_link(NodeId a, NodeId b) const;

    friend bool operator==(const Network& lhs, const Network& rhs) {
        return lhs.name_ == rhs.name_ && lhs.nodes_ == rhs.nodes_ && lhs.links_ == rhs.links_;
    }

private:
    std::string name_;
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<Adjacency>> adjacency_;
};

/// Dense symmetric matrix of shortest-path propagation delays.
class DelayMatrix {
public:
    DelayMatrix() = default;
    explicit DelayMatrix(std::size_t n, Millis fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    Millis operator()(NodeId a, NodeId b) const { return data_[a * n_ + b]; }
    Millis& operator()(NodeId a, NodeId b) { return data_[a * n_ + b]; }
    Millis at(NodeId a, NodeId b) const;

    friend bool operator==(const DelayMatrix&, const DelayMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Millis> data_;
};

/// Great-circle distance in km (haversine, mean Earth radius).
double great_circle_km(GeoPoint a, GeoPoint b);

/// Propagation delay over fiber between two coordinates.
Millis link_delay(GeoPoint a, GeoPoint b, double micros_per_km = kDefaultMicrosPerKm);

/**
 * Parses an SNDlib native-format network document.
 *
 * Only the NODES and LINKS sections are interpreted; META, DEMANDS and
 * ADMISSIBLE_PATHS are skipped. Link delays are derived from node
 * coordinates with link_delay().
 */
Network parse_sndlib(std::string_view text, double micros_per_km = kDefaultMicrosPerKm);
Network load_sndlib(const std::string& path, double micros_per_km = kDefaultMicrosPerKm);

/// Writes NODES and LINKS in SNDlib native format. parse_sndlib() of the
/// result reproduces the same Network.
std::string serialize_sndlib(const Network& net);

/// Dijkstra from every node. Throws TopologyError if any pair is unreachable.
DelayMatrix all_pairs_delay(const Network& net);

/// Reciprocal of the summed shortest-path delay from `node` to all others.
double closeness_centrality(const DelayMatrix& delays, NodeId node);

struct SiteSelectionOptions {
    std::size_t max_iterations = 100;
};

/**
 * Picks k MEC host sites: k-means over node coordinates, then the node of
 * highest closeness centrality within each cluster (ties to lowest id).
 * Returned ids are sorted ascending.
 */
std::vector<NodeId> select_mec_sites(const Network& net, const DelayMatrix& delays, std::size_t k,
                                     std::uint64_t seed, SiteSelectionOptions options = {});

nlohmann::json to_json(const Network& net);
nlohmann::json to_json(const DelayMatrix& delays);

}  // namespace mecslice

#endif  // MECSLICE_TOPOLOGY_HPP
