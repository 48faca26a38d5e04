#ifndef MECSLICE_INSTANCE_IO_HPP
#define MECSLICE_INSTANCE_IO_HPP

#include <string>

#include <json.hpp>

#include "mecslice/model.hpp"

// JSON documents for instances, placements and cost weights.
//
// instance:  {"format": "mecslice-instance", "version": 1,
//             "delays_ms": [[...]],
//             "sites": [{"host": n, "servers_vcpu": [...], "bandwidth_mbps": b}],
//             "requests": [{"id", "master", "secondary",
//                           "service": {"name", "bandwidth_mbps", "max_delay_ms"},
//                           "vnfs": [{"vcpu", "processing_delay_ms"}]}]}
// placement: {"format": "mecslice-placement", "version": 1, "connectivity": "mc"|"sc",
//             "requests": [null | {"primary": {"mec", "servers"}, "backup": {...}}]}
// weights:   {"mec_cost", "server_cost", "traffic_cost",
//             "alpha_mec", "alpha_server", "alpha_traffic"}

namespace mecslice {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Instance& inst);
nlohmann::json to_json(const Placement& p);
nlohmann::json to_json(const CostWeights& w);

Instance instance_from_json(const nlohmann::json& j);
Placement placement_from_json(const nlohmann::json& j);
CostWeights weights_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mecslice

#endif  // MECSLICE_INSTANCE_IO_HPP
