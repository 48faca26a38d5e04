#include "mecslice/instance_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mecslice {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad field '") + key + "': " + e.what());
    }
}

void expect_format(const json& j, const char* format) {
    if (!j.is_object()) throw FormatError(std::string("expected a ") + format + " object");
    if (j.contains("format") && j.at("format") != format)
        throw FormatError(std::string("expected format '") + format + "', got " + j.at("format").dump());
}

json mapping_json(const SliceMapping& m) { return {{"mec", m.mec}, {"servers", m.servers}}; }

SliceMapping mapping_from(const json& j) {
    return SliceMapping{field<std::size_t>(j, "mec"), field<std::vector<std::size_t>>(j, "servers")};
}

}  // namespace

json to_json(const Instance& inst) {
    json j;
    j["format"] = "mecslice-instance";
    j["version"] = 1;
    j["delays_ms"] = to_json(inst.delays);
    auto& sites = j["sites"] = json::array();
    for (const auto& s : inst.sites)
        sites.push_back({{"host", s.host}, {"servers_vcpu", s.server_capacity}, {"bandwidth_mbps", s.bandwidth}});
    auto& reqs = j["requests"] = json::array();
    for (const auto& r : inst.requests) {
        json vnfs = json::array();
        for (const auto& v : r.vnfs) vnfs.push_back({{"vcpu", v.vcpu}, {"processing_delay_ms", v.processing_delay}});
        reqs.push_back({{"id", r.id},
                        {"master", r.master},
                        {"secondary", r.secondary},
                        {"service",
                         {{"name", r.service.name},
                          {"bandwidth_mbps", r.service.bandwidth},
                          {"max_delay_ms", r.service.max_delay}}},
                        {"vnfs", std::move(vnfs)}});
    }
    return j;
}

json to_json(const Placement& p) {
    json j;
    j["format"] = "mecslice-placement";
    j["version"] = 1;
    j["connectivity"] = to_string(p.mode());
    auto& reqs = j["requests"] = json::array();
    for (std::size_t r = 0; r < p.request_count(); ++r) {
        const auto& rp = p.at(r);
        if (!rp)
            reqs.push_back(nullptr);
        else
            reqs.push_back({{"primary", mapping_json(rp->primary)}, {"backup", mapping_json(rp->backup)}});
    }
    return j;
}

json to_json(const CostWeights& w) {
    return {{"mec_cost", w.mec_cost},       {"server_cost", w.server_cost},   {"traffic_cost", w.traffic_cost},
            {"alpha_mec", w.alpha_mec},     {"alpha_server", w.alpha_server}, {"alpha_traffic", w.alpha_traffic}};
}

Instance instance_from_json(const json& j) {
    expect_format(j, "mecslice-instance");
    Instance inst;
    const auto rows = field<std::vector<std::vector<double>>>(j, "delays_ms");
    inst.delays = DelayMatrix(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a].size() != rows.size()) throw FormatError("delays_ms must be a square matrix");
        for (std::size_t b = 0; b < rows.size(); ++b) inst.delays(a, b) = rows[a][b];
    }
    for (const auto& s : field<json>(j, "sites")) {
        MecSite site;
        site.host = field<NodeId>(s, "host");
        site.server_capacity = field<std::vector<int>>(s, "servers_vcpu");
        site.bandwidth = field<double>(s, "bandwidth_mbps");
        if (site.host >= rows.size()) throw FormatError("site host outside the delay matrix");
        for (int c : site.server_capacity)
            if (c <= 0) throw FormatError("server capacity must be positive");
        inst.sites.push_back(std::move(site));
    }
    for (const auto& r : field<json>(j, "requests")) {
        SliceRequest req;
        req.id = field<int>(r, "id");
        req.master = field<NodeId>(r, "master");
        req.secondary = field<NodeId>(r, "secondary");
        if (req.master >= rows.size() || req.secondary >= rows.size())
            throw FormatError("request attachment outside the delay matrix");
        const auto& svc = field<json>(r, "service");
        req.service = ServiceType{field<std::string>(svc, "name"), field<double>(svc, "bandwidth_mbps"),
                                  field<double>(svc, "max_delay_ms")};
        if (!(req.service.bandwidth > 0.0) || !(req.service.max_delay > 0.0))
            throw FormatError("service bandwidth and max delay must be positive");
        for (const auto& v : field<json>(r, "vnfs")) {
            Vnf vnf{field<int>(v, "vcpu"), field<double>(v, "processing_delay_ms")};
            if (vnf.vcpu < 1 || vnf.processing_delay < 0.0) throw FormatError("invalid VNF demand");
            req.vnfs.push_back(vnf);
        }
        inst.requests.push_back(std::move(req));
    }
    return inst;
}

Placement placement_from_json(const json& j) {
    expect_format(j, "mecslice-placement");
    const auto mode_name = field<std::string>(j, "connectivity");
    Connectivity mode;
    if (mode_name == "mc")
        mode = Connectivity::multi;
    else if (mode_name == "sc")
        mode = Connectivity::single;
    else
        throw FormatError("connectivity must be 'mc' or 'sc'");
    const auto& reqs = field<json>(j, "requests");
    Placement p(mode, reqs.size());
    for (std::size_t r = 0; r < reqs.size(); ++r) {
        if (reqs[r].is_null()) continue;
        p.assign(r, RequestPlacement{mapping_from(field<json>(reqs[r], "primary")),
                                     mapping_from(field<json>(reqs[r], "backup"))});
    }
    return p;
}

CostWeights weights_from_json(const json& j) {
    CostWeights w;
    if (!j.is_object()) throw FormatError("weights must be an object");
    auto read = [&](const char* key, double& out) {
        if (j.contains(key)) out = field<double>(j, key);
        if (out < 0.0) throw FormatError(std::string("weight '") + key + "' must be non-negative");
    };
    read("mec_cost", w.mec_cost);
    read("server_cost", w.server_cost);
    read("traffic_cost", w.traffic_cost);
    read("alpha_mec", w.alpha_mec);
    read("alpha_server", w.alpha_server);
    read("alpha_traffic", w.alpha_traffic);
    return w;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("'" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace mecslice
