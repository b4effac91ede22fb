#include "hetsim/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hetsim {

namespace {

nlohmann::json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return doc;
}

const nlohmann::json& require(const nlohmann::json& j, const char* field, const std::string& where) {
    if (!j.is_object() || !j.contains(field))
        throw ParseError(where + ": missing field '" + field + "'");
    return j.at(field);
}

double require_number(const nlohmann::json& j, const char* field, const std::string& where) {
    const nlohmann::json& v = require(j, field, where);
    if (!v.is_number()) throw ParseError(where + ": field '" + field + "' must be a number");
    return v.get<double>();
}

std::string require_string(const nlohmann::json& j, const char* field, const std::string& where) {
    const nlohmann::json& v = require(j, field, where);
    if (!v.is_string()) throw ParseError(where + ": field '" + field + "' must be a string");
    return v.get<std::string>();
}

ParamValue json_to_param(const nlohmann::json& v, const std::string& where) {
    if (v.is_number_integer()) return ParamValue{v.get<std::int64_t>()};
    if (v.is_number()) return ParamValue{v.get<double>()};
    if (v.is_string()) return ParamValue{v.get<std::string>()};
    throw ParseError(where + ": parameter values must be numbers or strings");
}

nlohmann::json param_to_json(const ParamValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

} // namespace

SystemModel load_system(const nlohmann::json& doc) {
    std::vector<Device> devices;
    for (const nlohmann::json& jd : require(doc, "devices", "system")) {
        Device d;
        d.id = require_string(jd, "id", "device");
        d.kind = jd.value("kind", std::string{});
        d.performance = require_number(jd, "performance", "device " + d.id);
        d.ncores = static_cast<int>(require_number(jd, "ncores", "device " + d.id));
        d.p_idle_w = require_number(jd, "p_idle_w", "device " + d.id);
        d.p_peak_w = require_number(jd, "p_peak_w", "device " + d.id);
        devices.push_back(std::move(d));
    }
    std::vector<NetworkLink> links;
    if (doc.contains("links")) {
        for (const nlohmann::json& jl : doc.at("links")) {
            NetworkLink l;
            l.id = require_string(jl, "id", "link");
            l.a = require_string(jl, "a", "link " + l.id);
            l.b = require_string(jl, "b", "link " + l.id);
            l.t_startup_s = require_number(jl, "t_startup_s", "link " + l.id);
            l.bandwidth_bps = require_number(jl, "bandwidth_bps", "link " + l.id);
            links.push_back(std::move(l));
        }
    }
    return SystemModel::make(std::move(devices), std::move(links));
}

SystemModel load_system_file(const std::string& path) { return load_system(parse_file(path)); }

nlohmann::json save_system(const SystemModel& system) {
    nlohmann::json devices = nlohmann::json::array();
    for (const Device& d : system.devices())
        devices.push_back({{"id", d.id},
                           {"kind", d.kind},
                           {"performance", d.performance},
                           {"ncores", d.ncores},
                           {"p_idle_w", d.p_idle_w},
                           {"p_peak_w", d.p_peak_w}});
    nlohmann::json links = nlohmann::json::array();
    for (const NetworkLink& l : system.links())
        links.push_back({{"id", l.id},
                         {"a", l.a},
                         {"b", l.b},
                         {"t_startup_s", l.t_startup_s},
                         {"bandwidth_bps", l.bandwidth_bps}});
    return {{"devices", devices}, {"links", links}};
}

LoadedApplication load_application(const nlohmann::json& doc, const BehaviorRegistry& behaviors) {
    LoadedApplication loaded;
    for (const nlohmann::json& jp : require(doc, "processes", "application")) {
        ProcessSpec p;
        p.name = require_string(jp, "name", "process");
        p.behavior = require_string(jp, "behavior", "process " + p.name);
        if (jp.contains("args")) {
            if (!jp.at("args").is_object())
                throw ParseError("process " + p.name + ": args must be an object");
            p.args = jp.at("args");
        }
        p.r_min = static_cast<std::int64_t>(require_number(jp, "r_min", "process " + p.name));
        if (jp.contains("r_max") && !jp.at("r_max").is_null()) {
            const nlohmann::json& rm = jp.at("r_max");
            if (rm.is_string()) {
                if (rm.get<std::string>() != "unbounded")
                    throw ParseError("process " + p.name + ": r_max must be a number or \"unbounded\"");
            } else if (rm.is_number()) {
                p.r_max = rm.get<std::int64_t>();
            } else {
                throw ParseError("process " + p.name + ": r_max must be a number or \"unbounded\"");
            }
        }
        if (!behaviors.resolves(p.behavior, p.name))
            throw ValidationError("process " + p.name + ": behavior '" + p.behavior +
                                  "' does not resolve against the registry");
        loaded.app.processes.push_back(std::move(p));
    }
    loaded.app.validate();

    if (doc.contains("capabilities")) {
        for (const nlohmann::json& jc : doc.at("capabilities")) {
            const std::string device = require_string(jc, "device", "capability");
            const std::string process = require_string(jc, "process", "capability");
            if (!loaded.app.find_process(process))
                throw ValidationError("capability references unknown process: " + process);
            loaded.caps.set(device, process,
                            static_cast<int>(require_number(jc, "max", "capability")));
        }
    }
    if (doc.contains("cost_models"))
        loaded.cost_models = CostRegistry::from_json(doc.at("cost_models"));
    return loaded;
}

LoadedApplication load_application_file(const std::string& path, const BehaviorRegistry& behaviors) {
    return load_application(parse_file(path), behaviors);
}

nlohmann::json save_application(const Application& app, const Capabilities& caps,
                                const CostRegistry& costs) {
    nlohmann::json processes = nlohmann::json::array();
    for (const ProcessSpec& p : app.processes) {
        nlohmann::json jp = {{"name", p.name}, {"behavior", p.behavior}, {"args", p.args},
                             {"r_min", p.r_min}};
        if (p.r_max)
            jp["r_max"] = *p.r_max;
        else
            jp["r_max"] = "unbounded";
        processes.push_back(std::move(jp));
    }
    nlohmann::json capabilities = nlohmann::json::array();
    for (const auto& [key, n] : caps.table())
        capabilities.push_back({{"device", key.first}, {"process", key.second}, {"max", n}});
    nlohmann::json doc = {{"processes", processes}, {"capabilities", capabilities}};
    if (!costs.models().empty()) doc["cost_models"] = costs.to_json();
    return doc;
}

Mapping load_mapping(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("mapping: expected an object of devices");
    Mapping m;
    for (const auto& [device, procs] : doc.items()) {
        if (!procs.is_object())
            throw ParseError("mapping." + device + ": expected an object of processes");
        for (const auto& [process, count] : procs.items()) {
            if (!count.is_number_integer())
                throw ParseError("mapping." + device + "." + process + ": count must be an integer");
            m.set(device, process, count.get<int>());
        }
    }
    return m;
}

Mapping load_mapping_file(const std::string& path) { return load_mapping(parse_file(path)); }

nlohmann::json save_mapping(const Mapping& mapping) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [key, n] : mapping.table()) doc[key.first][key.second] = n;
    return doc;
}

ParamVector load_params(const nlohmann::json& doc) {
    if (doc.is_null()) return {};
    if (!doc.is_object()) throw ParseError("params: expected an object");
    ParamVector params;
    for (const auto& [name, value] : doc.items())
        params[name] = json_to_param(value, "params." + name);
    return params;
}

nlohmann::json save_params(const ParamVector& params) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [name, value] : params) doc[name] = param_to_json(value);
    return doc;
}

nlohmann::json result_to_json(const SimulationResult& result, const ParamVector& params,
                              const Mapping& mapping) {
    nlohmann::json energy = nlohmann::json::object();
    for (const auto& [device, e] : result.per_device_energy_j) energy[device] = e;
    return {{"makespan_s", result.makespan_s},
            {"avg_power_w", result.avg_power_w},
            {"max_power_w", result.max_power_w},
            {"per_device_energy_j", energy},
            {"params", save_params(params)},
            {"mapping", save_mapping(mapping)}};
}

void write_trace_csv(std::ostream& out, const EventTrace& trace) {
    out << "time_s,device,delta_demand,label\n";
    char buf[64];
    for (const TraceRecord& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%.10g", r.time_s);
        out << buf << "," << r.device << "," << r.delta_demand << "," << r.label << "\n";
    }
}

namespace {

std::vector<ParamValue> parse_domain(const std::string& name, const nlohmann::json& spec) {
    const std::string where = "sweep." + name;
    if (spec.is_object() && spec.contains("values")) {
        std::vector<ParamValue> values;
        for (const nlohmann::json& v : spec.at("values")) values.push_back(json_to_param(v, where));
        if (values.empty()) throw ExpansionError(where + ": empty value list");
        return values;
    }
    if (spec.is_object() && spec.contains("from")) {
        const double from = require_number(spec, "from", where);
        const double to = require_number(spec, "to", where);
        const double step = require_number(spec, "step", where);
        if (!(step > 0)) throw ExpansionError(where + ": step must be > 0");
        if (to < from) throw ExpansionError(where + ": to must be >= from");
        const double count_f = std::floor((to - from) / step + 1e-9) + 1;
        if (count_f > 1e6) throw ExpansionError(where + ": domain larger than 10^6 values");
        const bool integral = spec.at("from").is_number_integer() &&
                              spec.at("to").is_number_integer() &&
                              spec.at("step").is_number_integer();
        std::vector<ParamValue> values;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(count_f); ++i) {
            if (integral)
                values.push_back(ParamValue{spec.at("from").get<std::int64_t>() +
                                            i * spec.at("step").get<std::int64_t>()});
            else
                values.push_back(ParamValue{from + static_cast<double>(i) * step});
        }
        return values;
    }
    throw ExpansionError(where + ": expected {\"from\",\"to\",\"step\"} or {\"values\":[...]}");
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

} // namespace

LoadedSuite load_suite(const nlohmann::json& doc, const std::string& base_dir,
                       const BehaviorRegistry& behaviors) {
    LoadedSuite loaded;
    const nlohmann::json& base = require(doc, "base", "suite");

    loaded.suite.base.system = std::make_shared<SystemModel>(
        load_system_file(resolve_path(base_dir, require_string(base, "system", "suite.base"))));
    LoadedApplication app = load_application_file(
        resolve_path(base_dir, require_string(base, "application", "suite.base")), behaviors);
    loaded.suite.base.app = std::make_shared<Application>(std::move(app.app));
    loaded.suite.base.caps = std::make_shared<Capabilities>(std::move(app.caps));
    loaded.cost_models = std::move(app.cost_models);

    if (base.contains("mapping") && !base.at("mapping").is_null())
        loaded.suite.base.mapping =
            load_mapping_file(resolve_path(base_dir, base.at("mapping").get<std::string>()));
    if (base.contains("mapper") && !base.at("mapper").is_null()) {
        const nlohmann::json& jm = base.at("mapper");
        MapperConfig mapper;
        mapper.name = jm.value("name", std::string{"round_robin"});
        if (jm.contains("counts")) {
            for (const auto& [process, v] : jm.at("counts").items()) {
                if (v.is_number_integer())
                    mapper.counts[process] = v.get<std::int64_t>();
                else if (v.is_string() && !v.get<std::string>().empty() &&
                         v.get<std::string>()[0] == '$')
                    mapper.counts[process] = v.get<std::string>().substr(1);
                else
                    throw ParseError("suite.base.mapper.counts." + process +
                                     ": expected an integer or \"$param\"");
            }
        }
        loaded.suite.mapper = std::move(mapper);
    }
    if (base.contains("params")) loaded.suite.base.params = load_params(base.at("params"));
    const std::string scope = base.value("idle_scope", std::string{"allocated"});
    if (scope == "allocated")
        loaded.suite.base.idle_scope = IdleScope::Allocated;
    else if (scope == "all")
        loaded.suite.base.idle_scope = IdleScope::All;
    else
        throw ParseError("suite.base.idle_scope: expected \"allocated\" or \"all\"");

    if (doc.contains("sweep")) {
        for (const auto& [name, spec] : doc.at("sweep").items())
            loaded.suite.sweep.set_domain(name, parse_domain(name, spec));
    }

    if (doc.contains("mappings")) {
        const nlohmann::json& jm = doc.at("mappings");
        if (jm.is_string()) {
            if (jm.get<std::string>() != "fixed")
                throw ParseError("suite.mappings: unknown source '" + jm.get<std::string>() + "'");
        } else if (jm.is_object() && jm.contains("enumerate")) {
            loaded.suite.mappings.kind = MappingSource::Kind::Enumerate;
            loaded.suite.mappings.enumerate_bound = jm.at("enumerate").get<std::int64_t>();
        } else if (jm.is_object() && jm.contains("power_limit")) {
            loaded.suite.mappings.kind = MappingSource::Kind::PowerLimit;
            loaded.suite.mappings.power_limit_w = jm.at("power_limit").get<double>();
            if (jm.contains("device_power"))
                for (const auto& [device, w] : jm.at("device_power").items())
                    loaded.suite.mappings.device_power[device] = w.get<double>();
            loaded.suite.mappings.worker_process =
                jm.value("worker_process", std::string{"slave"});
        } else {
            throw ParseError("suite.mappings: expected \"fixed\", {\"enumerate\":N} or "
                             "{\"power_limit\":W}");
        }
    }
    return loaded;
}

LoadedSuite load_suite_file(const std::string& path, const BehaviorRegistry& behaviors) {
    return load_suite(parse_file(path),
                      std::filesystem::path(path).parent_path().string(), behaviors);
}

std::vector<FitSample> load_fit_samples_csv(std::istream& in) {
    std::vector<FitSample> samples;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("fit samples: empty input");
    // Tolerate surrounding whitespace in the header.
    std::string header;
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) header += c;
    if (header != "data_size,performance,seconds")
        throw ParseError("fit samples: expected header data_size,performance,seconds");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            throw ParseError("fit samples: malformed line " + std::to_string(lineno));
        try {
            samples.push_back({std::stod(a), std::stod(b), std::stod(c)});
        } catch (const std::exception&) {
            throw ParseError("fit samples: non-numeric value on line " + std::to_string(lineno));
        }
    }
    return samples;
}

} // namespace hetsim
