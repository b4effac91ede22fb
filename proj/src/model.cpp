#include "hetsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hetsim {

SystemModel SystemModel::make(std::vector<Device> devices, std::vector<NetworkLink> links) {
    std::sort(devices.begin(), devices.end(),
              [](const Device& x, const Device& y) { return x.id < y.id; });
    std::sort(links.begin(), links.end(),
              [](const NetworkLink& x, const NetworkLink& y) { return x.id < y.id; });

    SystemModel m;
    for (std::size_t i = 0; i < devices.size(); ++i) {
        const Device& d = devices[i];
        if (d.id.empty()) throw ValidationError("device id must not be empty");
        if (!m.device_index_.emplace(d.id, i).second)
            throw ValidationError("duplicate device id: " + d.id);
        if (!(d.performance > 0))
            throw ValidationError("device " + d.id + ": performance must be > 0");
        if (d.ncores < 1) throw ValidationError("device " + d.id + ": ncores must be >= 1");
        if (d.p_idle_w < 0) throw ValidationError("device " + d.id + ": p_idle_w must be >= 0");
        if (d.p_idle_w > d.p_peak_w)
            throw ValidationError("device " + d.id + ": p_idle_w exceeds p_peak_w");
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
        const NetworkLink& l = links[i];
        if (l.id.empty()) throw ValidationError("link id must not be empty");
        if (!m.link_index_.emplace(l.id, i).second)
            throw ValidationError("duplicate link id: " + l.id);
        if (l.t_startup_s < 0)
            throw ValidationError("link " + l.id + ": t_startup_s must be >= 0");
        if (!(l.bandwidth_bps > 0))
            throw ValidationError("link " + l.id + ": bandwidth_bps must be > 0");
        if (!m.device_index_.count(l.a))
            throw ValidationError("link " + l.id + ": endpoint a references unknown device " + l.a);
        if (!m.device_index_.count(l.b))
            throw ValidationError("link " + l.id + ": endpoint b references unknown device " + l.b);
        if (l.a == l.b) throw ValidationError("link " + l.id + ": endpoints must be distinct");
    }
    m.devices_ = std::move(devices);
    m.links_ = std::move(links);
    for (std::size_t i = 0; i < m.links_.size(); ++i) {
        m.adjacency_[m.links_[i].a].push_back(i);
        m.adjacency_[m.links_[i].b].push_back(i);
    }
    return m;
}

const Device* SystemModel::find_device(const std::string& id) const {
    auto it = device_index_.find(id);
    return it == device_index_.end() ? nullptr : &devices_[it->second];
}

const Device& SystemModel::device(const std::string& id) const {
    const Device* d = find_device(id);
    if (!d) throw ResolutionError("unknown device: " + id);
    return *d;
}

const NetworkLink& SystemModel::link(const std::string& id) const {
    auto it = link_index_.find(id);
    if (it == link_index_.end()) throw ResolutionError("unknown link: " + id);
    return links_[it->second];
}

const std::vector<std::size_t>& SystemModel::adjacent_links(const std::string& device_id) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = adjacency_.find(device_id);
    return it == adjacency_.end() ? kEmpty : it->second;
}

const ProcessSpec* Application::find_process(const std::string& name) const {
    for (const auto& p : processes)
        if (p.name == name) return &p;
    return nullptr;
}

const ProcessSpec& Application::process(const std::string& name) const {
    const ProcessSpec* p = find_process(name);
    if (!p) throw ResolutionError("unknown process: " + name);
    return *p;
}

void Application::validate() const {
    std::set<std::string> seen;
    for (const auto& p : processes) {
        if (p.name.empty()) throw ValidationError("process name must not be empty");
        if (!seen.insert(p.name).second)
            throw ValidationError("duplicate process name: " + p.name);
        if (p.r_min < 0) throw ValidationError("process " + p.name + ": r_min must be >= 0");
        if (p.r_max && *p.r_max < p.r_min)
            throw ValidationError("process " + p.name + ": r_min exceeds r_max");
    }
}

void Capabilities::set(const std::string& device, const std::string& process, int max_instances) {
    if (max_instances < 0)
        throw ValidationError("capability (" + device + ", " + process + ") must be >= 0");
    if (max_instances == 0)
        table_.erase({device, process});
    else
        table_[{device, process}] = max_instances;
}

int Capabilities::limit(const std::string& device, const std::string& process) const {
    auto it = table_.find({device, process});
    return it == table_.end() ? 0 : it->second;
}

void Mapping::set(const std::string& device, const std::string& process, int count) {
    if (count < 0)
        throw ValidationError("mapping (" + device + ", " + process + ") must be >= 0");
    if (count == 0)
        table_.erase({device, process});
    else
        table_[{device, process}] = count;
}

int Mapping::count(const std::string& device, const std::string& process) const {
    auto it = table_.find({device, process});
    return it == table_.end() ? 0 : it->second;
}

int Mapping::total_instances(const std::string& process) const {
    int total = 0;
    for (const auto& [key, n] : table_)
        if (key.second == process) total += n;
    return total;
}

std::vector<std::string> Mapping::devices_used() const {
    std::vector<std::string> out;
    for (const auto& [key, n] : table_)
        if (n > 0 && (out.empty() || out.back() != key.first)) out.push_back(key.first);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string Violation::to_string() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::CapabilityExceeded:
        os << "device " << device << ", process " << process << ": mapped " << actual
           << " instances, capability " << bound;
        break;
    case Kind::BelowMin:
        os << "process " << process << ": " << actual << " instances mapped, r_min " << bound;
        break;
    case Kind::AboveMax:
        os << "process " << process << ": " << actual << " instances mapped, r_max " << bound;
        break;
    }
    return os.str();
}

std::vector<Violation> validate_mapping(const SystemModel& system, const Application& app,
                                        const Capabilities& caps, const Mapping& mapping) {
    for (const auto& [key, n] : mapping.table()) {
        if (!system.find_device(key.first))
            throw ResolutionError("mapping references unknown device: " + key.first);
        if (!app.find_process(key.second))
            throw ResolutionError("mapping references unknown process: " + key.second);
    }
    for (const auto& [key, n] : caps.table()) {
        if (!system.find_device(key.first))
            throw ResolutionError("capabilities reference unknown device: " + key.first);
        if (!app.find_process(key.second))
            throw ResolutionError("capabilities reference unknown process: " + key.second);
    }

    std::vector<Violation> violations;
    for (const auto& [key, n] : mapping.table()) {
        const int cap = caps.limit(key.first, key.second);
        if (n > cap)
            violations.push_back({Violation::Kind::CapabilityExceeded, key.first, key.second, cap, n});
    }
    for (const auto& p : app.processes) {
        const int total = mapping.total_instances(p.name);
        if (total < p.r_min)
            violations.push_back({Violation::Kind::BelowMin, "", p.name, p.r_min, total});
        if (p.r_max && total > *p.r_max)
            violations.push_back({Violation::Kind::AboveMax, "", p.name, *p.r_max, total});
    }
    return violations;
}

std::string param_to_string(const ParamValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", *d);
        return buf;
    }
    return std::get<std::string>(v);
}

double param_as_number(const ParamValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw ParameterError("parameter value '" + std::get<std::string>(v) + "' is not numeric");
}

void ParamSpace::set_domain(const std::string& name, std::vector<ParamValue> values) {
    if (values.empty()) throw ExpansionError("parameter " + name + ": empty domain");
    domains_[name] = std::move(values);
}

bool ParamSpace::contains(const ParamVector& v) const {
    for (const auto& [name, values] : domains_) {
        auto it = v.find(name);
        if (it == v.end()) return false;
        if (std::find(values.begin(), values.end(), it->second) == values.end()) return false;
    }
    return true;
}

} // namespace hetsim
