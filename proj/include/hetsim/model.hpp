#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hetsim/errors.hpp"

namespace hetsim {

/// A computing device. `performance` is in abstract throughput units
/// (bytes of work per second, flop/s, ...) -- the modeler picks the unit and
/// keeps it consistent per system; the toolkit never converts.
struct Device {
    std::string id;
    std::string kind;       // free-form label, e.g. "cpu", "gpu"
    double performance = 0; // work units per second
    int ncores = 1;
    double p_idle_w = 0;
    double p_peak_w = 0;

    bool operator==(const Device&) const = default;
};

/// A network link between two devices. Links are undirected for routing and
/// cost purposes.
struct NetworkLink {
    std::string id;
    std::string a;
    std::string b;
    double t_startup_s = 0;
    double bandwidth_bps = 0;

    bool operator==(const NetworkLink&) const = default;
};

/// A heterogeneous system: devices plus network links. Immutable after
/// construction; safe to share read-only across simulation workers.
class SystemModel {
public:
    SystemModel() = default;

    /// Validates all invariants (unique ids, positive bandwidth/performance,
    /// p_idle <= p_peak, link endpoints resolve and differ). Throws
    /// ValidationError naming the offending field.
    static SystemModel make(std::vector<Device> devices, std::vector<NetworkLink> links);

    const std::vector<Device>& devices() const { return devices_; }
    const std::vector<NetworkLink>& links() const { return links_; }

    const Device* find_device(const std::string& id) const;
    const Device& device(const std::string& id) const; // throws ResolutionError
    const NetworkLink& link(const std::string& id) const;

    /// Link indices adjacent to a device, ordered by link id.
    const std::vector<std::size_t>& adjacent_links(const std::string& device_id) const;

    bool operator==(const SystemModel& o) const {
        return devices_ == o.devices_ && links_ == o.links_;
    }

private:
    std::vector<Device> devices_;    // sorted by id
    std::vector<NetworkLink> links_; // sorted by id
    std::map<std::string, std::size_t> device_index_;
    std::map<std::string, std::size_t> link_index_;
    std::map<std::string, std::vector<std::size_t>> adjacency_;
};

/// One process implementation: the behavior name resolves against the
/// behavior registry at load time; args parameterize the emitted operation
/// sequence. r_max absent means unbounded ("none (infinity)").
struct ProcessSpec {
    std::string name;
    std::string behavior;
    nlohmann::json args = nlohmann::json::object();
    std::int64_t r_min = 0;
    std::optional<std::int64_t> r_max;

    bool operator==(const ProcessSpec&) const = default;
};

/// An application: process implementations with instance requirements.
struct Application {
    std::vector<ProcessSpec> processes;

    const ProcessSpec* find_process(const std::string& name) const;
    const ProcessSpec& process(const std::string& name) const; // throws ResolutionError

    /// Throws ValidationError if names collide or r_min > r_max.
    void validate() const;

    bool operator==(const Application&) const = default;
};

/// Hardware capabilities: how many instances of a process a device can run.
/// Unlisted pairs default to 0.
class Capabilities {
public:
    void set(const std::string& device, const std::string& process, int max_instances);
    int limit(const std::string& device, const std::string& process) const;
    const std::map<std::pair<std::string, std::string>, int>& table() const { return table_; }

    bool operator==(const Capabilities&) const = default;

private:
    std::map<std::pair<std::string, std::string>, int> table_;
};

/// A process mapping: instance count per (device, process). Unlisted pairs
/// are 0; zero entries are never stored.
class Mapping {
public:
    void set(const std::string& device, const std::string& process, int count);
    int count(const std::string& device, const std::string& process) const;
    int total_instances(const std::string& process) const;
    /// Devices with at least one mapped instance of any process, sorted.
    std::vector<std::string> devices_used() const;
    const std::map<std::pair<std::string, std::string>, int>& table() const { return table_; }
    bool empty() const { return table_.empty(); }

    bool operator==(const Mapping&) const = default;

private:
    std::map<std::pair<std::string, std::string>, int> table_;
};

/// One violated feasibility clause of the mapping constraint set.
struct Violation {
    enum class Kind { CapabilityExceeded, BelowMin, AboveMax };
    Kind kind;
    std::string device;  // empty for BelowMin/AboveMax
    std::string process;
    std::int64_t bound = 0;
    std::int64_t actual = 0;

    std::string to_string() const;
};

/// Checks mapping feasibility: per-pair capability limits and per-process
/// instance totals within [r_min, r_max]. Returns every failed clause.
/// Throws ResolutionError if the mapping references unknown ids.
std::vector<Violation> validate_mapping(const SystemModel& system, const Application& app,
                                        const Capabilities& caps, const Mapping& mapping);

/// An execution parameter value: integer, real or string.
using ParamValue = std::variant<std::int64_t, double, std::string>;

/// A vector of named execution parameters.
using ParamVector = std::map<std::string, ParamValue>;

std::string param_to_string(const ParamValue& v);
double param_as_number(const ParamValue& v); // throws ParameterError for strings

/// A finite parameter space: per-name list of admissible values (ranges are
/// materialized at load time).
class ParamSpace {
public:
    void set_domain(const std::string& name, std::vector<ParamValue> values);
    const std::map<std::string, std::vector<ParamValue>>& domains() const { return domains_; }
    bool contains(const ParamVector& v) const;
    bool empty() const { return domains_.empty(); }

private:
    std::map<std::string, std::vector<ParamValue>> domains_;
};

} // namespace hetsim
