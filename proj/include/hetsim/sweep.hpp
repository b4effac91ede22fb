#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hetsim/engine.hpp"
#include "hetsim/mapping.hpp"

namespace hetsim {

/// Mapper configuration evaluated per expanded instance. Counts may be fixed
/// integers or references to a parameter of the instance ("$name" in JSON),
/// which is how a swept parameter like nslaves drives the mapping.
struct MapperConfig {
    std::string name = "round_robin";
    std::map<std::string, std::variant<std::int64_t, std::string>> counts; // int or param name
};

/// How mapping candidates are produced for each parameter vector.
struct MappingSource {
    enum class Kind { Fixed, Enumerate, PowerLimit };
    Kind kind = Kind::Fixed;
    std::int64_t enumerate_bound = 1;
    double power_limit_w = 0;
    std::map<std::string, double> device_power;
    std::string worker_process = "slave";
};

/// An optimizer suite: a base instance plus parameter domains and a mapping
/// source, expanded into concrete simulation instances.
struct Suite {
    SimulationInstance base;
    std::optional<MapperConfig> mapper; // used when the mapping source is Fixed
    ParamSpace sweep;
    MappingSource mappings;
};

/// One expanded instance. Instances that could not be constructed (e.g. an
/// infeasible mapping for this parameter vector) carry the error instead.
struct ExpandedInstance {
    SimulationInstance instance;
    ParamVector params;
    std::int64_t mapping_id = 0;
    std::optional<std::string> error;
};

/// Cartesian expansion in deterministic lexicographic order: parameter names
/// sorted, later names varying fastest, mapping candidates innermost.
/// Throws ExpansionError on structural problems (empty domains).
std::vector<ExpandedInstance> expand_suite(const Suite& suite);

/// Result slot for one instance: a result or a captured error.
struct RunOutcome {
    std::optional<SimulationResult> result;
    std::optional<std::string> error;

    bool ok() const { return result.has_value(); }
};

/// Runs all instances on `workers` threads. Output order matches input
/// order; per-instance failures are captured in place. Results are
/// identical for any worker count.
std::vector<RunOutcome> run_suite(std::span<const ExpandedInstance> instances, int workers,
                                  const CostRegistry& costs,
                                  const BehaviorRegistry& behaviors = BehaviorRegistry::global());

// --- Pareto machinery -------------------------------------------------------

/// A candidate point: objective vector (minimized component-wise) plus an
/// opaque payload index into whatever produced it.
struct ParetoPoint {
    std::vector<double> objectives;
    std::size_t payload = 0;
};

/// Indices of the non-dominated points, in input order. y dominates x iff
/// every objective of y is <= and at least one is <; duplicates of an
/// identical objective vector are mutually non-dominating and all kept.
/// Throws DimensionError on mixed dimensionality.
std::vector<std::size_t> pareto_indices(std::span<const ParetoPoint> points);

std::vector<ParetoPoint> pareto_set(std::span<const ParetoPoint> points);

/// Objective vectors of the Pareto set, sorted lexicographically ascending.
std::vector<std::vector<double>> pareto_front(std::span<const ParetoPoint> points);

/// Writes the sweep result table: columns
/// makespan_s,avg_power_w,pareto,<param columns...>,mapping_id,error
/// with the pareto flag computed over the successful rows' (makespan,
/// avg power) objectives. Returns the number of failed rows.
std::size_t write_sweep_csv(std::ostream& out, std::span<const ExpandedInstance> instances,
                            std::span<const RunOutcome> outcomes);

} // namespace hetsim
