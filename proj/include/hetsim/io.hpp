#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetsim/engine.hpp"
#include "hetsim/sweep.hpp"

namespace hetsim {

// System documents:
// {"devices":[{"id","kind","performance","ncores","p_idle_w","p_peak_w"}],
//  "links":[{"id","a","b","t_startup_s","bandwidth_bps"}]}
SystemModel load_system(const nlohmann::json& doc);
SystemModel load_system_file(const std::string& path);
nlohmann::json save_system(const SystemModel& system);

// Application documents:
// {"processes":[{"name","behavior","args":{...},"r_min","r_max"}],
//  "capabilities":[{"device","process","max"}],
//  "cost_models":{"<process>.<op-kind>":{"phi","psi"}}}
// r_max may be the string "unbounded" or absent for no upper bound.
struct LoadedApplication {
    Application app;
    Capabilities caps;
    CostRegistry cost_models;
};
LoadedApplication load_application(const nlohmann::json& doc,
                                   const BehaviorRegistry& behaviors = BehaviorRegistry::global());
LoadedApplication load_application_file(const std::string& path,
                                        const BehaviorRegistry& behaviors = BehaviorRegistry::global());
nlohmann::json save_application(const Application& app, const Capabilities& caps,
                                const CostRegistry& costs);

// Mapping documents: {"<device>": {"<process>": count}}
Mapping load_mapping(const nlohmann::json& doc);
Mapping load_mapping_file(const std::string& path);
nlohmann::json save_mapping(const Mapping& mapping);

// Parameter vectors: {"<name>": int | real | string}
ParamVector load_params(const nlohmann::json& doc);
nlohmann::json save_params(const ParamVector& params);

// Result record:
// {"makespan_s","avg_power_w","max_power_w","per_device_energy_j":{...},
//  "params":{...},"mapping":{...}}
nlohmann::json result_to_json(const SimulationResult& result, const ParamVector& params,
                              const Mapping& mapping);

// Trace as CSV: time_s,device,delta_demand,label
void write_trace_csv(std::ostream& out, const EventTrace& trace);

// Suite documents:
// {"base":{"system":"path","application":"path","mapping":"path"|null,
//          "mapper":{"name":"round_robin","counts":{"<process>":N|"$param"}},
//          "params":{...},"idle_scope":"allocated"|"all"},
//  "sweep":{"<param>":{"from","to","step"}|{"values":[...]}},
//  "mappings":"fixed"|{"enumerate":N}
//            |{"power_limit":W,"device_power":{...},"worker_process":"slave"}}
// Relative paths resolve against `base_dir`. The cost registry comes from
// the referenced application document.
struct LoadedSuite {
    Suite suite;
    CostRegistry cost_models;
};
LoadedSuite load_suite(const nlohmann::json& doc, const std::string& base_dir,
                       const BehaviorRegistry& behaviors = BehaviorRegistry::global());
LoadedSuite load_suite_file(const std::string& path,
                            const BehaviorRegistry& behaviors = BehaviorRegistry::global());

// Fit samples CSV with header data_size,performance,seconds.
std::vector<FitSample> load_fit_samples_csv(std::istream& in);

} // namespace hetsim
