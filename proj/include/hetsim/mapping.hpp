#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetsim/model.hpp"

namespace hetsim {

/// One device as a knapsack item: value is what the device contributes
/// (performance), weight is what it costs against the power cap (maximum
/// draw when running the application).
struct KnapsackItem {
    std::string device;
    double value = 0;
    double weight = 0;
};

struct KnapsackSelection {
    std::vector<std::string> devices; // in selection order
    double total_value = 0;
    double total_weight = 0;

    bool contains(const std::string& id) const;
};

/// Greedy 0/1 knapsack: items sorted by value/weight ratio descending
/// (weight 0 ranks first; ties by device id), each added iff the cumulative
/// weight stays within capacity. When a single fitting item is worth more
/// than the whole bundle, that item is returned instead. Approximate by
/// design.
KnapsackSelection greedy_power_knapsack(std::vector<KnapsackItem> items, double capacity);

/// Round-robin placement: for each process, cycle over capable devices in
/// device-id order, one instance at a time, until the target count is
/// reached. The default target is min(r_max, total capability); explicit
/// per-process targets must lie within [r_min, r_max]. Throws
/// InfeasibleError naming the process when r_min cannot be met.
Mapping round_robin_map(const SystemModel& system, const Application& app,
                        const Capabilities& caps,
                        const std::map<std::string, std::int64_t>& targets = {});

/// Device selection under a power cap: satisfies every non-worker process's
/// r_min by round robin, then greedily fills the remaining power budget with
/// worker-capable devices (value = performance, weight = per-device max
/// power; devices already paid for weigh nothing) and maps one worker
/// instance per selected device. Unlisted devices default to their p_peak.
Mapping select_and_map_under_limit(const SystemModel& system, const Application& app,
                                   const Capabilities& caps,
                                   const std::map<std::string, double>& per_device_max_power,
                                   double limit_w, const std::string& worker_process = "slave");

/// Deterministic enumeration of feasible mappings, truncated at `bound`.
/// Order: counting order over the (process in application order, device in
/// id order) count table with the first entry varying fastest.
std::vector<Mapping> enumerate_mappings(const SystemModel& system, const Application& app,
                                        const Capabilities& caps, std::int64_t bound);

} // namespace hetsim
