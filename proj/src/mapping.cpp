#include "hetsim/mapping.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace hetsim {

bool KnapsackSelection::contains(const std::string& id) const {
    return std::find(devices.begin(), devices.end(), id) != devices.end();
}

KnapsackSelection greedy_power_knapsack(std::vector<KnapsackItem> items, double capacity) {
    if (capacity < 0) throw ValidationError("knapsack capacity must be >= 0");
    for (const KnapsackItem& it : items) {
        if (it.value < 0) throw ValidationError("knapsack item " + it.device + ": value must be >= 0");
        if (it.weight < 0)
            throw ValidationError("knapsack item " + it.device + ": weight must be >= 0");
    }
    // value/weight ratio descending; zero weight counts as infinite ratio.
    // Compared cross-multiplied to avoid dividing by zero; ties by device id.
    std::stable_sort(items.begin(), items.end(), [](const KnapsackItem& x, const KnapsackItem& y) {
        const bool xz = x.weight == 0, yz = y.weight == 0;
        if (xz != yz) return xz;
        if (!xz) {
            const double lhs = x.value * y.weight, rhs = y.value * x.weight;
            if (lhs != rhs) return lhs > rhs;
        }
        return x.device < y.device;
    });

    KnapsackSelection sel;
    for (const KnapsackItem& it : items) {
        if (sel.total_weight + it.weight > capacity) continue;
        sel.devices.push_back(it.device);
        sel.total_value += it.value;
        sel.total_weight += it.weight;
    }

    // A single heavy item can beat the ratio-ordered bundle; returning the
    // better of the two keeps the selection at least as good as any one
    // fitting device.
    const KnapsackItem* best_single = nullptr;
    for (const KnapsackItem& it : items)
        if (it.weight <= capacity && (!best_single || it.value > best_single->value))
            best_single = &it;
    if (best_single && best_single->value > sel.total_value) {
        sel.devices = {best_single->device};
        sel.total_value = best_single->value;
        sel.total_weight = best_single->weight;
    }
    return sel;
}

Mapping round_robin_map(const SystemModel& system, const Application& app,
                        const Capabilities& caps,
                        const std::map<std::string, std::int64_t>& targets) {
    app.validate();
    for (const auto& [name, t] : targets) {
        app.process(name);
        if (t < 0) throw ValidationError("target for process " + name + " must be >= 0");
    }

    Mapping mapping;
    for (const ProcessSpec& proc : app.processes) {
        std::vector<std::string> capable; // device-id order
        std::int64_t capacity = 0;
        for (const Device& d : system.devices()) {
            const int cap = caps.limit(d.id, proc.name);
            if (cap > 0) {
                capable.push_back(d.id);
                capacity += cap;
            }
        }

        std::int64_t target;
        if (auto it = targets.find(proc.name); it != targets.end()) {
            target = it->second;
            if (target < proc.r_min || (proc.r_max && target > *proc.r_max))
                throw InfeasibleError("process " + proc.name + ": target " +
                                      std::to_string(target) + " outside [r_min, r_max]");
            if (target > capacity)
                throw InfeasibleError("process " + proc.name + ": target " +
                                      std::to_string(target) + " exceeds total capability " +
                                      std::to_string(capacity));
        } else {
            target = proc.r_max ? std::min(*proc.r_max, capacity) : capacity;
        }
        if (capacity < proc.r_min)
            throw InfeasibleError("process " + proc.name + ": total capability " +
                                  std::to_string(capacity) + " below r_min " +
                                  std::to_string(proc.r_min));

        std::int64_t placed = 0;
        while (placed < target) {
            bool progressed = false;
            for (const std::string& dev : capable) {
                if (placed >= target) break;
                if (mapping.count(dev, proc.name) < caps.limit(dev, proc.name)) {
                    mapping.set(dev, proc.name, mapping.count(dev, proc.name) + 1);
                    ++placed;
                    progressed = true;
                }
            }
            if (!progressed) break;
        }
    }
    return mapping;
}

Mapping select_and_map_under_limit(const SystemModel& system, const Application& app,
                                   const Capabilities& caps,
                                   const std::map<std::string, double>& per_device_max_power,
                                   double limit_w, const std::string& worker_process) {
    app.process(worker_process);
    const auto device_power = [&](const std::string& id) {
        auto it = per_device_max_power.find(id);
        return it == per_device_max_power.end() ? system.device(id).p_peak_w : it->second;
    };

    // Satisfy every other process's r_min first; those devices are paid for.
    Application others{{}};
    for (const ProcessSpec& p : app.processes)
        if (p.name != worker_process) others.processes.push_back(p);
    std::map<std::string, std::int64_t> min_targets;
    for (const ProcessSpec& p : others.processes) min_targets[p.name] = p.r_min;
    Mapping mapping = round_robin_map(system, others, caps, min_targets);

    double base_power = 0;
    for (const std::string& dev : mapping.devices_used()) base_power += device_power(dev);
    if (base_power > limit_w)
        throw InfeasibleError("required processes alone draw " + std::to_string(base_power) +
                              " W, above the limit " + std::to_string(limit_w) + " W");

    std::vector<KnapsackItem> items;
    for (const Device& d : system.devices()) {
        if (caps.limit(d.id, worker_process) < 1) continue;
        const bool paid = mapping.count(d.id, worker_process) > 0 ||
                          std::find_if(mapping.table().begin(), mapping.table().end(),
                                       [&](const auto& kv) {
                                           return kv.first.first == d.id && kv.second > 0;
                                       }) != mapping.table().end();
        items.push_back({d.id, d.performance, paid ? 0.0 : device_power(d.id)});
    }
    const KnapsackSelection sel = greedy_power_knapsack(std::move(items), limit_w - base_power);

    const ProcessSpec& worker = app.process(worker_process);
    std::int64_t placed = 0;
    for (const std::string& dev : sel.devices) {
        if (worker.r_max && placed >= *worker.r_max) break;
        mapping.set(dev, worker_process, 1);
        ++placed;
    }
    if (placed < worker.r_min)
        throw InfeasibleError("process " + worker_process + ": only " + std::to_string(placed) +
                              " instances fit under the " + std::to_string(limit_w) +
                              " W limit, r_min " + std::to_string(worker.r_min));
    return mapping;
}

std::vector<Mapping> enumerate_mappings(const SystemModel& system, const Application& app,
                                        const Capabilities& caps, std::int64_t bound) {
    if (bound < 1) throw ValidationError("enumeration bound must be >= 1");
    app.validate();

    struct Var {
        std::string device;
        std::string process;
        int cap;
    };
    std::vector<Var> vars; // (process in app order, device in id order)
    std::vector<std::pair<std::size_t, std::size_t>> proc_span;
    for (const ProcessSpec& proc : app.processes) {
        const std::size_t begin = vars.size();
        for (const Device& d : system.devices()) {
            const int cap = caps.limit(d.id, proc.name);
            if (cap > 0) vars.push_back({d.id, proc.name, cap});
        }
        proc_span.emplace_back(begin, vars.size());
    }

    std::vector<Mapping> out;
    std::vector<int> counts(vars.size(), 0);

    // Variable owner and, per variable, the capability still assignable to
    // its process among strictly earlier variables (assigned deeper).
    std::vector<std::size_t> owner(vars.size());
    std::vector<std::int64_t> cap_before(vars.size(), 0);
    for (std::size_t pi = 0; pi < proc_span.size(); ++pi) {
        std::int64_t prefix = 0;
        for (std::size_t v = proc_span[pi].first; v < proc_span[pi].second; ++v) {
            owner[v] = pi;
            cap_before[v] = prefix;
            prefix += vars[v].cap;
        }
    }

    std::vector<std::int64_t> proc_total(app.processes.size(), 0);

    // Emission in counting order with the first variable varying fastest:
    // the recursion assigns variables from the back, so the first variable
    // sits in the innermost loop.
    std::function<void(std::size_t)> rec = [&](std::size_t vi) {
        if (static_cast<std::int64_t>(out.size()) >= bound) return;
        if (vi == vars.size()) {
            for (std::size_t pi = 0; pi < app.processes.size(); ++pi)
                if (proc_total[pi] < app.processes[pi].r_min) return;
            Mapping m;
            for (std::size_t i = 0; i < vars.size(); ++i)
                if (counts[i] > 0) m.set(vars[i].device, vars[i].process, counts[i]);
            out.push_back(std::move(m));
            return;
        }
        const std::size_t v = vars.size() - 1 - vi;
        const std::size_t pi = owner[v];
        const ProcessSpec& proc = app.processes[pi];
        for (int c = 0; c <= vars[v].cap; ++c) {
            counts[v] = c;
            proc_total[pi] += c;
            const bool within_max = !proc.r_max || proc_total[pi] <= *proc.r_max;
            const bool min_reachable = proc_total[pi] + cap_before[v] >= proc.r_min;
            if (within_max && min_reachable) rec(vi + 1);
            proc_total[pi] -= c;
            counts[v] = 0;
            if (static_cast<std::int64_t>(out.size()) >= bound) return;
        }
    };
    rec(0);
    return out;
}

} // namespace hetsim
