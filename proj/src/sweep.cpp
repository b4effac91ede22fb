#include "hetsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace hetsim {

namespace {

Mapping run_mapper(const MapperConfig& mapper, const Suite& suite, const ParamVector& params) {
    if (mapper.name != "round_robin")
        throw ExpansionError("unknown mapper: " + mapper.name);
    std::map<std::string, std::int64_t> targets;
    for (const auto& [process, value] : mapper.counts) {
        if (const auto* fixed = std::get_if<std::int64_t>(&value)) {
            targets[process] = *fixed;
        } else {
            const std::string& param = std::get<std::string>(value);
            auto it = params.find(param);
            if (it == params.end())
                throw ExpansionError("mapper count for " + process + " references unknown parameter " +
                                     param);
            targets[process] = static_cast<std::int64_t>(param_as_number(it->second));
        }
    }
    return round_robin_map(*suite.base.system, *suite.base.app, *suite.base.caps, targets);
}

std::vector<std::pair<Mapping, std::int64_t>> mapping_candidates(const Suite& suite,
                                                                 const ParamVector& params,
                                                                 std::optional<std::string>& error) {
    try {
        switch (suite.mappings.kind) {
        case MappingSource::Kind::Fixed:
            if (suite.mapper) return {{run_mapper(*suite.mapper, suite, params), 0}};
            return {{suite.base.mapping, 0}};
        case MappingSource::Kind::Enumerate: {
            std::vector<std::pair<Mapping, std::int64_t>> out;
            std::int64_t id = 0;
            for (Mapping& m : enumerate_mappings(*suite.base.system, *suite.base.app,
                                                 *suite.base.caps, suite.mappings.enumerate_bound))
                out.emplace_back(std::move(m), id++);
            return out;
        }
        case MappingSource::Kind::PowerLimit:
            return {{select_and_map_under_limit(*suite.base.system, *suite.base.app,
                                                *suite.base.caps, suite.mappings.device_power,
                                                suite.mappings.power_limit_w,
                                                suite.mappings.worker_process),
                     0}};
        }
    } catch (const Error& e) {
        error = e.what();
    }
    return {};
}

} // namespace

std::vector<ExpandedInstance> expand_suite(const Suite& suite) {
    if (!suite.base.system || !suite.base.app || !suite.base.caps)
        throw ExpansionError("suite base missing system, application or capabilities");

    // Parameter combinations: names in sorted order, later names varying
    // fastest (row-major lexicographic order).
    std::vector<std::pair<std::string, const std::vector<ParamValue>*>> axes;
    for (const auto& [name, values] : suite.sweep.domains()) {
        if (values.empty()) throw ExpansionError("parameter " + name + ": empty domain");
        axes.emplace_back(name, &values);
    }

    std::vector<ParamVector> combos;
    ParamVector current = suite.base.params;
    std::function<void(std::size_t)> rec = [&](std::size_t axis) {
        if (axis == axes.size()) {
            combos.push_back(current);
            return;
        }
        for (const ParamValue& v : *axes[axis].second) {
            current[axes[axis].first] = v;
            rec(axis + 1);
        }
    };
    rec(0);

    std::vector<ExpandedInstance> out;
    for (const ParamVector& params : combos) {
        std::optional<std::string> error;
        auto candidates = mapping_candidates(suite, params, error);
        if (error) {
            ExpandedInstance inst;
            inst.instance = suite.base;
            inst.instance.params = params;
            inst.params = params;
            inst.error = error;
            out.push_back(std::move(inst));
            continue;
        }
        for (auto& [mapping, id] : candidates) {
            ExpandedInstance inst;
            inst.instance = suite.base;
            inst.instance.mapping = std::move(mapping);
            inst.instance.params = params;
            inst.params = params;
            inst.mapping_id = id;
            out.push_back(std::move(inst));
        }
    }
    return out;
}

std::vector<RunOutcome> run_suite(std::span<const ExpandedInstance> instances, int workers,
                                  const CostRegistry& costs, const BehaviorRegistry& behaviors) {
    if (workers < 1) throw ValidationError("worker count must be >= 1");
    std::vector<RunOutcome> outcomes(instances.size());

    const auto run_one = [&](std::size_t i) {
        const ExpandedInstance& inst = instances[i];
        if (inst.error) {
            outcomes[i].error = inst.error;
            return;
        }
        try {
            outcomes[i].result = simulate(inst.instance, costs, behaviors);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    };

    const int nthreads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), instances.size()));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < instances.size(); ++i) run_one(i);
        return outcomes;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= instances.size()) break;
                run_one(i);
            }
        });
    for (std::thread& t : pool) t.join();
    return outcomes;
}

std::vector<std::size_t> pareto_indices(std::span<const ParetoPoint> points) {
    if (points.empty()) return {};
    const std::size_t m = points[0].objectives.size();
    if (m == 0) throw DimensionError("objective vectors must be non-empty");
    for (const ParetoPoint& p : points) {
        if (p.objectives.size() != m)
            throw DimensionError("mixed objective dimensionality: " +
                                 std::to_string(p.objectives.size()) + " vs " + std::to_string(m));
        for (double v : p.objectives)
            if (!std::isfinite(v)) throw ValidationError("objective value is not finite");
    }

    std::vector<char> dominated(points.size(), 0);
    if (m == 2) {
        // Skyline sweep over (o0 asc, o1 asc). A point is dominated iff some
        // point with strictly smaller o0 has o1 <= its own, or some point
        // with equal o0 has strictly smaller o1.
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            const auto& a = points[x].objectives;
            const auto& b = points[y].objectives;
            if (a[0] != b[0]) return a[0] < b[0];
            return a[1] < b[1];
        });
        double best_prev = std::numeric_limits<double>::infinity(); // min o1 over smaller o0
        std::size_t i = 0;
        while (i < order.size()) {
            const double o0 = points[order[i]].objectives[0];
            std::size_t j = i;
            double group_min = std::numeric_limits<double>::infinity();
            while (j < order.size() && points[order[j]].objectives[0] == o0) {
                const double o1 = points[order[j]].objectives[1];
                if (best_prev <= o1 || group_min < o1) dominated[order[j]] = 1;
                group_min = std::min(group_min, o1);
                ++j;
            }
            best_prev = std::min(best_prev, group_min);
            i = j;
        }
    } else {
        for (std::size_t x = 0; x < points.size(); ++x) {
            for (std::size_t y = 0; y < points.size() && !dominated[x]; ++y) {
                if (x == y) continue;
                bool all_le = true, any_lt = false;
                for (std::size_t k = 0; k < m; ++k) {
                    all_le = all_le && points[y].objectives[k] <= points[x].objectives[k];
                    any_lt = any_lt || points[y].objectives[k] < points[x].objectives[k];
                }
                if (all_le && any_lt) dominated[x] = 1;
            }
        }
    }

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!dominated[i]) kept.push_back(i);
    return kept;
}

std::vector<ParetoPoint> pareto_set(std::span<const ParetoPoint> points) {
    std::vector<ParetoPoint> out;
    for (std::size_t i : pareto_indices(points)) out.push_back(points[i]);
    return out;
}

std::vector<std::vector<double>> pareto_front(std::span<const ParetoPoint> points) {
    std::vector<std::vector<double>> front;
    for (std::size_t i : pareto_indices(points)) front.push_back(points[i].objectives);
    std::sort(front.begin(), front.end());
    return front;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

} // namespace

std::size_t write_sweep_csv(std::ostream& out, std::span<const ExpandedInstance> instances,
                            std::span<const RunOutcome> outcomes) {
    if (instances.size() != outcomes.size())
        throw ValidationError("instances and outcomes differ in length");

    std::vector<std::string> param_names;
    for (const ExpandedInstance& inst : instances)
        for (const auto& [name, value] : inst.params)
            if (std::find(param_names.begin(), param_names.end(), name) == param_names.end())
                param_names.push_back(name);
    std::sort(param_names.begin(), param_names.end());

    std::vector<ParetoPoint> points;
    std::vector<std::size_t> point_rows;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].ok()) continue;
        points.push_back(
            {{outcomes[i].result->makespan_s, outcomes[i].result->avg_power_w}, points.size()});
        point_rows.push_back(i);
    }
    std::vector<char> pareto(outcomes.size(), 0);
    for (std::size_t k : pareto_indices(points)) pareto[point_rows[k]] = 1;

    out << "makespan_s,avg_power_w,pareto";
    for (const std::string& name : param_names) out << "," << name;
    out << ",mapping_id,error\n";

    std::size_t failures = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const ExpandedInstance& inst = instances[i];
        if (outcomes[i].ok()) {
            const SimulationResult& r = *outcomes[i].result;
            out << format_double(r.makespan_s) << "," << format_double(r.avg_power_w) << ","
                << (pareto[i] ? "true" : "false");
        } else {
            ++failures;
            out << ",,false";
        }
        for (const std::string& name : param_names) {
            out << ",";
            auto it = inst.params.find(name);
            if (it != inst.params.end()) out << param_to_string(it->second);
        }
        out << "," << inst.mapping_id << ",";
        if (!outcomes[i].ok()) out << csv_safe(*outcomes[i].error);
        out << "\n";
    }
    return failures;
}

} // namespace hetsim
