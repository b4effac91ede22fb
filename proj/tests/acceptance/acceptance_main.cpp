// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetsim/behaviors.hpp"
#include "hetsim/io.hpp"
#include "hetsim/mapping.hpp"
#include "hetsim/sweep.hpp"
#include "../fixtures.hpp"
#include "../oracles.hpp"

using namespace hetsim;
using fixtures::near;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

struct Criterion {
    int number;
    std::string title;
    bool ok = true;
    double elapsed_s = 0;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            g_notes.push_back("criterion " + std::to_string(number) + ": " + what);
        }
    }
};

void run_criterion(int number, const std::string& title, double time_budget_s,
                   const std::function<void(Criterion&)>& body) {
    Criterion c{number, title};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        g_notes.push_back("criterion " + std::to_string(number) + ": exception: " + e.what());
    }
    c.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_budget_s > 0 && c.elapsed_s > time_budget_s) {
        c.ok = false;
        g_notes.push_back("criterion " + std::to_string(number) + ": took " +
                          std::to_string(c.elapsed_s) + " s, budget " +
                          std::to_string(time_budget_s) + " s");
    }
    if (!c.ok) ++g_failures;
    std::printf("[%s] criterion %d: %s (%.2f s)\n", c.ok ? "PASS" : "FAIL", number,
                title.c_str(), c.elapsed_s);
}

// The eight published (time, power) points used as a Pareto fixture.
const std::vector<std::pair<double, double>> kFrontTable{
    {163528, 74.189}, {110282, 128.267}, {83646, 181.006}, {67425, 233.532},
    {56538, 284.916}, {48846, 336.171},  {42995, 386.517}, {38286, 437.595}};

// --- criterion 1 -------------------------------------------------------------

void pareto_machinery(Criterion& c) {
    std::vector<ParetoPoint> fixture;
    for (std::size_t i = 0; i < kFrontTable.size(); ++i)
        fixture.push_back({{kFrontTable[i].first, kFrontTable[i].second}, i});
    c.expect(pareto_indices(fixture).size() == 8, "all 8 published points must be kept");

    std::mt19937 rng(20250811);
    std::uniform_real_distribution<double> coord(0.0, 1000.0);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ParetoPoint> points;
        std::vector<std::vector<double>> objs;
        points.reserve(1000);
        for (int i = 0; i < 1000; ++i) {
            // Round to a grid so exact ties and duplicates occur.
            const double x = std::floor(coord(rng)), y = std::floor(coord(rng));
            points.push_back({{x, y}, static_cast<std::size_t>(i)});
            objs.push_back({x, y});
        }
        if (pareto_indices(points) != oracles::pareto_brute_force(objs)) ++mismatches;
    }
    c.expect(mismatches == 0,
             "pareto_set deviated from the quadratic oracle on " + std::to_string(mismatches) +
                 " of 100 clouds");
}

// --- criterion 2 -------------------------------------------------------------

void dnn_tradeoff_shape(Criterion& c) {
    const std::int64_t iterations = 1061;
    const std::vector<double> archives =
        fixtures::imbalanced_archives(static_cast<std::size_t>(iterations), 5e9, 0.25, 61);

    std::vector<double> time_actual, power_actual, time_balanced;
    for (int k = 1; k <= 8; ++k) {
        const SimulationResult actual =
            simulate(fixtures::dnn_instance(k, archives, iterations, false), CostRegistry{});
        const SimulationResult balanced =
            simulate(fixtures::dnn_instance(k, archives, iterations, true), CostRegistry{});
        time_actual.push_back(actual.makespan_s);
        power_actual.push_back(actual.avg_power_w);
        time_balanced.push_back(balanced.makespan_s);
    }

    for (int k = 2; k <= 8; ++k) {
        c.expect(time_actual[k - 1] < time_actual[k - 2],
                 "makespan must strictly decrease at k=" + std::to_string(k));
        c.expect(power_actual[k - 1] > power_actual[k - 2],
                 "avg power must strictly increase at k=" + std::to_string(k));
    }

    std::vector<ParetoPoint> points;
    for (int k = 1; k <= 8; ++k)
        points.push_back({{time_actual[k - 1], power_actual[k - 1]},
                          static_cast<std::size_t>(k)});
    c.expect(pareto_indices(points).size() == 8, "all 8 sweep points must be Pareto-optimal");

    c.expect(near(time_balanced[0], time_actual[0], 1e-9),
             "balanced and actual archives must coincide at k=1 within 1e-9 relative");
    for (int k = 2; k <= 8; ++k)
        c.expect(time_balanced[k - 1] <= time_actual[k - 1] * (1 + 1e-12),
                 "balanced archives must not be slower at k=" + std::to_string(k));
}

// --- criterion 3 -------------------------------------------------------------

void engine_vs_closed_form(Criterion& c) {
    const SimulationResult tiny = simulate(fixtures::tiny_scenario(), CostRegistry{});
    c.expect(near(tiny.makespan_s, 4.0, 1e-9), "tiny scenario makespan must be 4.0 s");
    c.expect(near(tiny.avg_power_w, 125.0, 1e-9), "tiny scenario avg power must be 125 W");
    c.expect(near(tiny.max_power_w, 160.0, 1e-9), "tiny scenario max power must be 160 W");
    c.expect(near(tiny.per_device_energy_j.at("gpu0"), 420.0, 1e-9),
             "tiny scenario GPU energy must be 420 J");
    c.expect(near(tiny.per_device_energy_j.at("cpu0"), 80.0, 1e-9),
             "tiny scenario CPU energy must be 80 J");

    // Serial training chain: per iteration two model transfers and one
    // compute on the single slave.
    {
        const std::int64_t n = 100;
        const std::vector<double> archives(static_cast<std::size_t>(n), 2e9);
        const SimulationResult r =
            simulate(fixtures::dnn_instance(1, archives, n, false), CostRegistry{});
        const double comm = 1e-4 + 27e6 / 12e9;
        const double expected = static_cast<double>(n) * (2 * comm + 2e9 / 1e10);
        c.expect(near(r.makespan_s, expected, 1e-9), "training chain must equal the analytic sum");
    }

    // Single-worker task farm: packages run back to back.
    {
        const SimulationResult r =
            simulate(fixtures::farm_instance({2e9}, 1e10, 5), CostRegistry{});
        c.expect(near(r.makespan_s, 5.0 * (1e10 / 5.0) / 2e9, 1e-9),
                 "single-worker farm must equal the serial package sum");
    }

    // Single-worker similarity farm with quadratic results, zero-cost links.
    {
        SimulationInstance inst = fixtures::farm_instance({1e9}, 0, 1, "vector_similarity",
                                                          {{"points", 800},
                                                           {"dims", 50},
                                                           {"chunk_points", 200}});
        const SimulationResult r = simulate(inst, CostRegistry{});
        const double order_b = 200.0 * 50.0 * 8.0;
        const double result_b = 200.0 * 200.0 * 8.0;
        const double per_chunk = order_b / 1e18 + order_b / 1e9 + result_b / 1e18;
        c.expect(near(r.makespan_s, 4.0 * per_chunk, 1e-9),
                 "similarity chain must equal the analytic sum");
    }
}

// --- criterion 4 -------------------------------------------------------------

void step_phenomenon(Criterion& c) {
    // Two speed classes at a 2:1 device-count ratio (two fast devices per
    // slow one) with a wide speed gap, the regime in which one late package
    // on the slow device stalls everyone else.
    const std::vector<double> speeds{10e9, 10e9, 1e9};
    const double total_work = 4.2e12;

    std::vector<double> makespan(25, 0.0);
    for (std::int64_t v = 1; v <= 24; ++v) {
        const SimulationResult r =
            simulate(fixtures::farm_instance(speeds, total_work, v), CostRegistry{});
        makespan[static_cast<std::size_t>(v)] = r.makespan_s;
        const std::size_t count = speeds.size() * static_cast<std::size_t>(v);
        const std::vector<double> packages(count, total_work / static_cast<double>(count));
        c.expect(near(r.makespan_s, oracles::list_schedule(packages, speeds), 1e-9),
                 "simulated farm must equal the list-scheduling oracle at v_dpm=" +
                     std::to_string(v));
    }

    c.expect(makespan[8] >= 1.5 * makespan[7],
             "balance point +1 must cost at least 1.5x the balance point");

    std::vector<std::size_t> minima;
    for (std::size_t v = 2; v <= 23; ++v)
        if (makespan[v] <= makespan[v - 1] && makespan[v] <= makespan[v + 1]) minima.push_back(v);
    c.expect(minima.size() >= 3, "the sweep must expose at least 3 local minima, found " +
                                     std::to_string(minima.size()));

    std::vector<double> steps;
    for (std::size_t i = 0; i < minima.size(); ++i) {
        if (minima[i] + 1 <= 24) steps.push_back(makespan[minima[i] + 1] - makespan[minima[i]]);
        if (i > 0)
            c.expect(makespan[minima[i]] <= makespan[minima[i - 1]] + 1e-9,
                     "local minima must not increase along the sweep");
    }
    c.expect(steps.size() >= 3, "need at least 3 step heights");
    for (std::size_t i = 1; i < steps.size(); ++i)
        c.expect(steps[i] <= steps[i - 1] + 1e-9, "step heights must not increase");
}

// --- criterion 5 -------------------------------------------------------------

void overlap_gain(Criterion& c) {
    const auto makespan_of = [](int workers, std::int64_t v_dpm, double f, double comp,
                                bool overlapped) {
        return simulate(fixtures::prefetch_instance(workers, v_dpm, f, comp, overlapped),
                        CostRegistry{})
            .makespan_s;
    };

    // Analytic pipeline bound, both regimes, one worker, k packages.
    for (const auto& [f, comp] : std::vector<std::pair<double, double>>{{2.0, 3.0}, {3.0, 2.0}}) {
        const int k = 9;
        const double serialized = makespan_of(1, k, f, comp, false);
        const double overlapped = makespan_of(1, k, f, comp, true);
        c.expect(near(serialized, k * (f + comp), 1e-9), "serialized farm must equal k(f+c)");
        c.expect(near(overlapped, f + (k - 1) * std::max(f, comp) + comp, 1e-9),
                 "prefetch farm must equal f + (k-1)max(f,c) + c");
    }

    // Data profile with the fetch at 15% of the iteration time, 12 packages.
    {
        const double f = 0.15, comp = 0.85;
        const int k = 12;
        const double serialized = makespan_of(1, k, f, comp, false);
        const double overlapped = makespan_of(1, k, f, comp, true);
        const double reduction = (serialized - overlapped) / serialized;
        c.expect(reduction >= 0.11 && reduction <= 0.16,
                 "overlap must recover 11-16% of the serialized time, got " +
                     std::to_string(100 * reduction) + "%");
    }
}

// --- criterion 6 -------------------------------------------------------------

void power_capped_mapping(Criterion& c) {
    std::mt19937 rng(4711);
    std::uniform_real_distribution<double> val(1.0, 100.0), wt(1.0, 60.0);

    int cap_violations = 0;
    double worst_gap = 0, gap_sum = 0;
    int oracle_instances = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        // Mostly small instances plus a tail up to 20 devices so the
        // exhaustive oracle stays cheap.
        const int n = (trial % 100 == 0) ? 17 + static_cast<int>(rng() % 4)
                                         : 1 + static_cast<int>(rng() % 16);
        std::vector<KnapsackItem> items;
        std::vector<double> values, weights;
        for (int i = 0; i < n; ++i) {
            items.push_back({"d" + std::to_string(i), val(rng), wt(rng)});
            values.push_back(items.back().value);
            weights.push_back(items.back().weight);
        }
        const double cap = wt(rng) * static_cast<double>(1 + rng() % 8);
        const KnapsackSelection sel = greedy_power_knapsack(items, cap);
        if (sel.total_weight > cap + 1e-9) ++cap_violations;

        const double optimum = oracles::knapsack_optimum(values, weights, cap);
        if (sel.total_value > optimum + 1e-9) ++cap_violations; // impossible by definition
        if (optimum > 0) {
            const double gap = (optimum - sel.total_value) / optimum;
            worst_gap = std::max(worst_gap, gap);
            gap_sum += gap;
            ++oracle_instances;
        }
    }
    c.expect(cap_violations == 0, "greedy exceeded the cap or the oracle optimum");
    std::printf("       criterion 6: greedy vs exhaustive on %d instances: mean gap %.3f%%, "
                "worst %.2f%%\n",
                oracle_instances, 100 * gap_sum / oracle_instances, 100 * worst_gap);

    // The documented suboptimal fixture.
    const KnapsackSelection fixture =
        greedy_power_knapsack({{"d1", 10, 5}, {"d2", 6, 4}, {"d3", 5, 3}}, 7.0);
    c.expect(fixture.devices == std::vector<std::string>{"d1"} && fixture.total_value == 10.0,
             "fixture selection must be {d1} at value 10");
    c.expect(oracles::knapsack_optimum({10, 6, 5}, {5, 4, 3}, 7.0) == 11.0,
             "fixture optimum must be 11");

    // Homogeneous 8-worker ladder: a rising cap never slows the farm down.
    std::vector<Device> devices{{"m0", "cpu", 1e9, 1, 0.0, 0.0}};
    std::vector<NetworkLink> links;
    Capabilities caps;
    caps.set("m0", "master", 1);
    std::map<std::string, double> power{{"m0", 0.0}};
    for (int i = 0; i < 8; ++i) {
        const std::string id = "w" + std::to_string(i);
        devices.push_back({id, "gpu", 2e9, 1, 10.0, 110.0});
        links.push_back({"l" + std::to_string(i), "m0", id, 0.0, 1e18});
        caps.set(id, "slave", 1);
        power[id] = 100.0;
    }
    const auto system = std::make_shared<SystemModel>(SystemModel::make(devices, links));

    Application app;
    ProcessSpec master;
    master.name = "master";
    master.behavior = "task_farm";
    master.args = {{"total_work", 4.8e12}, {"v_dpm", 2}};
    master.r_min = 1;
    master.r_max = 1;
    ProcessSpec slave = master;
    slave.name = "slave";
    slave.r_min = 1;
    slave.r_max = 8;
    app.processes = {master, slave};
    const auto app_ptr = std::make_shared<Application>(app);
    const auto caps_ptr = std::make_shared<Capabilities>(caps);

    double prev_makespan = std::numeric_limits<double>::infinity();
    int prev_count = 0;
    for (double limit = 100; limit <= 800; limit += 100) {
        const Mapping mapping =
            select_and_map_under_limit(*system, app, caps, power, limit, "slave");
        const int count = mapping.total_instances("slave");
        c.expect(count >= prev_count, "selected device count must not drop as the cap rises");
        c.expect(count == static_cast<int>(limit / 100.0),
                 "homogeneous ladder must map floor(limit/100) slaves");
        SimulationInstance inst;
        inst.system = system;
        inst.app = app_ptr;
        inst.caps = caps_ptr;
        inst.mapping = mapping;
        const SimulationResult r = simulate(inst, CostRegistry{});
        c.expect(r.makespan_s <= prev_makespan + 1e-9,
                 "makespan must be non-increasing in the power limit");
        prev_makespan = r.makespan_s;
        prev_count = count;
    }
}

// --- criterion 7 -------------------------------------------------------------

void check_conservation(Criterion& c, const SimulationInstance& inst, const SimulationResult& r,
                        const std::string& what) {
    double total = 0;
    for (const auto& [dev, e] : r.per_device_energy_j) total += e;
    if (inst.idle_scope == IdleScope::All) {
        std::set<std::string> allocated;
        for (const std::string& d : inst.mapping.devices_used()) allocated.insert(d);
        for (const Device& d : inst.system->devices())
            if (!allocated.count(d.id)) total += d.p_idle_w * r.makespan_s;
    }
    c.expect(near(r.avg_power_w * r.makespan_s, total, 1e-9),
             what + ": avg power x makespan must equal the integrated energy");

    // Re-derive per-segment power from the trace and check the clamp.
    std::vector<std::string> scope;
    if (inst.idle_scope == IdleScope::All)
        for (const Device& d : inst.system->devices()) scope.push_back(d.id);
    else
        scope = inst.mapping.devices_used();
    double idle_sum = 0, peak_sum = 0;
    for (const std::string& id : scope) {
        idle_sum += inst.system->device(id).p_idle_w;
        peak_sum += inst.system->device(id).p_peak_w;
    }
    std::map<std::string, int> demand;
    std::size_t i = 0;
    bool clamped = true;
    while (i < r.trace.records.size()) {
        const double t = r.trace.records[i].time_s;
        while (i < r.trace.records.size() && r.trace.records[i].time_s == t) {
            demand[r.trace.records[i].device] += r.trace.records[i].delta_demand;
            ++i;
        }
        double p = 0;
        for (const std::string& id : scope) {
            auto it = demand.find(id);
            p += power_at(inst.system->device(id), it == demand.end() ? 0 : it->second);
        }
        clamped = clamped && p >= idle_sum - 1e-9 && p <= peak_sum + 1e-9;
    }
    c.expect(clamped, what + ": per-segment power must stay within [sum idle, sum peak]");
    c.expect(r.max_power_w >= idle_sum - 1e-9 && r.max_power_w <= peak_sum + 1e-9,
             what + ": max power must stay within [sum idle, sum peak]");
}

void determinism_and_conservation(Criterion& c) {
    Suite suite;
    const std::int64_t iterations = 64;
    suite.base = fixtures::dnn_instance(
        1, fixtures::imbalanced_archives(static_cast<std::size_t>(iterations), 2e9, 0.25, 12),
        iterations, false);
    suite.base.mapping = Mapping{};
    MapperConfig mapper;
    mapper.counts["master"] = std::int64_t{1};
    mapper.counts["slave"] = std::string{"nslaves"};
    suite.mapper = mapper;
    std::vector<ParamValue> domain;
    for (int k = 1; k <= 8; ++k) domain.push_back(ParamValue{std::int64_t{k}});
    suite.sweep.set_domain("nslaves", domain);

    const auto instances = expand_suite(suite);
    std::vector<std::string> csvs;
    for (int workers : {1, 4, 8}) {
        const auto outcomes = run_suite(instances, workers, CostRegistry{});
        std::ostringstream os;
        write_sweep_csv(os, instances, outcomes);
        csvs.push_back(os.str());
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            c.expect(outcomes[i].ok(), "suite instance must succeed");
            if (outcomes[i].ok())
                check_conservation(c, instances[i].instance, *outcomes[i].result,
                                   "suite instance " + std::to_string(i));
        }
    }
    c.expect(csvs[0] == csvs[1] && csvs[1] == csvs[2],
             "sweep CSV must be byte-identical for 1, 4 and 8 workers");

    // Conservation on unrelated scenarios, both idle scopes.
    SimulationInstance tiny = fixtures::tiny_scenario();
    check_conservation(c, tiny, simulate(tiny, CostRegistry{}), "tiny scenario (allocated)");
    tiny.idle_scope = IdleScope::All;
    check_conservation(c, tiny, simulate(tiny, CostRegistry{}), "tiny scenario (all)");
    const SimulationInstance farm = fixtures::farm_instance({2e9, 1e9, 3e9}, 2e10, 3);
    check_conservation(c, farm, simulate(farm, CostRegistry{}), "heterogeneous farm");
}

// --- criterion 8 -------------------------------------------------------------

void ols_recovery(Criterion& c) {
    std::mt19937 rng(90210);
    std::uniform_real_distribution<double> phi_d(0.05, 20.0), psi_d(0.01, 5.0), x_d(0.1, 200.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double phi = phi_d(rng), psi = psi_d(rng);
        std::vector<FitSample> samples;
        for (int i = 0; i < 16; ++i) {
            const double x = x_d(rng);
            samples.push_back({x * 1e9, 1e9, phi * x + psi});
        }
        const FitResult fit = fit_linear_model(samples);
        if (!near(fit.model.phi, phi, 1e-9) ||
            std::abs(fit.model.psi - psi) > 1e-9 * std::max(1.0, std::abs(psi))) {
            c.expect(false, "noiseless recovery drifted beyond 1e-9 relative at trial " +
                                std::to_string(trial));
            return;
        }
    }

    std::uniform_real_distribution<double> noise(-0.01, 0.01), x_d2(0.5, 50.0);
    const double phi = 1.5, psi = 0.2;
    std::vector<FitSample> samples;
    for (int i = 0; i < 200; ++i) {
        const double x = x_d2(rng);
        samples.push_back({x * 1e9, 1e9, (phi * x + psi) * (1.0 + noise(rng))});
    }
    const FitResult fit = fit_linear_model(samples);
    c.expect(std::abs(fit.model.phi - phi) / phi < 0.05,
             "phi must be recovered within 5% under 1% noise, got " +
                 std::to_string(fit.model.phi));
    c.expect(std::abs(fit.model.psi - psi) < 0.05,
             "psi must be recovered within 0.05 s under 1% noise, got " +
                 std::to_string(fit.model.psi));
}

} // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    run_criterion(1, "Pareto machinery matches the published points and the quadratic oracle",
                  5.0, pareto_machinery);
    run_criterion(2, "training sweep shows the monotone time/power trade-off", 10.0,
                  dnn_tradeoff_shape);
    run_criterion(3, "engine matches hand-derived closed forms", 0.0, engine_vs_closed_form);
    run_criterion(4, "package-multiplier steps: 1.5x jump past balance, shrinking steps", 5.0,
                  step_phenomenon);
    run_criterion(5, "prefetch overlap matches the pipeline bound and the 11-16% band", 0.0,
                  overlap_gain);
    run_criterion(6, "power-capped selection respects the cap and scales with it", 5.0,
                  power_capped_mapping);
    run_criterion(7, "worker-count determinism and energy conservation", 0.0,
                  determinism_and_conservation);
    run_criterion(8, "least-squares recovery, noiseless and under 1% noise", 0.0, ols_recovery);

    for (const std::string& note : g_notes) std::printf("  FAIL %s\n", note.c_str());
    std::printf("%d of 8 criteria passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
