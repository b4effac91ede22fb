#pragma once

// Shared scenario builders for the unit and acceptance suites.

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetsim/engine.hpp"

namespace fixtures {

using namespace hetsim;

// Two-device scenario with exactly known arithmetic: a 4-core CPU host and a
// single-core GPU behind a slow 1 MB/s link. One master/slave exchange of a
// 1 MB model around a 2 s compute gives makespan 4 s, average power 125 W at
// allocated scope and peak 160 W during the compute window.
inline SimulationInstance tiny_scenario() {
    SimulationInstance inst;
    inst.system = std::make_shared<SystemModel>(SystemModel::make(
        {{"cpu0", "cpu", 1e9, 4, 20.0, 60.0}, {"gpu0", "gpu", 1e10, 1, 70.0, 140.0}},
        {{"link0", "cpu0", "gpu0", 0.0, 1e6}}));

    Application app;
    ProcessSpec master;
    master.name = "master";
    master.behavior = "dnn_training";
    master.args = {{"model_size_b", 1e6}, {"iterations", 1}, {"archives_b", {2e10}}};
    master.r_min = 1;
    master.r_max = 1;
    ProcessSpec slave = master;
    slave.name = "slave";
    slave.r_min = 1;
    slave.r_max = 1;
    app.processes = {master, slave};
    inst.app = std::make_shared<Application>(std::move(app));

    Capabilities caps;
    caps.set("cpu0", "master", 1);
    caps.set("gpu0", "slave", 1);
    inst.caps = std::make_shared<Capabilities>(std::move(caps));

    inst.mapping.set("cpu0", "master", 1);
    inst.mapping.set("gpu0", "slave", 1);
    return inst;
}

// The two-host GPU cluster: per host one CPU and four GPUs on device-to-host
// links, hosts joined by one network link. 10 devices, 9 links. GPUs idle at
// 70 W and peak at 140 W with a single schedulable core.
inline SystemModel gpu_cluster_system(double gpu_perf = 1e10, double d2h_bw = 12e9,
                                      double eth_bw = 2.5e9) {
    std::vector<Device> devices;
    std::vector<NetworkLink> links;
    for (int host = 0; host < 2; ++host) {
        const std::string cpu = "cpu_" + std::to_string(host);
        devices.push_back({cpu, "cpu", 1e9, 8, 0.0, 0.0});
        for (int g = 0; g < 4; ++g) {
            const int idx = host * 4 + g;
            const std::string gpu = "gpu_" + std::to_string(idx);
            devices.push_back({gpu, "gpu", gpu_perf, 1, 70.0, 140.0});
            links.push_back({"d2h_" + std::to_string(idx), cpu, gpu, 1e-4, d2h_bw});
        }
    }
    links.push_back({"eth_0", "cpu_0", "cpu_1", 1e-3, eth_bw});
    return SystemModel::make(std::move(devices), std::move(links));
}

// Deterministic imbalanced archive sizes around a mean.
inline std::vector<double> imbalanced_archives(std::size_t count, double mean_b, double spread,
                                               unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(1.0 - spread, 1.0 + spread);
    std::vector<double> sizes;
    sizes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) sizes.push_back(std::round(mean_b * jitter(rng)));
    return sizes;
}

// Training application over the GPU cluster: one master on cpu_0, up to
// eight slaves with one GPU each.
inline SimulationInstance dnn_instance(int nslaves, const std::vector<double>& archives,
                                       std::int64_t iterations, bool balanced,
                                       double model_size_b = 27e6) {
    SimulationInstance inst;
    inst.system = std::make_shared<SystemModel>(gpu_cluster_system());

    Application app;
    ProcessSpec master;
    master.name = "master";
    master.behavior = "dnn_training";
    master.args = {{"model_size_b", model_size_b},
                   {"iterations", iterations},
                   {"archives_b", archives},
                   {"balanced", balanced ? 1 : 0}};
    master.r_min = 1;
    master.r_max = 1;
    ProcessSpec slave = master;
    slave.name = "slave";
    slave.r_min = 1;
    slave.r_max = 8;
    app.processes = {master, slave};
    inst.app = std::make_shared<Application>(std::move(app));

    Capabilities caps;
    caps.set("cpu_0", "master", 1);
    for (int g = 0; g < 8; ++g) caps.set("gpu_" + std::to_string(g), "slave", 1);
    inst.caps = std::make_shared<Capabilities>(std::move(caps));

    inst.mapping.set("cpu_0", "master", 1);
    for (int g = 0; g < nslaves; ++g) inst.mapping.set("gpu_" + std::to_string(g), "slave", 1);
    return inst;
}

// Task-farm scenario builder: master plus workers of given speeds, all links
// free of cost so makespans match the list-scheduling oracle exactly.
inline SimulationInstance farm_instance(const std::vector<double>& worker_speeds, double total_work,
                                        std::int64_t v_dpm, const std::string& behavior = "task_farm",
                                        nlohmann::json extra_args = nlohmann::json::object()) {
    SimulationInstance inst;
    std::vector<Device> devices{{"m0", "cpu", 1e9, 1, 0.0, 0.0}};
    std::vector<NetworkLink> links;
    for (std::size_t i = 0; i < worker_speeds.size(); ++i) {
        const std::string id = "w" + std::to_string(i);
        devices.push_back({id, "worker", worker_speeds[i], 1, 10.0, 50.0});
        links.push_back({"lm" + std::to_string(i), "m0", id, 0.0, 1e18});
    }
    inst.system = std::make_shared<SystemModel>(SystemModel::make(devices, links));

    nlohmann::json args = {{"total_work", total_work}, {"v_dpm", v_dpm}};
    for (const auto& [k, v] : extra_args.items()) args[k] = v;

    Application app;
    ProcessSpec master;
    master.name = "master";
    master.behavior = behavior;
    master.args = args;
    master.r_min = 1;
    master.r_max = 1;
    ProcessSpec slave = master;
    slave.name = "slave";
    slave.r_min = 1;
    slave.r_max = static_cast<std::int64_t>(worker_speeds.size());
    app.processes = {master, slave};
    inst.app = std::make_shared<Application>(std::move(app));

    Capabilities caps;
    caps.set("m0", "master", 1);
    for (std::size_t i = 0; i < worker_speeds.size(); ++i)
        caps.set("w" + std::to_string(i), "slave", 1);
    inst.caps = std::make_shared<Capabilities>(std::move(caps));

    inst.mapping.set("m0", "master", 1);
    for (std::size_t i = 0; i < worker_speeds.size(); ++i)
        inst.mapping.set("w" + std::to_string(i), "slave", 1);
    return inst;
}

// Prefetch pipeline scenario: one data node, workers with co-located
// fetchers, master links free; the data link is tuned so one fetch takes
// fetch_s seconds and one compute compute_s seconds.
inline SimulationInstance prefetch_instance(int n_workers, std::int64_t v_dpm, double fetch_s,
                                            double compute_s, bool overlapped,
                                            double result_size_b = 0.0) {
    const double fetch_size_b = 1e6;
    const double worker_perf = 1e9;
    const double work_per_pkg = compute_s * worker_perf;

    SimulationInstance inst;
    std::vector<Device> devices{{"data0", "storage", 1e9, 1, 0.0, 0.0},
                                {"m0", "cpu", 1e9, 1, 0.0, 0.0}};
    std::vector<NetworkLink> links;
    for (int i = 0; i < n_workers; ++i) {
        const std::string id = "w" + std::to_string(i);
        devices.push_back({id, "worker", worker_perf, 1, 10.0, 50.0});
        links.push_back({"lm" + std::to_string(i), "m0", id, 0.0, 1e18});
        links.push_back({"ld" + std::to_string(i), "data0", id, 0.0, fetch_size_b / fetch_s});
    }
    inst.system = std::make_shared<SystemModel>(SystemModel::make(devices, links));

    const std::int64_t packages = static_cast<std::int64_t>(n_workers) * v_dpm;
    nlohmann::json args = {{"total_work", work_per_pkg * static_cast<double>(packages)},
                           {"v_dpm", v_dpm},
                           {"remote_fetch_size_b", fetch_size_b},
                           {"result_size_b", result_size_b},
                           {"data_device", "data0"}};

    Application app;
    ProcessSpec master;
    master.name = "master";
    master.behavior = overlapped ? "task_farm_prefetch" : "task_farm";
    master.args = args;
    master.r_min = 1;
    master.r_max = 1;
    ProcessSpec slave = master;
    slave.name = "slave";
    slave.r_min = 1;
    slave.r_max = n_workers;
    app.processes = {master, slave};
    if (overlapped) {
        ProcessSpec fetcher = master;
        fetcher.name = "fetcher";
        fetcher.r_min = n_workers;
        fetcher.r_max = n_workers;
        app.processes.push_back(fetcher);
    }
    inst.app = std::make_shared<Application>(std::move(app));

    Capabilities caps;
    caps.set("m0", "master", 1);
    for (int i = 0; i < n_workers; ++i) {
        caps.set("w" + std::to_string(i), "slave", 1);
        if (overlapped) caps.set("w" + std::to_string(i), "fetcher", 1);
    }
    inst.caps = std::make_shared<Capabilities>(std::move(caps));

    inst.mapping.set("m0", "master", 1);
    for (int i = 0; i < n_workers; ++i) {
        inst.mapping.set("w" + std::to_string(i), "slave", 1);
        if (overlapped) inst.mapping.set("w" + std::to_string(i), "fetcher", 1);
    }
    return inst;
}

inline bool near(double a, double b, double rel = 1e-9) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace fixtures
