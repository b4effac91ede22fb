#include "hetsim/behaviors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

namespace hetsim {

namespace {

struct FarmArgs {
    std::string master_process;
    std::string slave_process;
    std::string fetcher_process;
    std::string data_device;
    std::vector<FarmPackage> packages;
};

// Packages for the plain task farm: total_work split into n_slaves * v_dpm
// equal parts.
std::vector<FarmPackage> task_farm_packages(const ProcessApi& api, int n_slaves) {
    const std::int64_t v_dpm = api.param_int("v_dpm", 1);
    if (v_dpm < 1) throw ParameterError("task_farm: v_dpm must be >= 1");
    const double total_work = api.param_num("total_work");
    if (total_work < 0) throw ParameterError("task_farm: total_work must be >= 0");
    const std::int64_t count = static_cast<std::int64_t>(n_slaves) * v_dpm;
    FarmPackage pkg;
    pkg.order_size_b = api.param_num("package_size_b", 0);
    pkg.fetch_size_b = api.param_num("remote_fetch_size_b", 0);
    pkg.compute_work = total_work / static_cast<double>(count);
    pkg.result_size_b = api.param_num("result_size_b", 0);
    return std::vector<FarmPackage>(static_cast<std::size_t>(count), pkg);
}

// Packages for the vector-similarity farm: the point set is cut into chunks
// of chunk_points points; a chunk's compute work scales with points * dims
// and its result with points^2.
std::vector<FarmPackage> vector_similarity_packages(const ProcessApi& api) {
    const std::int64_t points = api.param_int("points");
    const std::int64_t dims = api.param_int("dims");
    const std::int64_t chunk = api.param_int("chunk_points");
    if (chunk < 1) throw ParameterError("vector_similarity: chunk_points must be >= 1");
    if (points < 1 || dims < 1)
        throw ParameterError("vector_similarity: points and dims must be >= 1");
    if (chunk > points)
        throw ParameterError("vector_similarity: chunk_points exceeds points");
    const double elem_b = api.param_num("elem_size_b", 8.0);
    std::vector<FarmPackage> packages;
    for (std::int64_t off = 0; off < points; off += chunk) {
        const double m = static_cast<double>(std::min(chunk, points - off));
        FarmPackage pkg;
        pkg.order_size_b = m * static_cast<double>(dims) * elem_b;
        pkg.compute_work = m * static_cast<double>(dims) * elem_b;
        pkg.result_size_b = m * m * elem_b;
        packages.push_back(pkg);
    }
    return packages;
}

FarmArgs farm_args(const ProcessApi& api, std::vector<FarmPackage> packages) {
    FarmArgs a;
    a.master_process = api.param_str("master_process", "master");
    a.slave_process = api.param_str("slave_process", "slave");
    a.fetcher_process = api.param_str("fetcher_process", "fetcher");
    a.data_device = api.param_str("data_device", "");
    a.packages = std::move(packages);
    for (const FarmPackage& p : a.packages)
        if (p.fetch_size_b > 0 && a.data_device.empty())
            throw ParameterError("task_farm: remote fetches require a data_device argument");
    return a;
}

// Greedy dynamic dispatch: one package to every slave up front, then each
// returned result frees its slave for the next package.
SimProgram farm_master(ProcessApi& api, FarmArgs a) {
    const int n = api.instance_count(a.slave_process);
    if (n < 1) throw ParameterError("task_farm: no slave instances mapped");
    const std::int64_t total = static_cast<std::int64_t>(a.packages.size());

    std::int64_t next = 0;
    int inflight = 0;
    for (int i = 0; i < n && next < total; ++i) {
        co_await api.send(a.slave_process, i, static_cast<int>(next), a.packages[next].order_size_b);
        ++next;
        ++inflight;
    }
    while (inflight > 0) {
        const Message m = co_await api.recv_any(a.slave_process, kTagResult);
        --inflight;
        if (next < total) {
            co_await api.send(a.slave_process, m.from.rank, static_cast<int>(next),
                              a.packages[next].order_size_b);
            ++next;
            ++inflight;
        }
    }
    for (int i = 0; i < n; ++i) co_await api.send(a.slave_process, i, kTagStop, 0.0);
}

SimProgram farm_slave(ProcessApi& api, FarmArgs a) {
    for (;;) {
        const Message m = co_await api.recv_any(a.master_process);
        if (m.tag == kTagStop) break;
        const FarmPackage& pkg = a.packages.at(static_cast<std::size_t>(m.tag));
        if (pkg.fetch_size_b > 0) co_await api.fetch(a.data_device, pkg.fetch_size_b);
        co_await api.compute(pkg.compute_work);
        co_await api.send(a.master_process, 0, kTagResult, pkg.result_size_b);
    }
}

// Prefetch pipeline, master side. Every slave has a dedicated fetcher; the
// master keeps one fetch in flight per slave, so fetching package i+1
// overlaps computing package i. A compute order goes out only when its data
// has been fetched AND the slave is back at its receive -- a blocking
// rendezvous send to a still-computing slave would deadlock the loop.
SimProgram farm_prefetch_master(ProcessApi& api, FarmArgs a) {
    const int n = api.instance_count(a.slave_process);
    if (n < 1) throw ParameterError("task_farm_prefetch: no slave instances mapped");
    if (api.instance_count(a.fetcher_process) != n)
        throw ParameterError("task_farm_prefetch: fetcher instances must match slave instances");
    if (a.data_device.empty())
        throw ParameterError("task_farm_prefetch: data_device argument required");
    const std::int64_t total = static_cast<std::int64_t>(a.packages.size());

    std::vector<std::deque<std::int64_t>> fetching(static_cast<std::size_t>(n));
    std::vector<std::deque<std::int64_t>> ready(static_cast<std::size_t>(n));
    std::vector<char> idle(static_cast<std::size_t>(n), 1);
    std::int64_t next = 0;
    std::int64_t results = 0;
    for (int i = 0; i < n && next < total; ++i) {
        co_await api.send(a.fetcher_process, i, static_cast<int>(next), 0.0);
        fetching[static_cast<std::size_t>(i)].push_back(next);
        ++next;
    }
    while (results < total) {
        const Message m = co_await api.recv_any();
        const std::size_t i = static_cast<std::size_t>(m.from.rank);
        if (m.tag == kTagPrefetched) {
            ready[i].push_back(fetching[i].front());
            fetching[i].pop_front();
            if (next < total) {
                co_await api.send(a.fetcher_process, m.from.rank, static_cast<int>(next), 0.0);
                fetching[i].push_back(next);
                ++next;
            }
        } else if (m.tag == kTagResult) {
            ++results;
            idle[i] = 1;
        }
        if (idle[i] && !ready[i].empty()) {
            const std::int64_t pkg = ready[i].front();
            ready[i].pop_front();
            idle[i] = 0;
            co_await api.send(a.slave_process, m.from.rank, static_cast<int>(pkg), 0.0);
        }
    }
    for (int i = 0; i < n; ++i) {
        co_await api.send(a.fetcher_process, i, kTagStop, 0.0);
        co_await api.send(a.slave_process, i, kTagStop, 0.0);
    }
}

SimProgram farm_prefetch_slave(ProcessApi& api, FarmArgs a) {
    for (;;) {
        const Message m = co_await api.recv_any(a.master_process);
        if (m.tag == kTagStop) break;
        const FarmPackage& pkg = a.packages.at(static_cast<std::size_t>(m.tag));
        co_await api.compute(pkg.compute_work);
        co_await api.send(a.master_process, 0, kTagResult, pkg.result_size_b);
    }
}

SimProgram farm_prefetch_fetcher(ProcessApi& api, FarmArgs a) {
    for (;;) {
        const Message m = co_await api.recv_any(a.master_process);
        if (m.tag == kTagStop) break;
        const FarmPackage& pkg = a.packages.at(static_cast<std::size_t>(m.tag));
        if (pkg.fetch_size_b > 0) co_await api.fetch(a.data_device, pkg.fetch_size_b);
        co_await api.send(a.master_process, 0, kTagPrefetched, 0.0);
    }
}

struct DnnArgs {
    std::string master_process;
    std::string slave_process;
    double model_size_b = 0;
    std::int64_t tasks = 0; // training iterations in the epoch, one archive each
    std::vector<double> archives;
};

DnnArgs dnn_args(const ProcessApi& api) {
    DnnArgs a;
    a.master_process = api.param_str("master_process", "master");
    a.slave_process = api.param_str("slave_process", "slave");
    a.model_size_b = api.param_num("model_size_b");
    a.tasks = api.param_int("iterations");
    if (a.tasks < 1) throw ParameterError("dnn_training: iterations must be >= 1");
    a.archives = api.param_num_list("archives_b");
    if (a.archives.empty()) throw ParameterError("dnn_training: archives_b must not be empty");
    if (api.param_int("balanced", 0) != 0) {
        const double mean = std::accumulate(a.archives.begin(), a.archives.end(), 0.0) /
                            static_cast<double>(a.archives.size());
        a.archives.assign(a.archives.size(), mean);
    }
    return a;
}

// The epoch consists of `tasks` training iterations consumed k at a time by
// the k mapped slaves; every barrier round sends the model out, trains one
// archive per active slave (round-robin over the archive list by task index)
// and collects the models back.
SimProgram dnn_master(ProcessApi& api, DnnArgs a) {
    const int k = api.instance_count(a.slave_process);
    if (k < 1) throw ParameterError("dnn_training: no slave instances mapped");
    const double avg_work = api.param_num("avg_work", 0.0);
    const std::int64_t rounds = (a.tasks + k - 1) / k;
    for (std::int64_t r = 0; r < rounds; ++r) {
        const int active = static_cast<int>(std::min<std::int64_t>(k, a.tasks - r * k));
        for (int i = 0; i < active; ++i)
            co_await api.send(a.slave_process, i, kTagModel, a.model_size_b);
        for (int i = 0; i < active; ++i)
            co_await api.recv(a.slave_process, i, kTagModel);
        if (avg_work > 0) co_await api.compute(avg_work, 1, "average");
    }
}

SimProgram dnn_slave(ProcessApi& api, DnnArgs a) {
    const int k = api.instance_count(a.slave_process);
    const int i = api.rank();
    const std::int64_t rounds = (a.tasks + k - 1) / k;
    for (std::int64_t r = 0; r < rounds; ++r) {
        const std::int64_t task = r * k + i;
        if (task >= a.tasks) break;
        co_await api.recv(a.master_process, 0, kTagModel);
        const double archive = a.archives[static_cast<std::size_t>(task % a.archives.size())];
        co_await api.compute(archive, 1, "train");
        co_await api.send(a.master_process, 0, kTagModel, a.model_size_b);
    }
}

} // namespace

void register_builtin_behaviors(BehaviorRegistry& r) {
    r.add("idle", [](ProcessApi&) -> SimProgram { co_return; });

    r.add("task_farm.master", [](ProcessApi& api) {
        return farm_master(api, farm_args(api, task_farm_packages(api, api.instance_count(
                                                       api.param_str("slave_process", "slave")))));
    });
    r.add("task_farm.slave", [](ProcessApi& api) {
        return farm_slave(api, farm_args(api, task_farm_packages(api, api.instance_count(
                                                      api.param_str("slave_process", "slave")))));
    });

    r.add("task_farm_prefetch.master", [](ProcessApi& api) {
        return farm_prefetch_master(
            api, farm_args(api, task_farm_packages(
                                    api, api.instance_count(api.param_str("slave_process", "slave")))));
    });
    r.add("task_farm_prefetch.slave", [](ProcessApi& api) {
        return farm_prefetch_slave(
            api, farm_args(api, task_farm_packages(
                                    api, api.instance_count(api.param_str("slave_process", "slave")))));
    });
    r.add("task_farm_prefetch.fetcher", [](ProcessApi& api) {
        return farm_prefetch_fetcher(
            api, farm_args(api, task_farm_packages(
                                    api, api.instance_count(api.param_str("slave_process", "slave")))));
    });

    r.add("vector_similarity.master", [](ProcessApi& api) {
        return farm_master(api, farm_args(api, vector_similarity_packages(api)));
    });
    r.add("vector_similarity.slave", [](ProcessApi& api) {
        return farm_slave(api, farm_args(api, vector_similarity_packages(api)));
    });

    r.add("dnn_training.master", [](ProcessApi& api) { return dnn_master(api, dnn_args(api)); });
    r.add("dnn_training.slave", [](ProcessApi& api) { return dnn_slave(api, dnn_args(api)); });
}

} // namespace hetsim
