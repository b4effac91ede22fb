#include "hetsim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "hetsim/behaviors.hpp"
#include "hetsim/routing.hpp"

namespace hetsim {

void EventTrace::validate() const {
    double prev = 0;
    std::map<std::string, long long> demand;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const TraceRecord& r = records[i];
        if (r.time_s < prev)
            throw TraceError("trace times decrease at record " + std::to_string(i));
        demand[r.device] += r.delta_demand;
        // Demand must be consistent once all records at this time are applied.
        const bool last_at_time = (i + 1 == records.size() || records[i + 1].time_s > r.time_s);
        if (last_at_time) {
            for (const auto& [dev, d] : demand)
                if (d < 0)
                    throw TraceError("negative running demand on device " + dev + " at t=" +
                                     std::to_string(r.time_s));
        }
        prev = r.time_s;
    }
    for (const auto& [dev, d] : demand)
        if (d != 0) throw TraceError("demand on device " + dev + " does not return to zero");
}

EnergyReport integrate_energy(const EventTrace& trace, const SystemModel& system,
                              const std::vector<std::string>& scope_devices,
                              const std::vector<std::string>& allocated_devices, double horizon) {
    trace.validate();
    for (const TraceRecord& r : trace.records) system.device(r.device);

    EnergyReport report;
    std::map<std::string, double> energy; // every device touched by scope or allocation
    std::set<std::string> scope(scope_devices.begin(), scope_devices.end());
    for (const std::string& id : scope) system.device(id);
    for (const std::string& id : allocated_devices) energy.emplace(id, 0.0);
    for (const std::string& id : scope) energy.emplace(id, 0.0);

    double idle_sum = 0;
    for (const std::string& id : scope) idle_sum += system.device(id).p_idle_w;

    if (horizon <= 0) {
        for (const std::string& id : allocated_devices) report.per_device_energy_j[id] = 0.0;
        report.avg_power_w = idle_sum;
        report.max_power_w = idle_sum;
        return report;
    }

    std::map<std::string, int> demand;
    double t = 0;
    double max_power = idle_sum; // any zero-demand stretch draws exactly the idle sum
    std::size_t i = 0;
    const auto segment_power = [&](const std::string& dev) {
        auto it = demand.find(dev);
        return power_at(system.device(dev), it == demand.end() ? 0 : it->second);
    };
    while (t < horizon) {
        while (i < trace.records.size() && trace.records[i].time_s <= t) {
            demand[trace.records[i].device] += trace.records[i].delta_demand;
            ++i;
        }
        double next = horizon;
        if (i < trace.records.size()) next = std::min(next, trace.records[i].time_s);
        const double len = next - t;
        if (len > 0) {
            double total = 0;
            for (auto& [dev, e] : energy) {
                const double p = segment_power(dev);
                e += p * len;
                if (scope.count(dev)) total += p;
            }
            max_power = std::max(max_power, total);
        }
        t = next;
    }

    for (const std::string& id : allocated_devices)
        report.per_device_energy_j[id] = energy.at(id);
    double scope_energy = 0;
    for (const std::string& id : scope) scope_energy += energy.at(id);
    report.avg_power_w = scope_energy / horizon;
    report.max_power_w = max_power;
    return report;
}

bool PendingRecv::accepts(const PendingSend& s) const {
    if (s.to != self) return false;
    if (from && *from != s.from) return false;
    if (from_process && *from_process != s.from.process) return false;
    if (tag && *tag != s.tag) return false;
    return true;
}

std::optional<MatchedPair> CommMatcher::post_send(PendingSend s) {
    const PendingRecv* best = nullptr;
    for (const PendingRecv& r : recvs_)
        if (r.accepts(s) && (!best || r.seq < best->seq)) best = &r;
    if (!best) {
        sends_.push_back(std::move(s));
        return std::nullopt;
    }
    MatchedPair pair{std::move(s), *best};
    recvs_.erase(recvs_.begin() + (best - recvs_.data()));
    return pair;
}

std::optional<MatchedPair> CommMatcher::post_recv(PendingRecv r) {
    const PendingSend* best = nullptr;
    for (const PendingSend& s : sends_)
        if (r.accepts(s) && (!best || s.seq < best->seq)) best = &s;
    if (!best) {
        recvs_.push_back(std::move(r));
        return std::nullopt;
    }
    MatchedPair pair{*best, std::move(r)};
    sends_.erase(sends_.begin() + (best - sends_.data()));
    return pair;
}

BehaviorRegistry& BehaviorRegistry::global() {
    static BehaviorRegistry registry = [] {
        BehaviorRegistry r;
        register_builtin_behaviors(r);
        return r;
    }();
    return registry;
}

void BehaviorRegistry::add(std::string name, BehaviorFn fn) {
    entries_[std::move(name)] = std::move(fn);
}

const BehaviorFn* BehaviorRegistry::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

const BehaviorFn& BehaviorRegistry::resolve(const std::string& behavior,
                                            const std::string& process) const {
    if (const BehaviorFn* fn = find(behavior + "." + process)) return *fn;
    if (const BehaviorFn* fn = find(behavior)) return *fn;
    throw ValidationError("process " + process + ": behavior '" + behavior +
                          "' does not resolve against the registry");
}

bool BehaviorRegistry::resolves(const std::string& behavior, const std::string& process) const {
    return find(behavior + "." + process) || find(behavior);
}

namespace detail {

class Engine {
public:
    Engine(const SimulationInstance& instance, const CostRegistry& costs,
           const BehaviorRegistry& behaviors)
        : instance_(instance), costs_(costs), behaviors_(behaviors) {}

    SimulationResult run();

    void post_compute(std::size_t idx, double data_size, int core_demand, std::string_view kind);
    void post_send(std::size_t idx, std::string_view process, int rank, int tag, double size_b);
    void post_recv(std::size_t idx, std::optional<Address> from,
                   std::optional<std::string> from_process, std::optional<int> tag);
    void post_fetch(std::size_t idx, std::string_view device_id, double size_b);
    Message take_result(std::size_t idx) { return states_[idx]->inbox; }
    int instance_count(const std::string& process) const {
        auto it = counts_.find(process);
        return it == counts_.end() ? 0 : it->second;
    }

private:
    struct InstanceState {
        Address addr;
        std::string device_id;
        const Device* device = nullptr;
        ProcessApi api;
        SimProgram program;
        bool started = false;
        bool finished = false;
        bool op_pending = false;
        double op_post_time = 0;
        double total_time = 0;
        Message inbox;
        std::string pending_desc;
    };

    struct Event {
        double time;
        std::uint64_t seq;
        std::size_t instance;
        bool operator>(const Event& o) const {
            return std::tie(time, seq) > std::tie(o.time, o.seq);
        }
    };

    const SimulationInstance& instance_;
    const CostRegistry& costs_;
    const BehaviorRegistry& behaviors_;

    std::vector<std::unique_ptr<InstanceState>> states_;
    std::map<std::string, int> counts_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
    CommMatcher matcher_;
    std::map<std::pair<std::string, std::string>, std::vector<const NetworkLink*>> route_cache_;
    std::vector<TraceRecord> raw_trace_;
    double now_ = 0;
    std::uint64_t next_seq_ = 0;

    std::uint64_t next_seq() { return next_seq_++; }
    void schedule(double t, std::size_t inst) { queue_.push({t, next_seq(), inst}); }
    void resume(InstanceState& st);
    void complete_op(InstanceState& st);
    void settle_match(const MatchedPair& pair);
    double route_time(const std::string& dev_a, const std::string& dev_b, double size_b);
    void spawn_instances();
};

void Engine::spawn_instances() {
    // Deterministic instance order: processes in application order, devices
    // in id order (the mapping table is id-sorted), ranks ascending.
    for (const ProcessSpec& proc : instance_.app->processes) {
        int rank = 0;
        for (const auto& [key, n] : instance_.mapping.table()) {
            if (key.second != proc.name) continue;
            for (int i = 0; i < n; ++i) {
                auto st = std::make_unique<InstanceState>();
                st->addr = Address{proc.name, rank++};
                st->device_id = key.first;
                st->device = &instance_.system->device(key.first);
                st->api.engine_ = this;
                st->api.index_ = states_.size();
                st->api.addr_ = st->addr;
                st->api.device_id_ = st->device_id;
                st->api.args_ = &proc.args;
                st->api.params_ = &instance_.params;
                states_.push_back(std::move(st));
            }
        }
        counts_[proc.name] = rank;
    }
    // Programs are created after all states exist so instance_count sees the
    // full mapping during behavior startup.
    for (auto& st : states_) {
        const ProcessSpec& proc = instance_.app->process(st->addr.process);
        const BehaviorFn& fn = behaviors_.resolve(proc.behavior, proc.name);
        st->program = fn(st->api);
    }
}

void Engine::resume(InstanceState& st) {
    auto handle = st.program.handle();
    handle.resume();
    if (handle.done()) {
        st.finished = true;
        if (handle.promise().exception) std::rethrow_exception(handle.promise().exception);
    }
}

double Engine::route_time(const std::string& dev_a, const std::string& dev_b, double size_b) {
    if (dev_a == dev_b) return 0.0;
    auto key = std::make_pair(std::min(dev_a, dev_b), std::max(dev_a, dev_b));
    auto it = route_cache_.find(key);
    if (it == route_cache_.end()) {
        std::vector<const NetworkLink*> links;
        for (const std::string& id : shortest_route(*instance_.system, key.first, key.second))
            links.push_back(&instance_.system->link(id));
        it = route_cache_.emplace(key, std::move(links)).first;
    }
    return comm_time(size_b, it->second);
}

void Engine::post_compute(std::size_t idx, double data_size, int core_demand,
                          std::string_view kind) {
    InstanceState& st = *states_[idx];
    st.op_pending = true;
    st.op_post_time = now_;
    st.inbox = Message{};
    const std::string kind_s(kind);
    const LinearComputeModel& model = costs_.lookup(st.addr.process, kind_s);
    const double dur = comp_time(ComputeOpSpec{data_size, core_demand}, *st.device, model);
    const std::string label = kind_s + ":" + st.addr.to_string();
    raw_trace_.push_back({now_, st.device_id, core_demand, label});
    raw_trace_.push_back({now_ + dur, st.device_id, -core_demand, label});
    st.pending_desc = "compute(" + kind_s + ")";
    schedule(now_ + dur, idx);
}

void Engine::post_fetch(std::size_t idx, std::string_view device_id, double size_b) {
    InstanceState& st = *states_[idx];
    st.op_pending = true;
    st.op_post_time = now_;
    st.inbox = Message{};
    const std::string dev(device_id);
    instance_.system->device(dev);
    const double dur = route_time(dev, st.device_id, size_b);
    st.pending_desc = "fetch from " + dev;
    schedule(now_ + dur, idx);
}

void Engine::post_send(std::size_t idx, std::string_view process, int rank, int tag,
                       double size_b) {
    InstanceState& st = *states_[idx];
    st.op_pending = true;
    st.op_post_time = now_;
    st.inbox = Message{};
    PendingSend s{st.addr, Address{std::string(process), rank}, tag, size_b, now_, next_seq(), idx};
    st.pending_desc = "send to " + s.to.to_string() + " tag " + std::to_string(tag);
    if (auto pair = matcher_.post_send(std::move(s))) settle_match(*pair);
}

void Engine::post_recv(std::size_t idx, std::optional<Address> from,
                       std::optional<std::string> from_process, std::optional<int> tag) {
    InstanceState& st = *states_[idx];
    st.op_pending = true;
    st.op_post_time = now_;
    st.inbox = Message{};
    PendingRecv r;
    r.self = st.addr;
    r.from = std::move(from);
    r.from_process = std::move(from_process);
    r.tag = tag;
    r.ready = now_;
    r.seq = next_seq();
    r.instance = idx;
    st.pending_desc = "recv";
    if (r.from)
        st.pending_desc += " from " + r.from->to_string();
    else if (r.from_process)
        st.pending_desc += " from " + *r.from_process + "#*";
    if (r.tag) st.pending_desc += " tag " + std::to_string(*r.tag);
    if (auto pair = matcher_.post_recv(std::move(r))) settle_match(*pair);
}

void Engine::settle_match(const MatchedPair& pair) {
    InstanceState& sender = *states_[pair.send.instance];
    InstanceState& receiver = *states_[pair.recv.instance];
    const double done = std::max(pair.send.ready, pair.recv.ready) +
                        route_time(sender.device_id, receiver.device_id, pair.send.size_b);
    const Message msg{pair.send.from, pair.send.tag, pair.send.size_b};
    receiver.inbox = msg;
    sender.inbox = msg;
    schedule(done, pair.recv.instance);
    schedule(done, pair.send.instance);
}

void Engine::complete_op(InstanceState& st) {
    st.total_time += now_ - st.op_post_time;
    st.op_pending = false;
    st.pending_desc.clear();
}

SimulationResult Engine::run() {
    {
        const auto violations =
            validate_mapping(*instance_.system, *instance_.app, *instance_.caps, instance_.mapping);
        if (!violations.empty()) {
            std::ostringstream os;
            os << "infeasible mapping:";
            for (const Violation& v : violations) os << " [" << v.to_string() << "]";
            throw ValidationError(os.str());
        }
    }

    spawn_instances();
    for (auto& st : states_) {
        st->started = true;
        resume(*st);
    }
    while (!queue_.empty()) {
        const Event ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        InstanceState& st = *states_[ev.instance];
        complete_op(st);
        resume(st);
    }

    std::vector<std::string> blocked;
    for (const auto& st : states_)
        if (!st->finished)
            blocked.push_back(st->addr.to_string() + " (" +
                              (st->op_pending ? st->pending_desc : "not runnable") + ")");
    if (!blocked.empty()) {
        std::ostringstream os;
        os << "deadlock: no runnable instance; blocked:";
        for (const std::string& b : blocked) os << " " << b;
        throw DeadlockError(os.str());
    }

    SimulationResult result;
    for (const auto& st : states_) {
        result.per_process_time_s[st->addr.to_string()] = st->total_time;
        result.makespan_s = std::max(result.makespan_s, st->total_time);
    }

    std::stable_sort(raw_trace_.begin(), raw_trace_.end(),
                     [](const TraceRecord& x, const TraceRecord& y) { return x.time_s < y.time_s; });
    result.trace.records = std::move(raw_trace_);

    std::vector<std::string> allocated = instance_.mapping.devices_used();
    std::vector<std::string> scope;
    if (instance_.idle_scope == IdleScope::All)
        for (const Device& d : instance_.system->devices()) scope.push_back(d.id);
    else
        scope = allocated;

    const EnergyReport energy =
        integrate_energy(result.trace, *instance_.system, scope, allocated, result.makespan_s);
    result.per_device_energy_j = energy.per_device_energy_j;
    result.avg_power_w = energy.avg_power_w;
    result.max_power_w = energy.max_power_w;
    return result;
}

} // namespace detail

int ProcessApi::instance_count(const std::string& process) const {
    return engine_->instance_count(process);
}

std::optional<ParamValue> ProcessApi::param_opt(const std::string& name) const {
    if (params_) {
        auto it = params_->find(name);
        if (it != params_->end()) return it->second;
    }
    if (args_ && args_->contains(name)) {
        const nlohmann::json& v = args_->at(name);
        if (v.is_number_integer()) return ParamValue{v.get<std::int64_t>()};
        if (v.is_number()) return ParamValue{v.get<double>()};
        if (v.is_string()) return ParamValue{v.get<std::string>()};
        throw ParameterError(addr_.process + ": argument '" + name + "' has unsupported type");
    }
    return std::nullopt;
}

ParamValue ProcessApi::param(const std::string& name) const {
    auto v = param_opt(name);
    if (!v) throw ParameterError(addr_.process + ": missing parameter '" + name + "'");
    return *v;
}

std::int64_t ProcessApi::param_int(const std::string& name) const {
    const ParamValue v = param(name);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v)) {
        if (*d == std::floor(*d)) return static_cast<std::int64_t>(*d);
    }
    throw ParameterError(addr_.process + ": parameter '" + name + "' is not an integer");
}

std::int64_t ProcessApi::param_int(const std::string& name, std::int64_t fallback) const {
    return param_opt(name) ? param_int(name) : fallback;
}

double ProcessApi::param_num(const std::string& name) const { return param_as_number(param(name)); }

double ProcessApi::param_num(const std::string& name, double fallback) const {
    return param_opt(name) ? param_num(name) : fallback;
}

std::string ProcessApi::param_str(const std::string& name, const std::string& fallback) const {
    auto v = param_opt(name);
    if (!v) return fallback;
    return param_to_string(*v);
}

std::vector<double> ProcessApi::param_num_list(const std::string& name) const {
    if (!args_ || !args_->contains(name))
        throw ParameterError(addr_.process + ": missing list argument '" + name + "'");
    const nlohmann::json& v = args_->at(name);
    if (!v.is_array())
        throw ParameterError(addr_.process + ": argument '" + name + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number())
            throw ParameterError(addr_.process + ": argument '" + name + "' must be numeric");
        out.push_back(e.get<double>());
    }
    return out;
}

Message ProcessApi::OpAwaiter::await_resume() const {
    return api->engine_->take_result(api->index_);
}

ProcessApi::OpAwaiter ProcessApi::compute(double data_size, int core_demand,
                                          std::string_view kind) {
    if (data_size < 0) throw ParameterError(addr_.process + ": compute data_size must be >= 0");
    if (core_demand < 1) throw ParameterError(addr_.process + ": core_demand must be >= 1");
    engine_->post_compute(index_, data_size, core_demand, kind);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::send(std::string_view process, int rank, int tag,
                                       double size_b) {
    if (size_b < 0) throw ParameterError(addr_.process + ": send size must be >= 0");
    engine_->post_send(index_, process, rank, tag, size_b);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::recv(std::string_view process, int rank, int tag) {
    engine_->post_recv(index_, Address{std::string(process), rank}, std::nullopt, tag);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::recv_any() {
    engine_->post_recv(index_, std::nullopt, std::nullopt, std::nullopt);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::recv_any(std::string_view from_process) {
    engine_->post_recv(index_, std::nullopt, std::string(from_process), std::nullopt);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::recv_any(std::string_view from_process, int tag) {
    engine_->post_recv(index_, std::nullopt, std::string(from_process), tag);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::recv_tag(int tag) {
    engine_->post_recv(index_, std::nullopt, std::nullopt, tag);
    return OpAwaiter{this};
}

ProcessApi::OpAwaiter ProcessApi::fetch(std::string_view device_id, double size_b) {
    if (size_b < 0) throw ParameterError(addr_.process + ": fetch size must be >= 0");
    engine_->post_fetch(index_, device_id, size_b);
    return OpAwaiter{this};
}

SimulationResult simulate(const SimulationInstance& instance, const CostRegistry& costs,
                          const BehaviorRegistry& behaviors) {
    if (!instance.system || !instance.app || !instance.caps)
        throw ValidationError("simulation instance missing system, application or capabilities");
    detail::Engine engine(instance, costs, behaviors);
    return engine.run();
}

} // namespace hetsim
