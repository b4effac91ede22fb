#pragma once

#include <compare>
#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hetsim/cost.hpp"
#include "hetsim/model.hpp"

namespace hetsim {

/// Address of a process instance: process name plus rank. Ranks are assigned
/// per process across devices in device-id order, starting at 0.
struct Address {
    std::string process;
    int rank = 0;

    auto operator<=>(const Address&) const = default;
    std::string to_string() const { return process + "#" + std::to_string(rank); }
};

/// A delivered message, as seen by the receiving (or sending) operation.
struct Message {
    Address from;
    int tag = 0;
    double size_b = 0;
};

/// Which devices contribute idle power to the power objectives: every device
/// in the system, or only devices with mapped instances.
enum class IdleScope { Allocated, All };

/// Everything needed to run one simulation.
struct SimulationInstance {
    std::shared_ptr<const SystemModel> system;
    std::shared_ptr<const Application> app;
    std::shared_ptr<const Capabilities> caps;
    Mapping mapping;
    ParamVector params;
    IdleScope idle_scope = IdleScope::Allocated;
};

/// One change of a device's active core demand.
struct TraceRecord {
    double time_s = 0;
    std::string device;
    int delta_demand = 0;
    std::string label;
};

/// Ordered record of demand changes across the run.
struct EventTrace {
    std::vector<TraceRecord> records;

    /// Throws TraceError if times decrease or any device's running demand
    /// goes negative (evaluated after applying all records at equal times).
    void validate() const;
};

struct EnergyReport {
    std::map<std::string, double> per_device_energy_j; // allocated devices
    double avg_power_w = 0;
    double max_power_w = 0;
};

/// Piecewise-constant integration of device power over [0, horizon].
/// `scope_devices` selects which devices contribute idle power to the
/// avg/max aggregates; `allocated_devices` selects which devices get a
/// per-device energy entry. Both must resolve against the system.
EnergyReport integrate_energy(const EventTrace& trace, const SystemModel& system,
                              const std::vector<std::string>& scope_devices,
                              const std::vector<std::string>& allocated_devices, double horizon);

struct SimulationResult {
    double makespan_s = 0;
    double avg_power_w = 0;
    double max_power_w = 0;
    std::map<std::string, double> per_device_energy_j;  // allocated devices
    std::map<std::string, double> per_process_time_s;   // keyed "process#rank"
    EventTrace trace;
};

// --- rendezvous matching ----------------------------------------------------

struct PendingSend {
    Address from;
    Address to;
    int tag = 0;
    double size_b = 0;
    double ready = 0;
    std::uint64_t seq = 0;
    std::size_t instance = 0;
};

struct PendingRecv {
    Address self;
    std::optional<Address> from;              // exact peer, or
    std::optional<std::string> from_process;  // process-level filter, or any
    std::optional<int> tag;                   // exact tag, or any
    double ready = 0;
    std::uint64_t seq = 0;
    std::size_t instance = 0;

    bool accepts(const PendingSend& s) const;
};

struct MatchedPair {
    PendingSend send;
    PendingRecv recv;
};

/// Pending send/recv sets with deterministic first-posted-first-matched
/// semantics per (sender, receiver, tag) channel. A newly posted operation is
/// matched against the earliest-posted compatible counterpart.
class CommMatcher {
public:
    std::optional<MatchedPair> post_send(PendingSend s);
    std::optional<MatchedPair> post_recv(PendingRecv r);
    bool idle() const { return sends_.empty() && recvs_.empty(); }
    const std::vector<PendingSend>& pending_sends() const { return sends_; }
    const std::vector<PendingRecv>& pending_recvs() const { return recvs_; }

private:
    std::vector<PendingSend> sends_;  // in post order
    std::vector<PendingRecv> recvs_;  // in post order
};

// --- behavior programs ------------------------------------------------------

/// Coroutine handle for one process-instance program.
class SimProgram {
public:
    struct promise_type {
        std::exception_ptr exception;

        SimProgram get_return_object() {
            return SimProgram{std::coroutine_handle<promise_type>::from_promise(*this)};
        }
        std::suspend_always initial_suspend() noexcept { return {}; }
        std::suspend_always final_suspend() noexcept { return {}; }
        void return_void() noexcept {}
        void unhandled_exception() { exception = std::current_exception(); }
    };
    using Handle = std::coroutine_handle<promise_type>;

    SimProgram() = default;
    explicit SimProgram(Handle h) : handle_(h) {}
    SimProgram(SimProgram&& o) noexcept : handle_(std::exchange(o.handle_, {})) {}
    SimProgram& operator=(SimProgram&& o) noexcept {
        if (this != &o) {
            if (handle_) handle_.destroy();
            handle_ = std::exchange(o.handle_, {});
        }
        return *this;
    }
    SimProgram(const SimProgram&) = delete;
    SimProgram& operator=(const SimProgram&) = delete;
    ~SimProgram() {
        if (handle_) handle_.destroy();
    }

    Handle handle() const { return handle_; }

private:
    Handle handle_{};
};

namespace detail {
class Engine;
} // namespace detail

/// The API a behavior program sees. Each operation call registers the
/// operation with the engine immediately and returns a trivially copyable
/// awaiter; the caller must co_await it right away. The coroutine suspends
/// until the operation completes in simulated time; recv variants resume
/// with the matched message. Parameters are deliberately trivially
/// destructible so that co_await expressions carry no non-trivial
/// temporaries across suspension.
class ProcessApi {
public:
    const Address& self() const { return addr_; }
    int rank() const { return addr_.rank; }
    const std::string& process() const { return addr_.process; }
    const std::string& device() const { return device_id_; }

    /// Number of mapped instances of a process (0 if not mapped).
    int instance_count(const std::string& process) const;

    /// Parameter lookup: the instance's ParamVector first, then the
    /// process's behavior args. Throws ParameterError when absent.
    ParamValue param(const std::string& name) const;
    std::optional<ParamValue> param_opt(const std::string& name) const;
    std::int64_t param_int(const std::string& name) const;
    std::int64_t param_int(const std::string& name, std::int64_t fallback) const;
    double param_num(const std::string& name) const;
    double param_num(const std::string& name, double fallback) const;
    std::string param_str(const std::string& name, const std::string& fallback) const;
    /// Numeric list argument (from behavior args), e.g. archive sizes.
    std::vector<double> param_num_list(const std::string& name) const;

    struct [[nodiscard]] OpAwaiter {
        ProcessApi* api;

        bool await_ready() const noexcept { return false; }
        void await_suspend(std::coroutine_handle<>) const noexcept {}
        Message await_resume() const;
    };

    /// A computation operation occupying `core_demand` cores for the time
    /// given by the cost model registered for (process, kind).
    OpAwaiter compute(double data_size, int core_demand = 1, std::string_view kind = "compute");

    /// Blocking rendezvous send to (process, rank).
    OpAwaiter send(std::string_view process, int rank, int tag, double size_b);

    /// Blocking receive from an exact peer and tag.
    OpAwaiter recv(std::string_view process, int rank, int tag);

    /// Blocking receive matching the earliest posted compatible send,
    /// optionally filtered by sender process and/or tag.
    OpAwaiter recv_any();
    OpAwaiter recv_any(std::string_view from_process);
    OpAwaiter recv_any(std::string_view from_process, int tag);
    OpAwaiter recv_tag(int tag);

    /// Device-sourced transfer: occupies this instance for the route time
    /// from `device_id` to this instance's device; no peer process involved.
    OpAwaiter fetch(std::string_view device_id, double size_b);

private:
    friend class detail::Engine;
    detail::Engine* engine_ = nullptr;
    std::size_t index_ = 0;
    Address addr_;
    std::string device_id_;
    const nlohmann::json* args_ = nullptr;
    const ParamVector* params_ = nullptr;
};

using BehaviorFn = std::function<SimProgram(ProcessApi&)>;

/// Named registry of behavior programs. A process whose spec names behavior
/// "b" resolves to entry "b.<process-name>" when present, else to "b".
class BehaviorRegistry {
public:
    /// Global registry preloaded with the built-in behaviors.
    static BehaviorRegistry& global();

    void add(std::string name, BehaviorFn fn);
    const BehaviorFn* find(const std::string& name) const;
    /// Resolution used at application load time; throws ValidationError if
    /// neither "<behavior>.<process>" nor "<behavior>" exists.
    const BehaviorFn& resolve(const std::string& behavior, const std::string& process) const;
    bool resolves(const std::string& behavior, const std::string& process) const;

private:
    std::map<std::string, BehaviorFn> entries_;
};

/// Runs one deterministic discrete-event simulation. The mapping is
/// validated first (ValidationError). Simulation-time failures raise
/// DeadlockError / RoutingError / ParameterError.
SimulationResult simulate(const SimulationInstance& instance, const CostRegistry& costs,
                          const BehaviorRegistry& behaviors = BehaviorRegistry::global());

} // namespace hetsim
