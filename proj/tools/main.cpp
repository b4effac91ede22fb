// Command-line front end: simulate, sweep, fit, select, validate.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetsim/io.hpp"
#include "hetsim/mapping.hpp"
#include "hetsim/sweep.hpp"

using namespace hetsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitPartialFailure = 4;

ParamValue parse_param_value(const std::string& text) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(text, &pos);
        if (pos == text.size()) return ParamValue{static_cast<std::int64_t>(i)};
    } catch (const std::exception&) {
    }
    try {
        std::size_t pos = 0;
        const double d = std::stod(text, &pos);
        if (pos == text.size()) return ParamValue{d};
    } catch (const std::exception&) {
    }
    return ParamValue{text};
}

ParamVector parse_param_args(const std::vector<std::string>& pairs) {
    ParamVector params;
    for (const std::string& pair : pairs) {
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("expected key=value, got '" + pair + "'");
        params[pair.substr(0, eq)] = parse_param_value(pair.substr(eq + 1));
    }
    return params;
}

std::map<std::string, double> parse_device_power(const std::vector<std::string>& pairs,
                                                 const std::string& file) {
    std::map<std::string, double> power;
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw ParseError("cannot open file: " + file);
        nlohmann::json doc;
        in >> doc;
        for (const auto& [device, w] : doc.items()) power[device] = w.get<double>();
    }
    for (const std::string& pair : pairs) {
        const std::size_t eq = pair.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("expected device=watts, got '" + pair + "'");
        power[pair.substr(0, eq)] = std::stod(pair.substr(eq + 1));
    }
    return power;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
}

IdleScope parse_scope(const std::string& s) {
    if (s == "allocated") return IdleScope::Allocated;
    if (s == "all") return IdleScope::All;
    throw ParseError("idle scope must be 'allocated' or 'all'");
}

struct SimulateOptions {
    std::string system_path, app_path, mapping_path, mapper, params_file, trace_path, out_path;
    std::vector<std::string> params, counts;
    std::string idle_scope = "allocated";
};

int cmd_simulate(const SimulateOptions& opt) {
    const SystemModel system = load_system_file(opt.system_path);
    LoadedApplication app = load_application_file(opt.app_path);

    SimulationInstance inst;
    inst.system = std::make_shared<SystemModel>(system);
    inst.app = std::make_shared<Application>(std::move(app.app));
    inst.caps = std::make_shared<Capabilities>(std::move(app.caps));
    inst.idle_scope = parse_scope(opt.idle_scope);

    inst.params = parse_param_args(opt.params);
    if (!opt.params_file.empty()) {
        std::ifstream in(opt.params_file);
        if (!in) throw ParseError("cannot open file: " + opt.params_file);
        nlohmann::json doc;
        in >> doc;
        for (auto& [name, value] : load_params(doc)) inst.params[name] = value;
    }

    if (!opt.mapping_path.empty()) {
        inst.mapping = load_mapping_file(opt.mapping_path);
    } else if (opt.mapper == "round_robin") {
        std::map<std::string, std::int64_t> targets;
        for (const std::string& pair : opt.counts) {
            const std::size_t eq = pair.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected process=count, got '" + pair + "'");
            targets[pair.substr(0, eq)] = std::stoll(pair.substr(eq + 1));
        }
        inst.mapping = round_robin_map(*inst.system, *inst.app, *inst.caps, targets);
    } else {
        throw ParseError("unknown mapper: " + opt.mapper);
    }

    const SimulationResult result = simulate(inst, app.cost_models);

    if (!opt.trace_path.empty()) {
        std::ostringstream os;
        write_trace_csv(os, result.trace);
        write_output(opt.trace_path, os.str());
    }
    std::ostringstream os;
    os << result_to_json(result, inst.params, inst.mapping).dump(2) << "\n";
    write_output(opt.out_path, os.str());
    return kExitOk;
}

struct SweepOptions {
    std::string suite_path, out_path;
    int workers = 1;
};

int cmd_sweep(const SweepOptions& opt) {
    const LoadedSuite loaded = load_suite_file(opt.suite_path);
    const auto instances = expand_suite(loaded.suite);
    const auto outcomes = run_suite(instances, opt.workers, loaded.cost_models);
    std::ostringstream os;
    const std::size_t failures = write_sweep_csv(os, instances, outcomes);
    write_output(opt.out_path, os.str());
    if (failures > 0) {
        std::cerr << failures << " of " << outcomes.size() << " instances failed\n";
        return kExitPartialFailure;
    }
    return kExitOk;
}

struct FitOptions {
    std::string samples_path, out_path;
};

int cmd_fit(const FitOptions& opt) {
    std::ifstream in(opt.samples_path);
    if (!in) throw ParseError("cannot open file: " + opt.samples_path);
    const std::vector<FitSample> samples = load_fit_samples_csv(in);
    const FitResult fit = fit_linear_model(samples);
    const nlohmann::json doc = {
        {"phi", fit.model.phi}, {"psi", fit.model.psi}, {"mpe", fit.mean_percentage_error}};
    write_output(opt.out_path, doc.dump(2) + "\n");
    return kExitOk;
}

struct SelectOptions {
    std::string system_path, app_path, power_file, worker = "slave", out_path;
    std::vector<std::string> device_power;
    double limit = 0;
};

int cmd_select(const SelectOptions& opt) {
    const SystemModel system = load_system_file(opt.system_path);
    const LoadedApplication app = load_application_file(opt.app_path);
    const auto power = parse_device_power(opt.device_power, opt.power_file);
    const Mapping mapping =
        select_and_map_under_limit(system, app.app, app.caps, power, opt.limit, opt.worker);
    write_output(opt.out_path, save_mapping(mapping).dump(2) + "\n");
    return kExitOk;
}

struct ValidateOptions {
    std::string system_path, app_path, mapping_path;
};

int cmd_validate(const ValidateOptions& opt) {
    const SystemModel system = load_system_file(opt.system_path);
    const LoadedApplication app = load_application_file(opt.app_path);
    const Mapping mapping = load_mapping_file(opt.mapping_path);
    const auto violations = validate_mapping(system, app.app, app.caps, mapping);
    if (violations.empty()) {
        std::cout << "mapping is feasible\n";
        return kExitOk;
    }
    for (const Violation& v : violations) std::cerr << "violation: " << v.to_string() << "\n";
    return kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Discrete-event simulator and execution optimizer for heterogeneous systems"};
    cli.require_subcommand(1);

    SimulateOptions sim;
    CLI::App* simulate_cmd =
        cli.add_subcommand("simulate", "Run one simulation instance and write the result JSON");
    simulate_cmd->add_option("--system", sim.system_path, "System model JSON")->required();
    simulate_cmd->add_option("--app", sim.app_path, "Application JSON")->required();
    simulate_cmd->add_option("--mapping", sim.mapping_path, "Mapping JSON");
    simulate_cmd->add_option("--mapper", sim.mapper, "Mapper name (round_robin)")
        ->default_val("round_robin");
    simulate_cmd->add_option("--count", sim.counts, "Mapper target: process=count");
    simulate_cmd->add_option("--params", sim.params, "Execution parameter: key=value");
    simulate_cmd->add_option("--params-file", sim.params_file, "Execution parameters JSON");
    simulate_cmd->add_option("--idle-scope", sim.idle_scope, "Idle power scope: allocated|all");
    simulate_cmd->add_option("--trace", sim.trace_path, "Write the event trace CSV here");
    simulate_cmd->add_option("--out", sim.out_path, "Result path (default stdout)");

    SweepOptions sweep;
    CLI::App* sweep_cmd = cli.add_subcommand("sweep", "Expand a suite, run it, emit the CSV");
    sweep_cmd->add_option("--suite", sweep.suite_path, "Suite JSON")->required();
    sweep_cmd->add_option("--workers", sweep.workers, "Parallel simulation workers")
        ->default_val(1);
    sweep_cmd->add_option("--out", sweep.out_path, "CSV path (default stdout)");

    FitOptions fit;
    CLI::App* fit_cmd = cli.add_subcommand("fit", "Least-squares fit of the compute model");
    fit_cmd->add_option("--samples", fit.samples_path, "CSV: data_size,performance,seconds")
        ->required();
    fit_cmd->add_option("--out", fit.out_path, "Model JSON path (default stdout)");

    SelectOptions sel;
    CLI::App* select_cmd =
        cli.add_subcommand("select", "Greedy device selection under a power limit");
    select_cmd->add_option("--system", sel.system_path, "System model JSON")->required();
    select_cmd->add_option("--app", sel.app_path, "Application JSON")->required();
    select_cmd->add_option("--power-limit", sel.limit, "Power cap in watts")->required();
    select_cmd->add_option("--device-power", sel.device_power, "Max draw: device=watts");
    select_cmd->add_option("--device-power-file", sel.power_file, "JSON map of device to watts");
    select_cmd->add_option("--worker-process", sel.worker, "Scalable process name")
        ->default_val("slave");
    select_cmd->add_option("--out", sel.out_path, "Mapping JSON path (default stdout)");

    ValidateOptions val;
    CLI::App* validate_cmd = cli.add_subcommand("validate", "Check a mapping against the model");
    validate_cmd->add_option("--system", val.system_path, "System model JSON")->required();
    validate_cmd->add_option("--app", val.app_path, "Application JSON")->required();
    validate_cmd->add_option("--mapping", val.mapping_path, "Mapping JSON")->required();

    CLI11_PARSE(cli, argc, argv);

    try {
        if (simulate_cmd->parsed()) return cmd_simulate(sim);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
        if (fit_cmd->parsed()) return cmd_fit(fit);
        if (select_cmd->parsed()) return cmd_select(sel);
        if (validate_cmd->parsed()) return cmd_validate(val);
    } catch (const DeadlockError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const RoutingError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kExitSimulation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
