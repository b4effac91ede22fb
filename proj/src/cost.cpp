#include "hetsim/cost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hetsim {

double comp_time(const ComputeOpSpec& op, const Device& device, const LinearComputeModel& model) {
    const double t = model.phi * (op.data_size / device.performance) + model.psi;
    if (t < 0) {
        std::ostringstream os;
        os << "compute model (phi=" << model.phi << ", psi=" << model.psi
           << ") yields negative time " << t << " for data_size=" << op.data_size << " on device "
           << device.id;
        throw ModelDomainError(os.str());
    }
    return t;
}

double comm_time(double data_size, std::span<const NetworkLink* const> route) {
    double t = 0;
    for (const NetworkLink* l : route) t += l->t_startup_s + data_size / l->bandwidth_bps;
    return t;
}

double comm_time(double data_size, const std::vector<NetworkLink>& route) {
    double t = 0;
    for (const NetworkLink& l : route) t += l.t_startup_s + data_size / l.bandwidth_bps;
    return t;
}

double power_at(const Device& device, int active_core_demand) {
    const double utilization =
        std::min(static_cast<double>(active_core_demand) / device.ncores, 1.0);
    return device.p_idle_w + utilization * (device.p_peak_w - device.p_idle_w);
}

FitResult fit_linear_model(std::span<const FitSample> samples) {
    if (samples.size() < 2) throw SingularFitError("fit requires at least 2 samples");

    double sx = 0, sy = 0;
    for (const FitSample& s : samples) {
        sx += s.data_size / s.performance;
        sy += s.seconds;
    }
    const double n = static_cast<double>(samples.size());
    const double mx = sx / n, my = sy / n;

    double sxx = 0, sxy = 0;
    for (const FitSample& s : samples) {
        const double dx = s.data_size / s.performance - mx;
        sxx += dx * dx;
        sxy += dx * (s.seconds - my);
    }

    LinearComputeModel model;
    if (sxx == 0) {
        bool all_equal = true;
        for (const FitSample& s : samples) all_equal = all_equal && s.seconds == samples[0].seconds;
        if (!all_equal)
            throw SingularFitError("degenerate abscissae with differing observations");
        model.phi = 0;
        model.psi = samples[0].seconds;
    } else {
        model.phi = sxy / sxx;
        model.psi = my - model.phi * mx;
    }

    // The fitted model must stay non-negative over the sampled range.
    double xmin = samples[0].data_size / samples[0].performance, xmax = xmin;
    for (const FitSample& s : samples) {
        xmin = std::min(xmin, s.data_size / s.performance);
        xmax = std::max(xmax, s.data_size / s.performance);
    }
    if (model.phi * xmin + model.psi < 0 || model.phi * xmax + model.psi < 0)
        throw ModelDomainError("fitted model predicts negative time inside the sampled range");

    double err_sum = 0;
    std::size_t err_n = 0;
    for (const FitSample& s : samples) {
        if (s.seconds == 0) continue;
        const double predicted = model.phi * (s.data_size / s.performance) + model.psi;
        err_sum += std::abs(s.seconds - predicted) / std::abs(s.seconds);
        ++err_n;
    }
    return FitResult{model, err_n ? 100.0 * err_sum / err_n : 0.0};
}

void CostRegistry::set(const std::string& key, LinearComputeModel model) {
    models_[key] = model;
}

const LinearComputeModel& CostRegistry::lookup(const std::string& process,
                                               const std::string& kind) const {
    auto it = models_.find(process + "." + kind);
    return it == models_.end() ? default_ : it->second;
}

CostRegistry CostRegistry::from_json(const nlohmann::json& j) {
    CostRegistry reg;
    if (j.is_null()) return reg;
    if (!j.is_object()) throw ParseError("cost_models must be an object");
    for (const auto& [key, value] : j.items()) {
        LinearComputeModel m;
        if (!value.is_object() || !value.contains("phi") || !value.contains("psi"))
            throw ParseError("cost_models." + key + ": expected {\"phi\", \"psi\"}");
        m.phi = value.at("phi").get<double>();
        m.psi = value.at("psi").get<double>();
        reg.set(key, m);
    }
    return reg;
}

nlohmann::json CostRegistry::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, m] : models_) j[key] = {{"phi", m.phi}, {"psi", m.psi}};
    return j;
}

} // namespace hetsim
