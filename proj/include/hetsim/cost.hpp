#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetsim/model.hpp"

namespace hetsim {

/// A computation operation: an amount of device work plus the number of
/// cores it occupies while running.
struct ComputeOpSpec {
    double data_size = 0; // bytes or abstract work units
    int core_demand = 1;
};

/// Linear computation-time model: time = phi * data_size / performance + psi.
struct LinearComputeModel {
    double phi = 1.0; // dimensionless scale
    double psi = 0.0; // seconds offset

    bool operator==(const LinearComputeModel&) const = default;
};

/// Execution time of a computation operation on a device.
/// Throws ModelDomainError if the model yields a negative time.
double comp_time(const ComputeOpSpec& op, const Device& device, const LinearComputeModel& model);

/// Execution time of a communication operation over a route: per link,
/// startup time plus transfer time. The route must be non-empty.
double comm_time(double data_size, std::span<const NetworkLink* const> route);
double comm_time(double data_size, const std::vector<NetworkLink>& route);

/// Device power draw with `active_core_demand` cores busy:
/// p_idle + min(demand / ncores, 1) * (p_peak - p_idle).
double power_at(const Device& device, int active_core_demand);

struct FitSample {
    double data_size = 0;
    double performance = 1;
    double seconds = 0;
};

struct FitResult {
    LinearComputeModel model;
    double mean_percentage_error = 0; // percent, over samples with y != 0
};

/// Ordinary least squares fit of (phi, psi) over normalized abscissae
/// x = data_size / performance. Requires >= 2 samples. Degenerate abscissae
/// with differing y throw SingularFitError; a fit that predicts negative
/// time inside the sampled range throws ModelDomainError.
FitResult fit_linear_model(std::span<const FitSample> samples);

/// Pluggable compute-cost models keyed by "<process>.<op-kind>". Unlisted
/// keys fall back to the default model (phi=1, psi=0).
class CostRegistry {
public:
    void set(const std::string& key, LinearComputeModel model);
    const LinearComputeModel& lookup(const std::string& process, const std::string& kind) const;
    const std::map<std::string, LinearComputeModel>& models() const { return models_; }

    /// Parses {"<process>.<op-kind>": {"phi": .., "psi": ..}, ...}.
    static CostRegistry from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    std::map<std::string, LinearComputeModel> models_;
    LinearComputeModel default_{};
};

} // namespace hetsim
