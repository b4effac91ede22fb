#pragma once

#include <cstdint>
#include <vector>

#include "hetsim/engine.hpp"

namespace hetsim {

// Message tags used by the built-in behaviors. Package orders carry the
// package index as the tag, so tags >= 0 are reserved for them.
inline constexpr int kTagStop = -1;
inline constexpr int kTagResult = -2;
inline constexpr int kTagModel = -3;
inline constexpr int kTagPrefetchOrder = -4;
inline constexpr int kTagPrefetched = -5;

/// One work package dispatched by a farm master.
struct FarmPackage {
    double order_size_b = 0;   // bytes shipped with the dispatch message
    double fetch_size_b = 0;   // bytes pulled from the data device, if any
    double compute_work = 0;   // work units for the compute operation
    double result_size_b = 0;  // bytes sent back to the master
};

/// Registers the built-in behaviors:
///   task_farm            master/slave dynamic greedy package farm
///   task_farm_prefetch   same farm with per-slave prefetcher processes that
///                        overlap the next package's remote fetch with the
///                        current compute
///   dnn_training         master/slave iterative training with per-iteration
///                        barrier and round-robin archive assignment
///   vector_similarity    master/slave farm over data chunks with
///                        quadratic-size results
///   idle                 emits no operations
void register_builtin_behaviors(BehaviorRegistry& registry);

} // namespace hetsim
