#pragma once

#include <string>
#include <vector>

#include "hetsim/model.hpp"

namespace hetsim {

/// Minimal-hop path between two distinct devices, as an ordered list of link
/// ids. Ties are broken by smallest total startup time, then by
/// lexicographically smallest link-id sequence, so the result is
/// deterministic. Throws RoutingError (naming the pair) if no path exists.
std::vector<std::string> shortest_route(const SystemModel& system, const std::string& a,
                                        const std::string& b);

} // namespace hetsim
