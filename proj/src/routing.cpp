#include "hetsim/routing.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>

namespace hetsim {

namespace {

struct PathState {
    int hops = std::numeric_limits<int>::max();
    double startup = 0;
    std::vector<std::string> links;

    // (hops, total startup, lexicographic link-id sequence)
    bool better_than(const PathState& o) const {
        if (hops != o.hops) return hops < o.hops;
        if (startup != o.startup) return startup < o.startup;
        return links < o.links;
    }
};

} // namespace

std::vector<std::string> shortest_route(const SystemModel& system, const std::string& a,
                                        const std::string& b) {
    system.device(a);
    system.device(b);
    if (a == b) throw RoutingError("route endpoints must differ: " + a);

    // Layered relaxation over hop counts; the graph is small, so the
    // composite tie-break is applied directly.
    std::map<std::string, PathState> best;
    best[a] = PathState{0, 0.0, {}};
    std::vector<std::string> frontier{a};
    for (int hop = 0; !frontier.empty(); ++hop) {
        std::vector<std::string> next;
        for (const std::string& dev : frontier) {
            const PathState& cur = best[dev];
            if (cur.hops != hop) continue; // superseded
            for (std::size_t li : system.adjacent_links(dev)) {
                const NetworkLink& l = system.links()[li];
                const std::string& other = (l.a == dev) ? l.b : l.a;
                PathState cand;
                cand.hops = hop + 1;
                cand.startup = cur.startup + l.t_startup_s;
                cand.links = cur.links;
                cand.links.push_back(l.id);
                auto it = best.find(other);
                if (it == best.end() || cand.better_than(it->second)) {
                    best[other] = std::move(cand);
                    next.push_back(other);
                }
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        frontier = std::move(next);
    }

    auto it = best.find(b);
    if (it == best.end())
        throw RoutingError("no route between devices " + a + " and " + b);
    return it->second.links;
}

} // namespace hetsim
