#pragma once

#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "eigenfiber/kernel.hpp"

namespace eigenfiber {

/// Vertex-pair metric. Values of +infinity mark unreachable pairs.
using Metric = std::function<double(int, int)>;

inline std::vector<std::vector<int>> adjacency_from_edges(
    int n, const std::vector<std::tuple<int, int, double>>& edges) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [x, y, b] : edges) {
        (void)b;
        adj[static_cast<std::size_t>(x)].push_back(y);
        adj[static_cast<std::size_t>(y)].push_back(x);
    }
    return adj;
}

/// Single-source hop distances by breadth-first search.
inline std::vector<double> bfs_hop_distances(const std::vector<std::vector<int>>& adj, int from) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(adj.size(), inf);
    std::deque<int> queue;
    dist[static_cast<std::size_t>(from)] = 0.0;
    queue.push_back(from);
    while (!queue.empty()) {
        const int x = queue.front();
        queue.pop_front();
        for (int y : adj[static_cast<std::size_t>(x)]) {
            if (dist[static_cast<std::size_t>(y)] == inf) {
                dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1.0;
                queue.push_back(y);
            }
        }
    }
    return dist;
}

/// Shortest-path edge-count metric backed by a precomputed all-pairs table.
/// Throws on disconnected input when `require_connected` is set.
inline Metric hop_metric_from_edges(int n, const std::vector<std::tuple<int, int, double>>& edges,
                                    bool require_connected = true) {
    const auto adj = adjacency_from_edges(n, edges);
    auto table = std::make_shared<std::vector<std::vector<double>>>();
    table->reserve(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) {
        table->push_back(bfs_hop_distances(adj, x));
        if (require_connected)
            for (double d : table->back())
                if (d == std::numeric_limits<double>::infinity())
                    throw std::invalid_argument("hop metric: disconnected input");
    }
    return [table](int a, int b) { return (*table)[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };
}

}  // namespace eigenfiber
