#ifndef MBRW_DIGRAPH_HPP
#define MBRW_DIGRAPH_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

// Small directed-graph helpers over adjacency lists indexed 0..n-1.

namespace mbrw::digraph {

using Adjacency = std::vector<std::vector<std::size_t>>;

/// Tarjan's algorithm. Component ids are assigned in reverse topological
/// order of the condensation; `components` lists members sorted ascending.
struct Components {
    std::vector<std::size_t> id;
    std::vector<std::vector<std::size_t>> components;
};

inline Components strongly_connected_components(const Adjacency& adj)
{
    const std::size_t n = adj.size();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    Components out;
    out.id.assign(n, 0);
    std::size_t counter = 0;

    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w : adj[v]) {
            if (index[w] == unvisited) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> comp;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                out.id[w] = out.components.size();
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.components.push_back(std::move(comp));
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (index[v] == unvisited) {
            visit(v);
        }
    }
    return out;
}

/// Boolean transitive closure (Warshall); reach[u][v] iff a path of length >= 1 exists.
inline std::vector<std::vector<bool>> transitive_closure(const Adjacency& adj)
{
    const std::size_t n = adj.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v : adj[u]) {
            reach[u][v] = true;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i][k]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[k][j]) {
                    reach[i][j] = true;
                }
            }
        }
    }
    return reach;
}

inline bool strongly_connected(const Adjacency& adj)
{
    if (adj.empty()) {
        return false;
    }
    const auto reach = transitive_closure(adj);
    for (std::size_t i = 0; i < adj.size(); ++i) {
        for (std::size_t j = 0; j < adj.size(); ++j) {
            if (!reach[i][j]) {
                return false;
            }
        }
    }
    return true;
}

inline bool weakly_connected(const Adjacency& adj)
{
    const std::size_t n = adj.size();
    if (n == 0) {
        return false;
    }
    Adjacency undirected(n);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v : adj[u]) {
            undirected[u].push_back(v);
            undirected[v].push_back(u);
        }
    }
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> todo{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!todo.empty()) {
        const std::size_t u = todo.back();
        todo.pop_back();
        for (std::size_t v : undirected[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                todo.push_back(v);
            }
        }
    }
    return count == n;
}

/// BFS hop distances from `source`; unreachable vertices get max().
inline std::vector<std::size_t> bfs_distances(const Adjacency& adj, std::size_t source)
{
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(adj.size(), inf);
    std::queue<std::size_t> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adj[u]) {
            if (dist[v] == inf) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

} // namespace mbrw::digraph

#endif
