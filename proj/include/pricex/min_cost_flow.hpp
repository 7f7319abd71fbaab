#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace pricex {

// Min-cost flow by successive shortest augmenting paths with node potentials.
// The solve below is profit-maximal rather than flow-maximal: it keeps
// augmenting only while the cheapest residual source->sink path has strictly
// negative cost, so arcs with negative cost (profitable edges) are taken
// exactly when a whole path through them pays off.
class MinCostFlow {
public:
    explicit MinCostFlow(int node_count)
        : head_(node_count, -1), node_count_(node_count) {}

    // Returns an arc handle usable with flow_on().
    int add_arc(int from, int to, int capacity, double cost) {
        int id = static_cast<int>(arcs_.size());
        arcs_.push_back({to, head_[from], capacity, cost});
        head_[from] = id;
        arcs_.push_back({from, head_[to], 0, -cost});
        head_[to] = id + 1;
        return id;
    }

    int flow_on(int arc_handle) const { return arcs_[arc_handle ^ 1].capacity; }

    // Augments unit paths while they strictly reduce total cost. Returns the
    // total cost of the flow that was sent.
    double solve_profit_maximal(int source, int sink) {
        const double kInf = std::numeric_limits<double>::infinity();
        std::vector<double> potential(node_count_, 0.0);
        init_potentials(source, potential);

        double total_cost = 0.0;
        std::vector<double> dist(node_count_);
        std::vector<int> parent_arc(node_count_);
        using Item = std::pair<double, int>;

        for (;;) {
            std::fill(dist.begin(), dist.end(), kInf);
            std::fill(parent_arc.begin(), parent_arc.end(), -1);
            dist[source] = 0.0;
            std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
            heap.push({0.0, source});
            while (!heap.empty()) {
                auto [d, u] = heap.top();
                heap.pop();
                if (d > dist[u]) continue;
                for (int e = head_[u]; e != -1; e = arcs_[e].next) {
                    const Arc& a = arcs_[e];
                    if (a.capacity <= 0) continue;
                    // reduced cost; clamp tiny negatives from fp drift
                    double rc = a.cost + potential[u] - potential[a.to];
                    if (rc < 0.0) rc = 0.0;
                    double nd = d + rc;
                    if (nd < dist[a.to]) {
                        dist[a.to] = nd;
                        parent_arc[a.to] = e;
                        heap.push({nd, a.to});
                    }
                }
            }
            if (dist[sink] == kInf) break;
            double path_cost = dist[sink] + potential[sink] - potential[source];
            if (path_cost >= -kEps) break;

            for (int v = 0; v < node_count_; ++v)
                if (dist[v] < kInf) potential[v] += dist[v];

            int bottleneck = std::numeric_limits<int>::max();
            for (int v = sink; v != source;) {
                const Arc& a = arcs_[parent_arc[v]];
                bottleneck = std::min(bottleneck, a.capacity);
                v = arcs_[parent_arc[v] ^ 1].to;
            }
            for (int v = sink; v != source;) {
                int e = parent_arc[v];
                arcs_[e].capacity -= bottleneck;
                arcs_[e ^ 1].capacity += bottleneck;
                v = arcs_[e ^ 1].to;
            }
            total_cost += path_cost * bottleneck;
        }
        return total_cost;
    }

private:
    struct Arc {
        int to;
        int next;
        int capacity;
        double cost;
    };

    static constexpr double kEps = 1e-12;

    // Bellman-Ford (queue form) to seed potentials; the initial network may
    // carry negative-cost arcs before any residuals exist.
    void init_potentials(int source, std::vector<double>& potential) {
        const double kInf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(node_count_, kInf);
        std::vector<char> queued(node_count_, 0);
        dist[source] = 0.0;
        std::queue<int> q;
        q.push(source);
        queued[source] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            queued[u] = 0;
            for (int e = head_[u]; e != -1; e = arcs_[e].next) {
                const Arc& a = arcs_[e];
                if (a.capacity <= 0) continue;
                double nd = dist[u] + a.cost;
                if (nd < dist[a.to] - 1e-15) {
                    dist[a.to] = nd;
                    if (!queued[a.to]) {
                        q.push(a.to);
                        queued[a.to] = 1;
                    }
                }
            }
        }
        for (int v = 0; v < node_count_; ++v)
            if (dist[v] < kInf) potential[v] = dist[v];
    }

    std::vector<Arc> arcs_;
    std::vector<int> head_;
    int node_count_;
};

} // namespace pricex
