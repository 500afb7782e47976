#include "pine/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "pine/parallel.hpp"

namespace pine::centrality {

namespace {

unsigned resolve_workers(unsigned workers) { return workers ? workers : default_worker_count(); }

// Fixed partition of source nodes; per-block accumulators are merged in block
// order so floating-point sums do not depend on the worker count.
constexpr std::size_t kSourceBlocks = 64;

// Out-neighbors with parallel typed edges collapsed (targets are sorted).
template <typename Fn>
void for_distinct_out(const AttributedGraph& g, NodeId v, Fn&& fn) {
    const auto nbrs = g.out_neighbors(v);
    for (std::size_t k = 0; k < nbrs.size(); ++k)
        if (k == 0 || nbrs[k] != nbrs[k - 1]) fn(nbrs[k]);
}

}  // namespace

ScoreVector degree(const AttributedGraph& g) {
    ScoreVector s{std::vector<double>(g.num_nodes()), "degree"};
    for (NodeId v = 0; v < g.num_nodes(); ++v) s.values[v] = static_cast<double>(g.in_degree(v) + g.out_degree(v));
    return s;
}

ScoreVector out_degree(const AttributedGraph& g) {
    ScoreVector s{std::vector<double>(g.num_nodes()), "out_degree"};
    for (NodeId v = 0; v < g.num_nodes(); ++v) s.values[v] = static_cast<double>(g.out_degree(v));
    return s;
}

ScoreVector weighted_out_degree(const AttributedGraph& g) {
    const auto norms = feature_norms(g);
    ScoreVector s{std::vector<double>(g.num_nodes()), "weighted"};
    for (NodeId j = 0; j < g.num_nodes(); ++j) {
        double sum = 0.0;
        for (NodeId i : g.out_neighbors(j)) sum += cosine_similarity(g, norms, j, i);
        s.values[j] = sum;
    }
    return s;
}

ScoreVector relative_out_degree(const AttributedGraph& g, double tuning) {
    if (!(tuning >= 0.0 && tuning <= 1.0))
        throw ParameterError(fmt::format("relative out-degree tuning must lie in [0, 1], got {}", tuning));
    const auto k = out_degree(g);
    const auto w = weighted_out_degree(g);
    ScoreVector s{std::vector<double>(g.num_nodes()), "relative"};
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (k.values[v] == 0.0) continue;
        if (tuning == 0.0) {
            s.values[v] = k.values[v];
        } else if (tuning == 1.0) {
            s.values[v] = w.values[v];
        } else {
            // Negative similarity sums have no real fractional power.
            const double weighted = std::max(w.values[v], 0.0);
            s.values[v] = std::pow(k.values[v], 1.0 - tuning) * std::pow(weighted, tuning);
        }
    }
    return s;
}

IterativeResult pagerank(const AttributedGraph& g, const PageRankOptions& options) {
    if (!(options.damping > 0.0 && options.damping < 1.0))
        throw ParameterError(fmt::format("PageRank damping must lie in (0, 1), got {}", options.damping));
    const std::size_t n = g.num_nodes();
    IterativeResult result;
    result.scores.method_name = "pagerank";
    if (n == 0) {
        result.converged = true;
        return result;
    }
    const double d = options.damping;
    std::vector<double> rank(n, 1.0 / static_cast<double>(n)), next(n);
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v)
            if (g.out_degree(v) == 0) dangling += rank[v];
        const double base = (1.0 - d) / static_cast<double>(n) + d * dangling / static_cast<double>(n);
        for (NodeId i = 0; i < n; ++i) {
            double sum = 0.0;
            for (NodeId j : g.in_neighbors(i)) sum += rank[j] / static_cast<double>(g.out_degree(j));
            next[i] = base + d * sum;
        }
        double change = 0.0;
        for (NodeId v = 0; v < n; ++v) change += std::abs(next[v] - rank[v]);
        rank.swap(next);
        result.iterations = it;
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    const double total = std::accumulate(rank.begin(), rank.end(), 0.0);
    for (auto& r : rank) r /= total;
    result.raw = rank;
    result.scores.values = std::move(rank);
    return result;
}

IterativeResult katz(const AttributedGraph& g, const KatzOptions& options) {
    if (!(options.attenuation > 0.0))
        throw ParameterError(fmt::format("Katz attenuation must be positive, got {}", options.attenuation));
    const std::size_t n = g.num_nodes();
    const double a = options.attenuation;
    IterativeResult result;
    result.scores.method_name = "katz";
    std::vector<double> x(n, 0.0), next(n);
    double previous_change = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        double change = 0.0;
        for (NodeId i = 0; i < n; ++i) {
            double sum = 0.0;
            for (NodeId j : g.in_neighbors(i)) sum += x[j] + 1.0;
            next[i] = a * sum;
            change += std::abs(next[i] - x[i]);
        }
        x.swap(next);
        result.iterations = it;
        if (!std::isfinite(change))
            throw DivergenceError(fmt::format("Katz series diverged (attenuation {}); use a smaller attenuation", a));
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
        growth_streak = change > previous_change ? growth_streak + 1 : 0;
        if (growth_streak >= 10)
            throw DivergenceError(fmt::format(
                "Katz update norm grew for 10 consecutive iterations (attenuation {}); use a smaller attenuation",
                a));
        previous_change = change;
    }
    result.raw = x;
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
        std::fill(x.begin(), x.end(), n ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0);
    } else {
        for (auto& v : x) v /= norm;
    }
    result.scores.values = std::move(x);
    return result;
}

ScoreVector closeness(const AttributedGraph& g, unsigned workers) {
    const std::size_t n = g.num_nodes();
    ScoreVector s{std::vector<double>(n, 0.0), "closeness"};
    const std::size_t block = (n + kSourceBlocks - 1) / kSourceBlocks;
    parallel_for(kSourceBlocks, resolve_workers(workers), [&](std::size_t b) {
        std::vector<std::uint32_t> dist(n, std::numeric_limits<std::uint32_t>::max());
        std::vector<NodeId> queue;
        queue.reserve(n);
        const std::size_t lo = b * block, hi = std::min(n, lo + block);
        for (std::size_t src = lo; src < hi; ++src) {
            queue.clear();
            queue.push_back(static_cast<NodeId>(src));
            dist[src] = 0;
            double total = 0.0;
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const NodeId v = queue[head];
                for (NodeId w : g.out_neighbors(v)) {
                    if (dist[w] != std::numeric_limits<std::uint32_t>::max()) continue;
                    dist[w] = dist[v] + 1;
                    total += dist[w];
                    queue.push_back(w);
                }
            }
            const double reached = static_cast<double>(queue.size());
            if (reached > 1.0)
                s.values[src] = (reached - 1.0) / total * (reached - 1.0) / static_cast<double>(n - 1);
            for (NodeId v : queue) dist[v] = std::numeric_limits<std::uint32_t>::max();
        }
    });
    return s;
}

ScoreVector betweenness(const AttributedGraph& g, unsigned workers) {
    const std::size_t n = g.num_nodes();
    ScoreVector s{std::vector<double>(n, 0.0), "betweenness"};
    if (n < 3) return s;
    const std::size_t blocks = std::min(kSourceBlocks, n);
    const std::size_t block = (n + blocks - 1) / blocks;
    std::vector<std::vector<double>> partial(blocks);
    parallel_for(blocks, resolve_workers(workers), [&](std::size_t b) {
        auto& acc = partial[b];
        acc.assign(n, 0.0);
        std::vector<std::int64_t> dist(n, -1);
        std::vector<double> sigma(n, 0.0), delta(n, 0.0);
        std::vector<NodeId> order;
        order.reserve(n);
        const std::size_t lo = b * block, hi = std::min(n, lo + block);
        for (std::size_t src = lo; src < hi; ++src) {
            order.clear();
            order.push_back(static_cast<NodeId>(src));
            dist[src] = 0;
            sigma[src] = 1.0;
            for (std::size_t head = 0; head < order.size(); ++head) {
                const NodeId v = order[head];
                for_distinct_out(g, v, [&](NodeId w) {
                    if (dist[w] < 0) {
                        dist[w] = dist[v] + 1;
                        order.push_back(w);
                    }
                    if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
                });
            }
            for (std::size_t k = order.size(); k-- > 0;) {
                const NodeId w = order[k];
                for_distinct_out(g, w, [&](NodeId x) {
                    if (dist[x] == dist[w] + 1) delta[w] += sigma[w] / sigma[x] * (1.0 + delta[x]);
                });
                if (w != src) acc[w] += delta[w];
            }
            for (NodeId v : order) {
                dist[v] = -1;
                sigma[v] = 0.0;
                delta[v] = 0.0;
            }
        }
    });
    const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (const auto& acc : partial)
        for (std::size_t v = 0; v < n; ++v) s.values[v] += acc[v];
    for (auto& v : s.values) v /= norm;
    return s;
}

std::vector<NodeId> voterank(const AttributedGraph& g, std::size_t k) {
    const std::size_t n = g.num_nodes();
    if (k > n) throw ParameterError(fmt::format("VoteRank k = {} exceeds node count {}", k, n));
    const double mean_out = n ? static_cast<double>(g.num_edges()) / static_cast<double>(n) : 0.0;
    const double suppression = mean_out > 0.0 ? 1.0 / mean_out : 0.0;
    std::vector<double> ability(n, 1.0), score(n, 0.0);
    std::vector<char> elected(n, 0);
    std::vector<NodeId> ranking;
    ranking.reserve(n);

    // A node's vote score is the summed ability of its out-neighbors, which
    // vote for the nodes supplying them.
    auto tally = [&] {
        for (NodeId v = 0; v < n; ++v) {
            double sum = 0.0;
            if (!elected[v])
                for (NodeId w : g.out_neighbors(v)) sum += ability[w];
            score[v] = sum;
        }
    };
    for (std::size_t round = 0; round < k; ++round) {
        tally();
        NodeId best = 0;
        bool found = false;
        for (NodeId v = 0; v < n; ++v) {
            if (elected[v]) continue;
            if (!found || score[v] > score[best]) {
                best = v;
                found = true;
            }
        }
        elected[best] = 1;
        ranking.push_back(best);
        ability[best] = 0.0;
        for (NodeId w : g.out_neighbors(best)) ability[w] = std::max(0.0, ability[w] - suppression);
    }
    tally();
    std::vector<NodeId> rest;
    for (NodeId v = 0; v < n; ++v)
        if (!elected[v]) rest.push_back(v);
    std::stable_sort(rest.begin(), rest.end(), [&](NodeId a, NodeId b) { return score[a] > score[b]; });
    ranking.insert(ranking.end(), rest.begin(), rest.end());
    return ranking;
}

ScoreVector voterank_scores(const AttributedGraph& g, std::size_t k) {
    const auto ranking = voterank(g, k);
    ScoreVector s{std::vector<double>(g.num_nodes()), "voterank"};
    for (std::size_t pos = 0; pos < ranking.size(); ++pos)
        s.values[ranking[pos]] = static_cast<double>(ranking.size() - pos);
    return s;
}

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names = {"degree",   "out_degree", "weighted",  "relative",   "pagerank",
                                                   "voterank", "katz",       "closeness", "betweenness"};
    return names;
}

bool is_method(std::string_view name) {
    const auto& names = method_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

ScoreVector compute(std::string_view method, const AttributedGraph& g, const Options& options) {
    const unsigned workers = resolve_workers(options.workers);
    auto check_budget = [&] {
        if (g.num_nodes() > options.node_budget)
            throw ParameterError(fmt::format("{} refused: {} nodes exceeds the node budget of {}", method,
                                             g.num_nodes(), options.node_budget));
    };
    if (method == "degree") return degree(g);
    if (method == "out_degree") return out_degree(g);
    if (method == "weighted") return weighted_out_degree(g);
    if (method == "relative") return relative_out_degree(g, options.relative_tuning);
    if (method == "pagerank") return pagerank(g, options.pagerank).scores;
    if (method == "katz") return katz(g, options.katz).scores;
    if (method == "voterank")
        return voterank_scores(g, options.voterank_k ? options.voterank_k : g.num_nodes() / 10);
    if (method == "closeness") {
        check_budget();
        return closeness(g, workers);
    }
    if (method == "betweenness") {
        check_budget();
        return betweenness(g, workers);
    }
    throw ParameterError("unknown centrality method '" + std::string(method) + "'");
}

}  // namespace pine::centrality
