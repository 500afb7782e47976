#include "pine/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pine/parallel.hpp"

namespace pine::diffusion {

InfluenceWeights compute_influence_weights(const AttributedGraph& g, double alpha1, double alpha2) {
    if (!(alpha1 >= 0.0 && alpha2 >= 0.0) || std::abs(alpha1 + alpha2 - 1.0) > 1e-9)
        throw ParameterError(fmt::format("alpha1 and alpha2 must be non-negative and sum to 1 (got {} + {})",
                                         alpha1, alpha2));
    const std::size_t m = g.num_edges();
    InfluenceWeights w;
    w.alpha1 = alpha1;
    w.alpha2 = alpha2;
    w.structural.resize(m);
    w.semantic.resize(m);
    w.combined.resize(m);
    const auto norms = feature_norms(g);
    const auto sources = g.in_sources();
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        const std::size_t lo = g.in_begin(i), hi = g.in_end(i);
        if (lo == hi) continue;
        const double structural = 1.0 / static_cast<double>(hi - lo);
        // Similarities lie in [-1, 1], so exp() needs no max-shift.
        double total = 0.0;
        for (std::size_t e = lo; e < hi; ++e) {
            w.semantic[e] = std::exp(cosine_similarity(g, norms, sources[e], i));
            total += w.semantic[e];
        }
        for (std::size_t e = lo; e < hi; ++e) {
            w.structural[e] = structural;
            w.semantic[e] /= total;
            w.combined[e] = alpha1 * w.structural[e] + alpha2 * w.semantic[e];
        }
    }
    return w;
}

namespace {

void check_seeds(const AttributedGraph& g, std::span<const NodeId> seeds) {
    for (NodeId s : seeds)
        if (s >= g.num_nodes()) throw ParameterError(fmt::format("seed node {} out of range", s));
}

NodeSet collect(const std::vector<char>& flags) {
    NodeSet out;
    for (NodeId v = 0; v < flags.size(); ++v)
        if (flags[v]) out.push_back(v);
    return out;
}

NodeSet lt_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                std::span<const double> thresholds, std::size_t max_steps) {
    const std::size_t n = g.num_nodes();
    std::vector<char> active(n, 0), touched(n, 0);
    std::vector<double> accumulated(n, 0.0);
    std::vector<NodeId> frontier, candidates;
    for (NodeId s : seeds)
        if (!active[s]) {
            active[s] = 1;
            frontier.push_back(s);
        }
    std::sort(frontier.begin(), frontier.end());
    const auto targets = g.out_targets();
    const auto out_to_in = g.out_to_in();
    for (std::size_t step = 0; step < max_steps && !frontier.empty(); ++step) {
        candidates.clear();
        for (NodeId j : frontier) {
            for (std::size_t k = g.out_begin(j); k < g.out_end(j); ++k) {
                const NodeId i = targets[k];
                if (active[i]) continue;
                accumulated[i] += weights.combined[out_to_in[k]];
                if (!touched[i]) {
                    touched[i] = 1;
                    candidates.push_back(i);
                }
            }
        }
        frontier.clear();
        for (NodeId i : candidates) {
            touched[i] = 0;
            if (accumulated[i] >= thresholds[i]) {
                active[i] = 1;
                frontier.push_back(i);
            }
        }
        std::sort(frontier.begin(), frontier.end());
    }
    return collect(active);
}

}  // namespace

NodeSet run_lt_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                    std::span<const double> thresholds, std::size_t max_steps) {
    check_seeds(g, seeds);
    if (thresholds.size() != g.num_nodes()) throw ParameterError("one threshold per node is required");
    return lt_plus(g, weights, seeds, thresholds, max_steps);
}

NodeSet run_lt_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                    CounterRng& rng, std::size_t max_steps) {
    check_seeds(g, seeds);
    std::vector<double> thresholds(g.num_nodes());
    for (auto& t : thresholds) t = rng.uniform_open();
    return lt_plus(g, weights, seeds, thresholds, max_steps);
}

NodeSet run_ic_plus(const AttributedGraph& g, const InfluenceWeights& weights, std::span<const NodeId> seeds,
                    CounterRng& rng, std::size_t max_steps) {
    check_seeds(g, seeds);
    const std::size_t n = g.num_nodes();
    std::vector<char> active(n, 0);
    std::vector<NodeId> frontier, next;
    for (NodeId s : seeds)
        if (!active[s]) {
            active[s] = 1;
            frontier.push_back(s);
        }
    std::sort(frontier.begin(), frontier.end());
    const auto targets = g.out_targets();
    const auto out_to_in = g.out_to_in();
    for (std::size_t step = 0; step < max_steps && !frontier.empty(); ++step) {
        next.clear();
        for (NodeId j : frontier) {
            for (std::size_t k = g.out_begin(j); k < g.out_end(j); ++k) {
                const NodeId i = targets[k];
                if (active[i]) continue;
                if (rng.uniform() < weights.combined[out_to_in[k]]) {
                    active[i] = 1;
                    next.push_back(i);
                }
            }
        }
        std::sort(next.begin(), next.end());
        frontier.swap(next);
    }
    return collect(active);
}

NodeSet run_sir(const AttributedGraph& g, double beta, double gamma, std::span<const NodeId> seeds,
                std::size_t max_steps, CounterRng& rng) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError(fmt::format("SIR beta must lie in [0, 1], got {}", beta));
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ParameterError(fmt::format("SIR gamma must lie in [0, 1], got {}", gamma));
    check_seeds(g, seeds);
    enum : char { kSusceptible = 0, kInfected = 1, kRecovered = 2 };
    const std::size_t n = g.num_nodes();
    std::vector<char> state(n, kSusceptible);
    std::vector<NodeId> infected, next;
    for (NodeId s : seeds)
        if (state[s] == kSusceptible) {
            state[s] = kInfected;
            infected.push_back(s);
        }
    std::sort(infected.begin(), infected.end());
    for (std::size_t step = 0; step < max_steps && !infected.empty(); ++step) {
        next.clear();
        // Infections use the infected set at the start of the step.
        std::vector<NodeId> fresh;
        for (NodeId j : infected)
            for (NodeId i : g.out_neighbors(j))
                if (state[i] == kSusceptible && rng.uniform() < beta) {
                    state[i] = kInfected;
                    fresh.push_back(i);
                }
        for (NodeId j : infected) {
            if (rng.uniform() < gamma)
                state[j] = kRecovered;
            else
                next.push_back(j);
        }
        next.insert(next.end(), fresh.begin(), fresh.end());
        std::sort(next.begin(), next.end());
        infected.swap(next);
    }
    NodeSet reached;
    for (NodeId v = 0; v < n; ++v)
        if (state[v] != kSusceptible) reached.push_back(v);
    return reached;
}

Model parse_model(std::string_view name) {
    if (name == "ltp" || name == "lt+" || name == "LT+") return Model::LinearThresholdPlus;
    if (name == "icp" || name == "ic+" || name == "IC+") return Model::IndependentCascadePlus;
    if (name == "sir" || name == "SIR") return Model::Sir;
    throw ParameterError("unknown diffusion model '" + std::string(name) + "' (expected ltp, icp or sir)");
}

std::string_view model_name(Model model) {
    switch (model) {
        case Model::LinearThresholdPlus: return "ltp";
        case Model::IndependentCascadePlus: return "icp";
        case Model::Sir: return "sir";
    }
    return "?";
}

double epidemic_threshold(const AttributedGraph& g) {
    const std::size_t n = g.num_nodes();
    if (n == 0) return std::numeric_limits<double>::infinity();
    double k1 = 0.0, k2 = 0.0;
    std::vector<NodeId> merged;
    for (NodeId v = 0; v < n; ++v) {
        const auto in = g.in_neighbors(v);
        const auto out = g.out_neighbors(v);
        merged.clear();
        std::set_union(in.begin(), in.end(), out.begin(), out.end(), std::back_inserter(merged));
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        const double k = static_cast<double>(merged.size());
        k1 += k;
        k2 += k * k;
    }
    k1 /= static_cast<double>(n);
    k2 /= static_cast<double>(n);
    const double denom = k2 - k1;
    return denom > 0.0 ? k1 / denom : std::numeric_limits<double>::infinity();
}

double resolve_sir_beta(const AttributedGraph& g, const DiffusionConfig& config) {
    if (config.sir_beta >= 0.0) return config.sir_beta;
    return std::min(1.0, 1.5 * epidemic_threshold(g));
}

DiffusionResult influence_spread(const AttributedGraph& g, const DiffusionConfig& config,
                                 std::span<const NodeId> seeds) {
    InfluenceWeights weights;
    if (config.model != Model::Sir) weights = compute_influence_weights(g, config.alpha1, config.alpha2);
    return influence_spread(g, config, seeds, weights);
}

DiffusionResult influence_spread(const AttributedGraph& g, const DiffusionConfig& config,
                                 std::span<const NodeId> seeds, const InfluenceWeights& weights) {
    if (config.num_runs == 0) throw ParameterError("num_runs must be at least 1");
    if (config.model != Model::Sir && weights.combined.size() != g.num_edges())
        throw ParameterError("influence weights do not match the graph");
    check_seeds(g, seeds);
    const double beta = resolve_sir_beta(g, config);
    const std::size_t runs = config.num_runs;
    DiffusionResult result;
    result.runs = runs;
    result.activated_counts.assign(runs, 0);
    const unsigned workers = config.workers ? config.workers : default_worker_count();
    parallel_for(runs, workers, [&](std::size_t r) {
        CounterRng rng(config.rng_seed, r);
        switch (config.model) {
            case Model::LinearThresholdPlus:
                result.activated_counts[r] = run_lt_plus(g, weights, seeds, rng, config.max_steps).size();
                break;
            case Model::IndependentCascadePlus:
                result.activated_counts[r] = run_ic_plus(g, weights, seeds, rng, config.max_steps).size();
                break;
            case Model::Sir:
                result.activated_counts[r] =
                    run_sir(g, beta, config.sir_gamma, seeds, config.max_steps, rng).size();
                break;
        }
    });
    const double n = static_cast<double>(std::max<std::size_t>(g.num_nodes(), 1));
    double sum = 0.0;
    for (auto c : result.activated_counts) sum += static_cast<double>(c);
    result.mean_spread = sum / static_cast<double>(runs) / n;
    if (runs > 1) {
        double sq = 0.0;
        for (auto c : result.activated_counts) {
            const double d = static_cast<double>(c) / n - result.mean_spread;
            sq += d * d;
        }
        result.std_spread = std::sqrt(sq / static_cast<double>(runs - 1));
    }
    return result;
}

}  // namespace pine::diffusion
