#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "pine/gat.hpp"
#include "pine/rng.hpp"

namespace testing {

/// Every parameter uniform in [-scale, scale].
template <typename Real>
void randomize(pine::gat::GatModel<Real>& model, std::uint64_t seed, double scale = 0.5) {
    pine::CounterRng rng(seed, 99);
    auto fill = [&](auto& m) {
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = static_cast<Real>((2 * rng.uniform() - 1) * scale);
    };
    for (auto& layer : model.layers()) {
        fill(layer.projection);
        fill(layer.source_weight);
        fill(layer.target_weight);
    }
}

/// Visits every scalar parameter with (analytic gradient, reference to the value).
template <typename Real>
void for_each_parameter(pine::gat::GatModel<Real>& model, const std::vector<pine::gat::Layer<Real>>& grads,
                        const std::function<void(Real&, Real)>& fn) {
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        auto& p = model.layers()[l];
        const auto& g = grads[l];
        for (Eigen::Index k = 0; k < p.projection.size(); ++k) fn(p.projection.data()[k], g.projection.data()[k]);
        for (Eigen::Index k = 0; k < p.source_weight.size(); ++k)
            fn(p.source_weight.data()[k], g.source_weight.data()[k]);
        for (Eigen::Index k = 0; k < p.target_weight.size(); ++k)
            fn(p.target_weight.data()[k], g.target_weight.data()[k]);
    }
}

/// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace testing
