// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the unit suites and the acceptance harness.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "ilora/model.hpp"
#include "ilora/numerics.hpp"

namespace ilora::testing {

inline ArchConfig small_arch() {
    ArchConfig a;
    a.input_dim = 4;
    a.hidden = 6;
    a.embedding = 3;
    a.classes = 3;
    a.rank = 2;
    a.alpha = 4.0;
    return a;
}

inline Batch random_batch(const ArchConfig& arch, std::size_t n, Rng& rng) {
    Batch b;
    b.x = gaussian_fill(rng, n, arch.input_dim, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) b.y.push_back(static_cast<int>(rng.below(arch.classes)));
    return b;
}

/// Adapters with both factors nonzero, so every gradient block is exercised.
inline ParamVector random_theta(const ArchConfig& arch, Rng& rng, double scale = 0.3) {
    ParamVector t(arch.adapter_param_count());
    for (auto& x : t) x = scale * (2.0 * rng.uniform() - 1.0);
    return t;
}

/// |a − f| / max(|a|, |f|, floor).
inline double relative_error(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline constexpr double kGradFloor = 1e-6;

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t params = 0;
};

/// Analytic loss_and_grad against central differences with step h.
inline GradCheck grad_check(const BackboneParams& bb, const ParamVector& theta, const Batch& batch, double gamma,
                            const Matrix* mem_x, const Matrix* targets, double h = 1e-5) {
    auto distill = [&]() -> std::optional<DistillTarget> {
        if (mem_x == nullptr) return std::nullopt;
        return DistillTarget{*mem_x, *targets};
    };
    const LossGrad lg = loss_and_grad(bb, theta, batch, gamma, distill());
    const ParamVector fd = finite_diff_grad(
        [&](const ParamVector& t) { return loss_and_grad(bb, t, batch, gamma, distill()).loss; }, theta, h);
    GradCheck out;
    out.params = theta.size();
    for (std::size_t i = 0; i < theta.size(); ++i)
        out.max_rel_error = std::max(out.max_rel_error, relative_error(lg.grad[i], fd[i], kGradFloor));
    return out;
}

}  // namespace ilora::testing
