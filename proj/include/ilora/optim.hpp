// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "ilora/model.hpp"
#include "ilora/numerics.hpp"

namespace ilora {

enum class OptimizerKind { Sgd, Adam };

/// Adam moments plus the warmup schedule. `step` counts completed updates.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double base_lr = 1e-4;
    double warmup_ratio = 0.2;
    std::size_t total_steps = 1;
    OptimizerKind kind = OptimizerKind::Adam;

    static AdamState make(std::size_t n_params, double base_lr, double warmup_ratio, std::size_t total_steps,
                          OptimizerKind kind = OptimizerKind::Adam);

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Linear warmup over the first ceil(warmup_ratio·total_steps) steps, then
/// constant. `step` is 1-based.
double lr_at(const AdamState& state, std::size_t step);

/// One optimizer update (Adam with bias correction, or plain SGD when
/// state.kind == Sgd) using lr_at(state.step + 1). Non-finite gradients are
/// rejected with ErrorKind::Numeric and leave state untouched.
ParamVector adam_step(AdamState& state, const ParamVector& theta, const ParamVector& grad);

/// θˡ ← λ·θˡ + (1−λ)·θʷ, evaluated as θˡ + (1−λ)·(θʷ − θˡ). λ = 0 and λ = 1 return
/// the respective input unchanged.
ParamVector ema_update(const ParamVector& theta_l, const ParamVector& theta_w, double lambda);

/// Reference gradient for the episodic-memory projection.
struct GradRef {
    ParamVector g_ref;
};

/// Projects g onto the half-space ⟨·, g_ref⟩ ≥ 0. g passes through untouched
/// when it already satisfies the constraint or when g_ref is zero.
ParamVector agem_project(const ParamVector& g, const GradRef& ref);

/// One consolidated task for the quadratic penalty.
struct EwcState {
    ParamVector theta_star;
    std::vector<double> fisher;
    double lambda_ewc = 0.0;
};

/// Empirical diagonal Fisher: mean over samples of the squared per-sample
/// gradient of log p(y | x; θ). When max_samples is nonzero and smaller than
/// the dataset, a uniform subsample without replacement is drawn from rng;
/// otherwise rng is not touched.
std::vector<double> ewc_fisher(const BackboneParams& backbone, const ParamVector& theta, const Batch& dataset,
                               Rng& rng, std::size_t max_samples = 0);

struct PenaltyGrad {
    double penalty = 0.0;
    ParamVector grad;
};

PenaltyGrad ewc_penalty_grad(const ParamVector& theta, const std::vector<EwcState>& states);

}  // namespace ilora
