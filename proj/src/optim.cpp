// SPDX-License-Identifier: Apache-2.0
#include "ilora/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ilora/error.hpp"

namespace ilora {

AdamState AdamState::make(std::size_t n_params, double base_lr, double warmup_ratio, std::size_t total_steps,
                          OptimizerKind kind) {
    require(total_steps >= 1, "AdamState: total_steps must be at least 1");
    require(base_lr > 0.0 && std::isfinite(base_lr), "AdamState: base_lr must be positive");
    require(warmup_ratio >= 0.0 && warmup_ratio <= 1.0, "AdamState: warmup_ratio must lie in [0,1]");
    AdamState s;
    s.m.assign(n_params, 0.0);
    s.v.assign(n_params, 0.0);
    s.base_lr = base_lr;
    s.warmup_ratio = warmup_ratio;
    s.total_steps = total_steps;
    s.kind = kind;
    return s;
}

double lr_at(const AdamState& state, std::size_t step) {
    require(state.total_steps >= 1, "lr_at: total_steps must be at least 1");
    // The epsilon keeps ratios like 0.2·100 from rounding up to 21.
    const double raw = state.warmup_ratio * static_cast<double>(state.total_steps);
    const auto warmup = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    if (warmup == 0 || step >= warmup) return state.base_lr;
    return state.base_lr * static_cast<double>(step) / static_cast<double>(warmup);
}

ParamVector adam_step(AdamState& state, const ParamVector& theta, const ParamVector& grad) {
    require(theta.size() == grad.size(), "adam_step: theta/grad length mismatch");
    if (!grad.all_finite()) throw Error(ErrorKind::Numeric, "adam_step: non-finite gradient rejected");

    const std::size_t t = state.step + 1;
    const double lr = lr_at(state, t);
    ParamVector out = theta;
    if (state.kind == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= lr * grad[i];
        state.step = t;
        return out;
    }

    require(state.m.size() == theta.size() && state.v.size() == theta.size(), "adam_step: state length mismatch");
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < out.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        out[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    state.step = t;
    return out;
}

ParamVector ema_update(const ParamVector& theta_l, const ParamVector& theta_w, double lambda) {
    require(lambda >= 0.0 && lambda <= 1.0, "ema_update: lambda must lie in [0,1]");
    require(theta_l.size() == theta_w.size(), "ema_update: length mismatch");
    if (lambda == 0.0) return theta_w;
    if (lambda == 1.0) return theta_l;
    // Written as a step from θˡ towards θʷ so that θˡ = θʷ is an exact fixed point.
    const double step = 1.0 - lambda;
    ParamVector out(theta_l.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = theta_l[i] + step * (theta_w[i] - theta_l[i]);
    return out;
}

ParamVector agem_project(const ParamVector& g, const GradRef& ref) {
    require(g.size() == ref.g_ref.size(), "agem_project: length mismatch");
    const double gg = dot(ref.g_ref.span(), ref.g_ref.span());
    if (!(gg > 0.0)) return g;
    const double gr = dot(g.span(), ref.g_ref.span());
    if (gr >= 0.0) return g;
    const double coef = gr / gg;
    ParamVector out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] - coef * ref.g_ref[i];
    return out;
}

std::vector<double> ewc_fisher(const BackboneParams& backbone, const ParamVector& theta, const Batch& dataset,
                               Rng& rng, std::size_t max_samples) {
    require(!dataset.empty(), "ewc_fisher: dataset must be nonempty");
    std::vector<std::size_t> rows(dataset.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (max_samples > 0 && max_samples < rows.size()) {
        for (std::size_t i = 0; i < max_samples; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(rows.size() - i));
            std::swap(rows[i], rows[j]);
        }
        rows.resize(max_samples);
        std::sort(rows.begin(), rows.end());
    }

    std::vector<double> fisher(theta.size(), 0.0);
    for (std::size_t r : rows) {
        const std::size_t one[] = {r};
        const Batch sample = select_rows(dataset, one);
        // Gradient of −log p(y|x); its square equals that of +log p.
        const LossGrad lg = loss_and_grad(backbone, theta, sample);
        for (std::size_t i = 0; i < fisher.size(); ++i) fisher[i] += lg.grad[i] * lg.grad[i];
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& f : fisher) f *= inv;
    return fisher;
}

PenaltyGrad ewc_penalty_grad(const ParamVector& theta, const std::vector<EwcState>& states) {
    PenaltyGrad out{0.0, ParamVector(theta.size())};
    for (const EwcState& st : states) {
        require(st.theta_star.size() == theta.size() && st.fisher.size() == theta.size(),
                "ewc_penalty_grad: length mismatch");
        double quad = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double diff = theta[i] - st.theta_star[i];
            quad += st.fisher[i] * diff * diff;
            out.grad[i] += st.lambda_ewc * st.fisher[i] * diff;
        }
        out.penalty += 0.5 * st.lambda_ewc * quad;
    }
    return out;
}

}  // namespace ilora
