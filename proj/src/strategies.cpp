// SPDX-License-Identifier: Apache-2.0
#include "ilora/strategies.hpp"

#include <cmath>
#include <numeric>

#include "ilora/error.hpp"

namespace ilora {

namespace {

// Walks a pool in reshuffled passes; the last batch of a pass may be short.
class PoolSampler {
public:
    explicit PoolSampler(const Batch& pool) : pool_(pool), order_(pool.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        cursor_ = order_.size();
    }

    Batch next(std::size_t batch_size, Rng& rng) {
        if (cursor_ == order_.size()) {
            for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
            cursor_ = 0;
        }
        const std::size_t take = std::min(batch_size, order_.size() - cursor_);
        Batch out = select_rows(pool_, std::span(order_).subspan(cursor_, take));
        cursor_ += take;
        return out;
    }

private:
    const Batch& pool_;
    std::vector<std::size_t> order_;
    std::size_t cursor_;
};

void add_into(ParamVector& dst, const ParamVector& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void update_working(DualMemoryState& state, const ParamVector& grad) {
    state.theta_w = adam_step(state.adam, state.theta_w, grad);
    ++state.global_step;
}

void reset_optimizer(DualMemoryState& state, const StrategyConfig& config, std::size_t total_steps) {
    state.adam = AdamState::make(state.theta_w.size(), config.lr, config.warmup_ratio, total_steps, config.optimizer);
}

std::vector<double> evaluate_row(const BackboneParams& bb, const ParamVector& theta, const std::vector<Task>& stream,
                                 std::size_t t) {
    std::vector<double> row;
    for (std::size_t j = 0; j < t; ++j) row.push_back(predict_accuracy(bb, theta, stream[j].eval));
    return row;
}

}  // namespace

const char* to_string(StrategyKind kind) noexcept {
    switch (kind) {
        case StrategyKind::Seq: return "SEQ";
        case StrategyKind::Er: return "ER";
        case StrategyKind::Ewc: return "EWC";
        case StrategyKind::Agem: return "AGEM";
        case StrategyKind::Mtl: return "MTL";
        case StrategyKind::Ilora: return "ILORA";
    }
    return "?";
}

std::optional<StrategyKind> parse_strategy_kind(const std::string& name) {
    for (StrategyKind k : {StrategyKind::Seq, StrategyKind::Er, StrategyKind::Ewc, StrategyKind::Agem,
                           StrategyKind::Mtl, StrategyKind::Ilora})
        if (name == to_string(k)) return k;
    return std::nullopt;
}

bool StrategyConfig::uses_replay() const noexcept {
    return kind == StrategyKind::Er || kind == StrategyKind::Agem || kind == StrategyKind::Ilora;
}

void StrategyConfig::validate() const {
    require(epochs >= 1, "strategy: epochs must be at least 1");
    require(batch_size >= 1, "strategy: batch_size must be at least 1");
    require(gamma >= 0.0 && std::isfinite(gamma), "strategy: gamma must be finite and non-negative");
    require(lambda_ema >= 0.0 && lambda_ema <= 1.0, "strategy: lambda_ema must lie in [0,1]");
    require(update_frequency >= 1, "strategy: update_frequency must be at least 1");
    require(lambda_ewc >= 0.0 && std::isfinite(lambda_ewc), "strategy: lambda_ewc must be finite and non-negative");
    require(rho >= 0.0 && rho <= 1.0, "strategy: rho must lie in [0,1]");
    require(lr > 0.0 && std::isfinite(lr), "strategy: lr must be positive");
    require(warmup_ratio >= 0.0 && warmup_ratio <= 1.0, "strategy: warmup_ratio must lie in [0,1]");
}

DualMemoryState DualMemoryState::make(const ParamVector& theta0) {
    DualMemoryState s;
    s.theta_w = theta0;
    s.theta_l = theta0;
    s.adam = AdamState::make(theta0.size(), 1e-4, 0.2, 1);
    return s;
}

const ParamVector& RunRecord::deployed(std::size_t t) const {
    require(t >= 1 && t <= checkpoints.size(), "RunRecord::deployed: task index out of range");
    if (config.kind == StrategyKind::Ilora && config.deploy == Deploy::LongTerm) return slow_checkpoints[t - 1];
    return checkpoints[t - 1];
}

std::size_t steps_per_task(const StrategyConfig& config, std::size_t n_train) {
    return config.epochs * ((n_train + config.batch_size - 1) / config.batch_size);
}

void ilora_step(DualMemoryState& state, const StrategyConfig& config, const BackboneParams& backbone,
                const Batch& task_batch, const ReplayBuffer& buffer, Rng& rng) {
    // With gamma = 0 the memory batch is not drawn at all, so the random
    // stream matches plain ER.
    LossGrad lg;
    if (config.gamma > 0.0 && !buffer.empty()) {
        const Batch mem = buffer.sample(config.batch_size, rng);
        const Matrix targets = embed(backbone, state.theta_l, mem.x);
        lg = loss_and_grad(backbone, state.theta_w, task_batch, config.gamma, DistillTarget{mem.x, targets});
    } else {
        lg = loss_and_grad(backbone, state.theta_w, task_batch);
    }
    update_working(state, lg.grad);
    if (state.global_step % config.update_frequency == 0)
        state.theta_l = ema_update(state.theta_l, state.theta_w, config.lambda_ema);
}

void train_task(DualMemoryState& state, const StrategyConfig& config, const BackboneParams& backbone,
                const Batch& task_data, const ReplayBuffer& buffer, StrategyAux& aux, Rng& rng,
                std::size_t task_index, const StepObserver& observer) {
    config.validate();
    task_data.validate(backbone.arch);
    require(config.kind != StrategyKind::Mtl, "train_task: MTL trains through run_sequence");

    const bool mixes_memory = config.kind == StrategyKind::Er || config.kind == StrategyKind::Ilora;
    const Batch pool = mixes_memory ? concat(task_data, buffer.all()) : task_data;
    PoolSampler sampler(pool);

    const std::size_t steps = steps_per_task(config, task_data.size());
    reset_optimizer(state, config, steps);

    for (std::size_t step = 0; step < steps; ++step) {
        const Batch batch = sampler.next(config.batch_size, rng);
        switch (config.kind) {
            case StrategyKind::Seq:
            case StrategyKind::Er:
                update_working(state, loss_and_grad(backbone, state.theta_w, batch).grad);
                break;
            case StrategyKind::Ewc: {
                LossGrad lg = loss_and_grad(backbone, state.theta_w, batch);
                if (config.lambda_ewc > 0.0 && !aux.ewc.empty())
                    add_into(lg.grad, ewc_penalty_grad(state.theta_w, aux.ewc).grad);
                update_working(state, lg.grad);
                break;
            }
            case StrategyKind::Agem: {
                ParamVector g = loss_and_grad(backbone, state.theta_w, batch).grad;
                if (!buffer.empty()) {
                    const Batch mem = buffer.sample(config.batch_size, rng);
                    g = agem_project(g, GradRef{loss_and_grad(backbone, state.theta_w, mem).grad});
                }
                update_working(state, g);
                break;
            }
            case StrategyKind::Ilora:
                ilora_step(state, config, backbone, batch, buffer, rng);
                break;
            case StrategyKind::Mtl:
                break;
        }
        if (config.kind != StrategyKind::Ilora) state.theta_l = state.theta_w;
        if (observer) observer(task_index, state);
    }

    if (config.kind == StrategyKind::Ewc && config.lambda_ewc > 0.0) {
        aux.ewc.push_back(EwcState{state.theta_w,
                                   ewc_fisher(backbone, state.theta_w, task_data, aux.fisher_rng, config.fisher_samples),
                                   config.lambda_ewc});
    }
}

RunRecord run_sequence(const StrategyConfig& config, const std::vector<Task>& stream, const BackboneParams& backbone,
                       Rng& rng, const StepObserver& observer) {
    config.validate();
    require(!stream.empty(), "run_sequence: stream must contain at least one task");
    const std::size_t T = stream.size();

    RunRecord rec;
    rec.seed = rng.seed();
    rec.config = config;
    rec.result_matrix = ResultMatrix(T);
    rec.initial = init_adapters(backbone.arch, rng);
    StrategyAux aux;
    aux.fisher_rng = rng.split();
    DualMemoryState state = DualMemoryState::make(rec.initial);

    if (config.kind == StrategyKind::Mtl) {
        Batch all;
        for (const Task& task : stream) all = concat(all, task.train);
        std::size_t budget = 0;
        for (const Task& task : stream) budget += steps_per_task(config, task.train.size());
        PoolSampler sampler(all);
        reset_optimizer(state, config, budget);
        for (std::size_t step = 0; step < budget; ++step) {
            const Batch batch = sampler.next(config.batch_size, rng);
            update_working(state, loss_and_grad(backbone, state.theta_w, batch).grad);
            state.theta_l = state.theta_w;
            if (observer) observer(1, state);
        }
        for (std::size_t t = 1; t <= T; ++t) {
            rec.checkpoints.push_back(state.theta_w);
            const auto row = evaluate_row(backbone, state.theta_w, stream, t);
            for (std::size_t j = 1; j <= t; ++j) rec.result_matrix.set(t, j, row[j - 1]);
        }
        return rec;
    }

    ReplayBuffer buffer(config.uses_replay() ? config.rho : 0.0, config.stratified);
    for (std::size_t t = 1; t <= T; ++t) {
        train_task(state, config, backbone, stream[t - 1].train, buffer, aux, rng, t, observer);
        if (config.uses_replay()) buffer.ingest_task(stream[t - 1].train, static_cast<int>(t), rng);
        rec.checkpoints.push_back(state.theta_w);
        if (config.kind == StrategyKind::Ilora) rec.slow_checkpoints.push_back(state.theta_l);
        const auto row = evaluate_row(backbone, rec.deployed(t), stream, t);
        for (std::size_t j = 1; j <= t; ++j) rec.result_matrix.set(t, j, row[j - 1]);
    }
    return rec;
}

}  // namespace ilora
