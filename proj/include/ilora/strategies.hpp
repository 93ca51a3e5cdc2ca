// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ilora/bench.hpp"
#include "ilora/metrics.hpp"
#include "ilora/model.hpp"
#include "ilora/optim.hpp"
#include "ilora/replay.hpp"

namespace ilora {

enum class StrategyKind { Seq, Er, Ewc, Agem, Mtl, Ilora };

const char* to_string(StrategyKind kind) noexcept;
/// Accepts the upper-case names SEQ, ER, EWC, AGEM, MTL, ILORA.
std::optional<StrategyKind> parse_strategy_kind(const std::string& name);

/// Which I-LoRA memory is evaluated and reported as "the model".
enum class Deploy { LongTerm, Working };

struct StrategyConfig {
    StrategyKind kind = StrategyKind::Ilora;
    std::size_t epochs = 5;
    std::size_t batch_size = 16;
    // I-LoRA
    double gamma = 1.0;
    double lambda_ema = 0.95;
    std::size_t update_frequency = 1;
    Deploy deploy = Deploy::LongTerm;
    // EWC
    double lambda_ewc = 100.0;
    std::size_t fisher_samples = 0;  // 0: every training row
    // replay (ER, AGEM, ILORA)
    double rho = 0.1;
    bool stratified = false;
    // optimizer
    OptimizerKind optimizer = OptimizerKind::Adam;
    double lr = 1e-2;
    double warmup_ratio = 0.2;

    bool uses_replay() const noexcept;
    void validate() const;
};

/// Fast learner θʷ, slow learner θˡ and the optimizer state that drives θʷ.
struct DualMemoryState {
    ParamVector theta_w;
    ParamVector theta_l;
    AdamState adam;
    std::size_t global_step = 0;  // optimizer updates over the whole run

    /// θˡ and θʷ both start at theta0.
    static DualMemoryState make(const ParamVector& theta0);
};

/// Per-run state shared across tasks that is not part of the dual memory.
struct StrategyAux {
    std::vector<EwcState> ewc;
    Rng fisher_rng{0};
};

/// Called after every optimizer step with the 1-based task index.
using StepObserver = std::function<void(std::size_t task, const DualMemoryState& state)>;

std::size_t steps_per_task(const StrategyConfig& config, std::size_t n_train);

/// One I-LoRA update on an already-drawn CE batch: optional embedding
/// distillation against θˡ on a fresh memory batch, an optimizer step on θʷ,
/// then the EMA of θˡ when the global step is a multiple of update_frequency.
void ilora_step(DualMemoryState& state, const StrategyConfig& config, const BackboneParams& backbone,
                const Batch& task_batch, const ReplayBuffer& buffer, Rng& rng);

/// Runs epochs·ceil(n/batch) optimizer steps on one task. The CE batches
/// cycle through a reshuffled pool: the task rows for SEQ, EWC and AGEM, the
/// task rows followed by the memory rows for ER and ILORA. Resets the
/// optimizer state for the task. MTL is not handled here (see run_sequence).
void train_task(DualMemoryState& state, const StrategyConfig& config, const BackboneParams& backbone,
                const Batch& task_data, const ReplayBuffer& buffer, StrategyAux& aux, Rng& rng,
                std::size_t task_index = 1, const StepObserver& observer = {});

struct RunRecord {
    std::uint64_t seed = 0;
    StrategyConfig config;
    ParamVector initial;
    std::vector<ParamVector> checkpoints;       // θʷ after each task
    std::vector<ParamVector> slow_checkpoints;  // θˡ after each task (ILORA only)
    ResultMatrix result_matrix{1};

    /// Parameters evaluated after task t (1-based).
    const ParamVector& deployed(std::size_t t) const;
};

/// Trains through the stream in order, filling row t of R with the deployed
/// parameters' accuracy on eval sets 1..t after task t. MTL trains one model
/// on the union of all tasks for T·steps_per_task steps and reports it in
/// every row.
RunRecord run_sequence(const StrategyConfig& config, const std::vector<Task>& stream, const BackboneParams& backbone,
                       Rng& rng, const StepObserver& observer = {});

}  // namespace ilora
