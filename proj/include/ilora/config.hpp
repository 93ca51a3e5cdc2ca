// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "ilora/bench.hpp"
#include "ilora/model.hpp"
#include "ilora/strategies.hpp"

namespace ilora {

/// Everything that determines a run. Serialised as strict JSON: unknown keys
/// and keys that do not apply to the chosen strategy kind are rejected.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::size_t tasks = 5;
    TaskSpec stream;
    ArchConfig arch;
    PretrainConfig pretrain;
    StrategyConfig strategy;
    std::string output_dir;  // optional; never echoed

    std::size_t steps_per_task() const;
    void validate() const;
};

/// Parses and validates. Every failure is reported as ErrorKind::Config.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON with every default filled in, plus the derived
/// training.steps_per_task. parse_config(echo_config(c)) reproduces c.
std::string echo_config(const ExperimentConfig& config);

/// Independent sub-seeds drawn in this order from Rng(seed).
struct ExperimentSeeds {
    std::uint64_t stream;
    std::uint64_t pretrain;
    std::uint64_t training;
};
ExperimentSeeds derive_seeds(std::uint64_t seed);

/// The generated stream and the frozen backbone for a config.
struct Experiment {
    TaskStream stream;
    BackboneParams backbone;
};
Experiment prepare_experiment(const ExperimentConfig& config);

/// Runs the configured strategy over the experiment's continual tasks.
RunRecord run_experiment(const ExperimentConfig& config, const Experiment& experiment,
                         const StepObserver& observer = {});

}  // namespace ilora
