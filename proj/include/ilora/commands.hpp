// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ilora/config.hpp"
#include "ilora/connectivity.hpp"
#include "ilora/error.hpp"

namespace ilora {

/// Process exit codes shared by the CLI and the C API status values.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitMissing = 3,
    kExitNumeric = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

/// File names inside a run directory.
namespace run_files {
inline constexpr const char* kConfigEcho = "config_echo.json";
inline constexpr const char* kResults = "results_matrix.csv";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kBackbone = "backbone.ckpt";
inline constexpr const char* kInitial = "init.ckpt";
std::string working(std::size_t task);   // task{t}_working.ckpt
std::string longterm(std::size_t task);  // task{t}_longterm.ckpt
std::string sweep(std::size_t transition);
}  // namespace run_files

/// Pretrains, runs the continual sequence and writes the run directory:
/// config_echo.json, backbone.ckpt, init.ckpt, task{t}_working.ckpt (and
/// task{t}_longterm.ckpt for ILORA), results_matrix.csv, metrics.json.
void cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// metrics.json text: {"acc": [Acc_1..Acc_T], "bwt": [BWT_2..BWT_T], "general_retention": x}.
std::string metrics_json(const ResultMatrix& r, double general_retention);

/// A run directory reloaded from disk: echoed config, regenerated stream,
/// stored backbone.
struct LoadedRun {
    std::filesystem::path dir;
    ExperimentConfig config;
    TaskStream stream;
    BackboneParams backbone;

    /// Checkpoint of the parameters evaluated after task t (t = 0 is the
    /// initial adapters).
    ParamVector deployed(std::size_t t) const;
    ParamVector working(std::size_t t) const;
    /// Throws ErrorKind::Missing when the run kept no long-term memory.
    ParamVector longterm(std::size_t t) const;
    bool has_longterm() const;
};

LoadedRun load_run(const std::filesystem::path& dir);

/// Writes sweep_t{t}.csv (lambda,Ap,An,Aall) for the segment between the
/// deployed checkpoints of tasks t and t+1. Returns the sweep.
LambdaSweep cmd_sweep_lambda(const std::filesystem::path& run_dir, std::size_t transition,
                             const std::vector<double>& grid);

/// Dataset CSV of the regenerated stream: header task_id,split,label,x0..x{d-1};
/// the anchor is task 0, splits are "train" and "eval".
std::string stream_csv(const TaskStream& stream);
void cmd_dump_stream(const ExperimentConfig& config, const std::filesystem::path& out_file);

enum class ProbeKind { WeightDistance, Cka, Landscape };
std::optional<ProbeKind> parse_probe_kind(const std::string& name);

struct ProbeOptions {
    std::size_t transition = 1;      // landscape only
    std::size_t points = 9;          // landscape grid points per axis
    double lo = -0.5;
    double hi = 1.5;
};

/// wd → wd.csv (transition,WD_w,WD_l); cka → cka.csv (transition,cka_w,cka_l)
/// on the eval set of task t; landscape → landscape.csv (a,b,value).
/// Long-term columns are left empty for runs without a slow learner.
std::filesystem::path cmd_probe(const std::filesystem::path& run_dir, ProbeKind kind, const ProbeOptions& options);

}  // namespace ilora
