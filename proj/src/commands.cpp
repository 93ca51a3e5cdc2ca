// SPDX-License-Identifier: Apache-2.0
#include "ilora/commands.hpp"

#include <json.hpp>

#include "ilora/io.hpp"
#include "ilora/metrics.hpp"

namespace ilora {

namespace fs = std::filesystem;

namespace {

ParamVector difference(const ParamVector& a, const ParamVector& b) {
    ParamVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

ParamVector load_params(const fs::path& path, std::size_t expected) {
    Checkpoint ck = load_checkpoint(path);
    if (ck.params.size() != expected)
        throw Error(ErrorKind::Io, path.string() + ": parameter count does not match the run's architecture");
    return std::move(ck.params);
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Missing: return kExitMissing;
        case ErrorKind::Numeric:
        case ErrorKind::Oracle: return kExitNumeric;
        default: return kExitInternal;
    }
}

namespace run_files {
std::string working(std::size_t task) { return "task" + std::to_string(task) + "_working.ckpt"; }
std::string longterm(std::size_t task) { return "task" + std::to_string(task) + "_longterm.ckpt"; }
std::string sweep(std::size_t transition) { return "sweep_t" + std::to_string(transition) + ".csv"; }
}  // namespace run_files

std::string metrics_json(const ResultMatrix& r, double general_retention) {
    nlohmann::ordered_json j;
    j["acc"] = nlohmann::ordered_json::array();
    j["bwt"] = nlohmann::ordered_json::array();
    for (std::size_t t = 1; t <= r.tasks(); ++t) j["acc"].push_back(acc_t(r, t));
    for (std::size_t t = 2; t <= r.tasks(); ++t) j["bwt"].push_back(bwt_t(r, t));
    j["general_retention"] = general_retention;
    return j.dump(2) + "\n";
}

void cmd_run(const ExperimentConfig& config, const fs::path& out_dir) {
    config.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

    write_text_file(out_dir / run_files::kConfigEcho, echo_config(config));
    const Experiment ex = prepare_experiment(config);
    const RunRecord rec = run_experiment(config, ex);

    auto save = [&](const std::string& name, std::size_t task, CheckpointRole role, const ParamVector& p) {
        save_checkpoint(out_dir / name, Checkpoint{static_cast<std::uint32_t>(task), config.seed, role, p});
    };
    save(run_files::kBackbone, 0, CheckpointRole::Backbone, ex.backbone.flatten());
    save(run_files::kInitial, 0, CheckpointRole::Working, rec.initial);
    for (std::size_t t = 1; t <= rec.checkpoints.size(); ++t) {
        save(run_files::working(t), t, CheckpointRole::Working, rec.checkpoints[t - 1]);
        if (!rec.slow_checkpoints.empty())
            save(run_files::longterm(t), t, CheckpointRole::LongTerm, rec.slow_checkpoints[t - 1]);
    }

    write_text_file(out_dir / run_files::kResults, result_matrix_csv(rec.result_matrix));
    const double retention =
        general_retention(ex.backbone, rec.initial, rec.deployed(rec.checkpoints.size()), ex.stream.anchor.eval);
    write_text_file(out_dir / run_files::kMetrics, metrics_json(rec.result_matrix, retention));
}

LoadedRun load_run(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Missing, "run directory not found: " + dir.string());
    const fs::path echo = dir / run_files::kConfigEcho;
    if (!fs::exists(echo)) throw Error(ErrorKind::Missing, "missing file: " + echo.string());

    LoadedRun run;
    run.dir = dir;
    run.config = load_config(echo.string());
    run.stream = make_stream(derive_seeds(run.config.seed).stream, run.config.tasks, run.config.stream);
    run.backbone = BackboneParams::unflatten(
        run.config.arch, load_params(dir / run_files::kBackbone, run.config.arch.backbone_param_count()));
    return run;
}

ParamVector LoadedRun::working(std::size_t t) const {
    const std::string name = t == 0 ? run_files::kInitial : run_files::working(t);
    return load_params(dir / name, config.arch.adapter_param_count());
}

bool LoadedRun::has_longterm() const { return config.strategy.kind == StrategyKind::Ilora; }

ParamVector LoadedRun::longterm(std::size_t t) const {
    if (!has_longterm())
        throw Error(ErrorKind::Missing, std::string("run has no long-term checkpoints (strategy ") +
                                            to_string(config.strategy.kind) + ")");
    if (t == 0) return working(0);
    return load_params(dir / run_files::longterm(t), config.arch.adapter_param_count());
}

ParamVector LoadedRun::deployed(std::size_t t) const {
    if (t > 0 && has_longterm() && config.strategy.deploy == Deploy::LongTerm) return longterm(t);
    return working(t);
}

LambdaSweep cmd_sweep_lambda(const fs::path& run_dir, std::size_t transition, const std::vector<double>& grid) {
    const LoadedRun run = load_run(run_dir);
    if (transition < 1 || transition >= run.config.tasks)
        throw Error(ErrorKind::Config, "transition must lie in [1, " + std::to_string(run.config.tasks - 1) + "]");
    try {
        validate_lambda_grid(grid);
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }

    const ParamVector a = run.deployed(transition);
    const ParamVector b = run.deployed(transition + 1);
    std::vector<Batch> past;
    for (std::size_t j = 0; j < transition; ++j) past.push_back(run.stream.tasks[j].eval);
    const LambdaSweep sweep = sweep_lambda(a, b, run.backbone, past, run.stream.tasks[transition].eval, grid);

    std::string csv = "lambda,Ap,An,Aall\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv += format_real(sweep.lambda_grid[i]) + "," + format_real(sweep.ap[i]) + "," + format_real(sweep.an[i]) +
               "," + format_real(sweep.aall[i]) + "\n";
    write_text_file(run_dir / run_files::sweep(transition), csv);
    return sweep;
}

std::string stream_csv(const TaskStream& stream) {
    const std::size_t d = stream.anchor.train.x.cols();
    std::string csv = "task_id,split,label";
    for (std::size_t k = 0; k < d; ++k) csv += ",x" + std::to_string(k);
    csv += "\n";
    auto emit = [&](std::size_t task, const char* split, const Batch& b) {
        for (std::size_t i = 0; i < b.x.rows(); ++i) {
            csv += std::to_string(task) + "," + split + "," + std::to_string(b.y[i]);
            for (double v : b.x.row(i)) csv += "," + format_real(v);
            csv += "\n";
        }
    };
    emit(0, "train", stream.anchor.train);
    emit(0, "eval", stream.anchor.eval);
    for (std::size_t t = 0; t < stream.tasks.size(); ++t) {
        emit(t + 1, "train", stream.tasks[t].train);
        emit(t + 1, "eval", stream.tasks[t].eval);
    }
    return csv;
}

void cmd_dump_stream(const ExperimentConfig& config, const fs::path& out_file) {
    config.validate();
    const TaskStream stream = make_stream(derive_seeds(config.seed).stream, config.tasks, config.stream);
    write_text_file(out_file, stream_csv(stream));
}

std::optional<ProbeKind> parse_probe_kind(const std::string& name) {
    if (name == "wd") return ProbeKind::WeightDistance;
    if (name == "cka") return ProbeKind::Cka;
    if (name == "landscape") return ProbeKind::Landscape;
    return std::nullopt;
}

fs::path cmd_probe(const fs::path& run_dir, ProbeKind kind, const ProbeOptions& options) {
    const LoadedRun run = load_run(run_dir);
    const std::size_t T = run.config.tasks;
    const bool slow = run.has_longterm();
    std::string csv;
    fs::path out;

    switch (kind) {
        case ProbeKind::WeightDistance: {
            out = run_dir / "wd.csv";
            csv = "transition,WD_w,WD_l\n";
            for (std::size_t t = 1; t < T; ++t) {
                csv += std::to_string(t) + "," + format_real(weight_distance(run.working(t), run.working(t + 1))) + ",";
                if (slow) csv += format_real(weight_distance(run.longterm(t), run.longterm(t + 1)));
                csv += "\n";
            }
            break;
        }
        case ProbeKind::Cka: {
            out = run_dir / "cka.csv";
            csv = "transition,cka_w,cka_l\n";
            for (std::size_t t = 1; t < T; ++t) {
                const Matrix& probe = run.stream.tasks[t - 1].eval.x;
                auto cka = [&](const ParamVector& p, const ParamVector& q) {
                    return linear_cka(embed(run.backbone, p, probe), embed(run.backbone, q, probe));
                };
                csv += std::to_string(t) + "," + format_real(cka(run.working(t), run.working(t + 1))) + ",";
                if (slow) csv += format_real(cka(run.longterm(t), run.longterm(t + 1)));
                csv += "\n";
            }
            break;
        }
        case ProbeKind::Landscape: {
            const std::size_t t = options.transition;
            if (t < 1 || t > T) throw Error(ErrorKind::Config, "landscape transition must lie in [1, " +
                                                                   std::to_string(T) + "]");
            if (options.points < 2 || !(options.hi > options.lo))
                throw Error(ErrorKind::Config, "landscape grid needs at least two points and lo < hi");
            const ParamVector anchor = run.deployed(t - 1);
            const ParamVector d1 = difference(run.working(t), anchor);
            const ParamVector d2 = difference(run.longterm(t), anchor);
            const auto grid = linspace(options.lo, options.hi, options.points);
            const LandscapeGrid g =
                landscape_grid(anchor, d1, d2, grid, grid, run.backbone, run.stream.tasks[t - 1].eval);
            out = run_dir / "landscape.csv";
            csv = "a,b,value\n";
            for (std::size_t i = 0; i < g.a.size(); ++i)
                for (std::size_t j = 0; j < g.b.size(); ++j)
                    csv += format_real(g.a[i]) + "," + format_real(g.b[j]) + "," + format_real(g.values(i, j)) + "\n";
            break;
        }
    }
    write_text_file(out, csv);
    return out;
}

}  // namespace ilora
