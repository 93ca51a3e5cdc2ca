// SPDX-License-Identifier: Apache-2.0
#include "ilora/ilora.h"

#include <cstring>
#include <new>
#include <string>

#include "ilora/commands.hpp"
#include "ilora/io.hpp"
#include "ilora/metrics.hpp"

struct ilora_checkpoint {
    ilora::Checkpoint value;
};

struct ilora_results {
    ilora::ResultMatrix value;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_kind;

ilora_status status_for(ilora::ErrorKind kind) {
    using ilora::ErrorKind;
    switch (kind) {
        case ErrorKind::Contract: return ILORA_ERR_INVALID_ARGUMENT;
        case ErrorKind::Config: return ILORA_ERR_CONFIG;
        case ErrorKind::Missing: return ILORA_ERR_MISSING;
        case ErrorKind::Numeric:
        case ErrorKind::Oracle: return ILORA_ERR_NUMERIC;
        case ErrorKind::Degenerate: return ILORA_ERR_DEGENERATE;
        case ErrorKind::Undefined: return ILORA_ERR_UNDEFINED;
        case ErrorKind::Io: return ILORA_ERR_IO;
    }
    return ILORA_ERR_INTERNAL;
}

ilora_status fail(ilora_status status, const char* kind, const std::string& msg) {
    g_error = msg;
    g_error_kind = kind;
    return status;
}

template <typename F>
ilora_status guarded(F&& body) {
    try {
        body();
        return ILORA_OK;
    } catch (const ilora::Error& e) {
        return fail(status_for(e.kind()), ilora::to_string(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(ILORA_ERR_INTERNAL, "internal", "out of memory");
    } catch (const std::exception& e) {
        return fail(ILORA_ERR_INTERNAL, "internal", e.what());
    } catch (...) {
        return fail(ILORA_ERR_INTERNAL, "internal", "unknown exception");
    }
}

void require_arg(bool cond, const char* msg) {
    if (!cond) throw ilora::Error(ilora::ErrorKind::Contract, msg);
}

ilora::ExperimentConfig load_with_override(const char* config_path, const uint64_t* seed_override) {
    require_arg(config_path != nullptr, "config_path must not be NULL");
    ilora::ExperimentConfig config = ilora::load_config(config_path);
    if (seed_override) config.seed = *seed_override;
    return config;
}

}  // namespace

extern "C" {

const char* ilora_version(void) { return "1.0.0"; }

const char* ilora_last_error(void) { return g_error.c_str(); }

const char* ilora_last_error_kind(void) { return g_error_kind.c_str(); }

int ilora_exit_code(ilora_status status) {
    switch (status) {
        case ILORA_OK: return ilora::kExitOk;
        case ILORA_ERR_CONFIG:
        case ILORA_ERR_INVALID_ARGUMENT: return ilora::kExitConfig;
        case ILORA_ERR_MISSING: return ilora::kExitMissing;
        case ILORA_ERR_NUMERIC: return ilora::kExitNumeric;
        default: return ilora::kExitInternal;
    }
}

ilora_status ilora_run(const char* config_path, const uint64_t* seed_override, const char* out_dir) {
    return guarded([&] {
        const ilora::ExperimentConfig config = load_with_override(config_path, seed_override);
        std::string dir = out_dir ? out_dir : config.output_dir;
        if (dir.empty())
            throw ilora::Error(ilora::ErrorKind::Config, "no output directory: pass one or set output_dir");
        ilora::cmd_run(config, dir);
    });
}

ilora_status ilora_config_echo(const char* config_path, const uint64_t* seed_override, char* buf, size_t cap,
                               size_t* needed) {
    return guarded([&] {
        const std::string text = ilora::echo_config(load_with_override(config_path, seed_override));
        if (needed) *needed = text.size() + 1;
        if (cap == 0) return;
        require_arg(buf != nullptr, "buf must not be NULL when cap > 0");
        require_arg(cap > text.size(), "buffer too small for config echo");
        std::memcpy(buf, text.c_str(), text.size() + 1);
    });
}

ilora_status ilora_dump_stream(const char* config_path, const uint64_t* seed_override, const char* out_file) {
    return guarded([&] {
        require_arg(out_file != nullptr, "out_file must not be NULL");
        ilora::cmd_dump_stream(load_with_override(config_path, seed_override), out_file);
    });
}

ilora_status ilora_sweep_lambda(const char* run_dir, uint32_t transition, const double* grid, size_t grid_len) {
    return guarded([&] {
        require_arg(run_dir != nullptr, "run_dir must not be NULL");
        std::vector<double> g;
        if (grid) {
            g.assign(grid, grid + grid_len);
        } else {
            if (grid_len == 0) grid_len = 21;
            if (grid_len < 2) throw ilora::Error(ilora::ErrorKind::Config, "lambda grid needs at least two points");
            g = ilora::linspace(0.0, 1.0, grid_len);
        }
        ilora::cmd_sweep_lambda(run_dir, transition, g);
    });
}

void ilora_probe_options_default(ilora_probe_options* opts) {
    if (!opts) return;
    const ilora::ProbeOptions d;
    opts->transition = static_cast<uint32_t>(d.transition);
    opts->points = static_cast<uint32_t>(d.points);
    opts->lo = d.lo;
    opts->hi = d.hi;
}

ilora_status ilora_probe(const char* run_dir, const char* kind, const ilora_probe_options* opts) {
    return guarded([&] {
        require_arg(run_dir != nullptr && kind != nullptr, "run_dir and kind must not be NULL");
        const auto k = ilora::parse_probe_kind(kind);
        if (!k) throw ilora::Error(ilora::ErrorKind::Config, std::string("unknown probe kind '") + kind + "'");
        ilora::ProbeOptions o;
        if (opts) {
            o.transition = opts->transition;
            o.points = opts->points;
            o.lo = opts->lo;
            o.hi = opts->hi;
        }
        ilora::cmd_probe(run_dir, *k, o);
    });
}

ilora_status ilora_checkpoint_load(const char* path, ilora_checkpoint** out) {
    return guarded([&] {
        require_arg(path != nullptr && out != nullptr, "path and out must not be NULL");
        *out = new ilora_checkpoint{ilora::load_checkpoint(path)};
    });
}

ilora_status ilora_checkpoint_save(const char* path, ilora_role role, uint32_t task_index, uint64_t seed,
                                   const double* params, size_t count) {
    return guarded([&] {
        require_arg(path != nullptr && (params != nullptr || count == 0), "path and params must not be NULL");
        require_arg(role >= ILORA_ROLE_WORKING && role <= ILORA_ROLE_BACKBONE, "unknown checkpoint role");
        ilora::Checkpoint ck{task_index, seed, static_cast<ilora::CheckpointRole>(role),
                             ilora::ParamVector(std::vector<double>(params, params + count))};
        ilora::save_checkpoint(path, ck);
    });
}

size_t ilora_checkpoint_param_count(const ilora_checkpoint* ckpt) { return ckpt ? ckpt->value.params.size() : 0; }

const double* ilora_checkpoint_params(const ilora_checkpoint* ckpt) {
    return ckpt ? ckpt->value.params.data() : nullptr;
}

uint32_t ilora_checkpoint_task_index(const ilora_checkpoint* ckpt) { return ckpt ? ckpt->value.task_index : 0; }

uint64_t ilora_checkpoint_seed(const ilora_checkpoint* ckpt) { return ckpt ? ckpt->value.seed : 0; }

ilora_role ilora_checkpoint_role(const ilora_checkpoint* ckpt) {
    return ckpt ? static_cast<ilora_role>(ckpt->value.role) : ILORA_ROLE_WORKING;
}

void ilora_checkpoint_free(ilora_checkpoint* ckpt) { delete ckpt; }

ilora_status ilora_results_create(size_t tasks, ilora_results** out) {
    return guarded([&] {
        require_arg(out != nullptr, "out must not be NULL");
        *out = new ilora_results{ilora::ResultMatrix(tasks)};
    });
}

ilora_status ilora_results_load_csv(const char* path, ilora_results** out) {
    return guarded([&] {
        require_arg(path != nullptr && out != nullptr, "path and out must not be NULL");
        *out = new ilora_results{ilora::parse_result_matrix_csv(ilora::read_text_file(path))};
    });
}

size_t ilora_results_tasks(const ilora_results* r) { return r ? r->value.tasks() : 0; }

ilora_status ilora_results_set(ilora_results* r, size_t t, size_t j, double accuracy) {
    return guarded([&] {
        require_arg(r != nullptr, "results handle must not be NULL");
        r->value.set(t, j, accuracy);
    });
}

ilora_status ilora_results_get(const ilora_results* r, size_t t, size_t j, double* out) {
    return guarded([&] {
        require_arg(r != nullptr && out != nullptr, "arguments must not be NULL");
        *out = r->value.at(t, j);
    });
}

ilora_status ilora_results_acc(const ilora_results* r, size_t t, double* out) {
    return guarded([&] {
        require_arg(r != nullptr && out != nullptr, "arguments must not be NULL");
        *out = ilora::acc_t(r->value, t);
    });
}

ilora_status ilora_results_bwt(const ilora_results* r, size_t t, double* out) {
    return guarded([&] {
        require_arg(r != nullptr && out != nullptr, "arguments must not be NULL");
        *out = ilora::bwt_t(r->value, t);
    });
}

void ilora_results_free(ilora_results* r) { delete r; }

ilora_status ilora_linear_cka(const double* x, size_t n, size_t p, const double* y, size_t q, double* out) {
    return guarded([&] {
        require_arg(x != nullptr && y != nullptr && out != nullptr, "arguments must not be NULL");
        const ilora::Matrix xm(n, p, std::vector<double>(x, x + n * p));
        const ilora::Matrix ym(n, q, std::vector<double>(y, y + n * q));
        *out = ilora::linear_cka(xm, ym);
    });
}

ilora_status ilora_weight_distance(const double* a, const double* b, size_t count, double* out) {
    return guarded([&] {
        require_arg((a != nullptr && b != nullptr) || count == 0, "arguments must not be NULL");
        require_arg(out != nullptr, "out must not be NULL");
        *out = ilora::weight_distance(ilora::ParamVector(std::vector<double>(a, a + count)),
                                      ilora::ParamVector(std::vector<double>(b, b + count)));
    });
}

}  // extern "C"
