// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ilora/ilora.h"

namespace {

int report(ilora_status st) {
    if (st == ILORA_OK) return 0;
    nlohmann::ordered_json err;
    err["error"] = ilora_last_error_kind();
    err["message"] = ilora_last_error();
    err["status"] = static_cast<int>(st);
    std::cerr << err.dump() << "\n";
    return ilora_exit_code(st);
}

int usage_error(const std::string& msg) {
    nlohmann::ordered_json err;
    err["error"] = "config";
    err["message"] = msg;
    err["status"] = static_cast<int>(ILORA_ERR_CONFIG);
    std::cerr << err.dump() << "\n";
    return ilora_exit_code(ILORA_ERR_CONFIG);
}

// "a..b" inclusive.
std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_seed_range(const std::string& s) {
    const auto dots = s.find("..");
    if (dots == std::string::npos) return std::nullopt;
    try {
        std::size_t used = 0;
        const std::string lo = s.substr(0, dots), hi = s.substr(dots + 2);
        if (lo.empty() || hi.empty() || lo[0] == '-' || hi[0] == '-') return std::nullopt;
        const std::uint64_t a = std::stoull(lo, &used);
        if (used != lo.size()) return std::nullopt;
        const std::uint64_t b = std::stoull(hi, &used);
        if (used != hi.size() || b < a) return std::nullopt;
        return std::make_pair(a, b);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<std::vector<double>> parse_grid(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = std::min(s.find(',', pos), s.size());
        const std::string item = s.substr(pos, comma - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) return std::nullopt;
        } catch (const std::exception&) {
            return std::nullopt;
        }
        pos = comma + 1;
    }
    return out;
}

int run_seeds(const std::string& config, std::uint64_t first, std::uint64_t last, const std::string& out) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = first;; ++s) {
        seeds.push_back(s);
        if (s == last) break;
    }
    std::vector<ilora_status> status(seeds.size(), ILORA_OK);
    std::vector<std::string> kinds(seeds.size()), messages(seeds.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(seeds.size(), std::max(1u, std::thread::hardware_concurrency()));

    auto work = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            const std::string dir = out + "/seed_" + std::to_string(seeds[i]);
            status[i] = ilora_run(config.c_str(), &seeds[i], dir.c_str());
            if (status[i] != ILORA_OK) {
                kinds[i] = ilora_last_error_kind();
                messages[i] = ilora_last_error();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    int code = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (status[i] == ILORA_OK) continue;
        nlohmann::ordered_json err;
        err["error"] = kinds[i];
        err["message"] = messages[i];
        err["status"] = static_cast<int>(status[i]);
        err["seed"] = seeds[i];
        std::cerr << err.dump() << "\n";
        if (code == 0) code = ilora_exit_code(status[i]);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continual-learning laboratory for low-rank adapters with dual memory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ilora_version()));

    std::string config_path, out_dir, seeds_spec;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "pretrain the backbone and run the continual sequence");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "output directory (default: config output_dir)");
    run->add_option("--seeds", seeds_spec, "run seeds a..b concurrently into <out>/seed_<s>");

    bool echo_only = false;
    auto* echo = app.add_subcommand("echo-config", "print the config with all defaults filled in");
    echo->add_option("--config", config_path, "experiment config (JSON)")->required();
    echo->add_option("--seed", seed, "override the config seed");
    echo->callback([&] { echo_only = true; });

    std::string dump_path;
    auto* dump = app.add_subcommand("dump-stream", "write the generated task stream as CSV");
    dump->add_option("--config", config_path, "experiment config (JSON)")->required();
    dump->add_option("--seed", seed, "override the config seed");
    dump->add_option("--out", dump_path, "output CSV file")->required();

    std::string run_dir, grid_spec;
    std::uint32_t transition = 1;
    std::uint32_t points = 21;
    auto* sweep = app.add_subcommand("sweep-lambda", "accuracy along the segment between adjacent checkpoints");
    sweep->add_option("--run", run_dir, "run directory")->required();
    sweep->add_option("--transition", transition, "transition t (checkpoints t and t+1)")->required();
    auto* points_opt = sweep->add_option("--points", points, "evenly spaced grid size on [0,1]");
    auto* grid_opt = sweep->add_option("--grid", grid_spec, "explicit comma-separated grid");
    points_opt->excludes(grid_opt);

    std::string probe_kind;
    ilora_probe_options probe_opts;
    ilora_probe_options_default(&probe_opts);
    auto* probe = app.add_subcommand("probe", "weight distance, CKA or embedding landscape");
    probe->add_option("--run", run_dir, "run directory")->required();
    probe->add_option("--kind", probe_kind, "wd | cka | landscape")->required();
    probe->add_option("--transition", probe_opts.transition, "landscape: task t");
    probe->add_option("--points", probe_opts.points, "landscape: grid points per axis");
    probe->add_option("--lo", probe_opts.lo, "landscape: lower coefficient");
    probe->add_option("--hi", probe_opts.hi, "landscape: upper coefficient");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return usage_error(e.what());
    }

    const std::uint64_t* seed_ptr = seed ? &*seed : nullptr;

    if (*run) {
        if (!seeds_spec.empty()) {
            if (seed) return usage_error("--seed and --seeds are mutually exclusive");
            const auto range = parse_seed_range(seeds_spec);
            if (!range) return usage_error("--seeds expects a..b with a <= b");
            if (out_dir.empty()) return usage_error("--seeds requires --out");
            return run_seeds(config_path, range->first, range->second, out_dir);
        }
        return report(ilora_run(config_path.c_str(), seed_ptr, out_dir.empty() ? nullptr : out_dir.c_str()));
    }
    if (echo_only) {
        std::size_t needed = 0;
        ilora_status st = ilora_config_echo(config_path.c_str(), seed_ptr, nullptr, 0, &needed);
        if (st != ILORA_OK) return report(st);
        std::string text(needed, '\0');
        st = ilora_config_echo(config_path.c_str(), seed_ptr, text.data(), text.size(), &needed);
        if (st != ILORA_OK) return report(st);
        text.resize(needed - 1);
        std::cout << text;
        return 0;
    }
    if (*dump) return report(ilora_dump_stream(config_path.c_str(), seed_ptr, dump_path.c_str()));
    if (*sweep) {
        if (!grid_spec.empty()) {
            const auto grid = parse_grid(grid_spec);
            if (!grid) return usage_error("--grid expects comma-separated numbers");
            return report(ilora_sweep_lambda(run_dir.c_str(), transition, grid->data(), grid->size()));
        }
        if (points < 2) return usage_error("--points must be at least 2");
        return report(ilora_sweep_lambda(run_dir.c_str(), transition, nullptr, points));
    }
    if (*probe) return report(ilora_probe(run_dir.c_str(), probe_kind.c_str(), &probe_opts));
    return usage_error("no subcommand");
}
