// SPDX-License-Identifier: Apache-2.0
#include "ilora/config.hpp"

#include <set>

#include <json.hpp>

#include "ilora/error.hpp"
#include "ilora/io.hpp"

namespace ilora {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

// Reads keys out of one JSON object and rejects whatever is left over.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) config_error(where_ + ": expected an object");
    }

    template <typename T>
    void read(const char* key, T& dst) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
                if (!it->is_number_unsigned()) config_error(path(key) + ": expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, double>) {
                if (!it->is_number()) config_error(path(key) + ": expected a number");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) config_error(path(key) + ": expected a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!it->is_string()) config_error(path(key) + ": expected a string");
            }
            dst = it->get<T>();
        } catch (const json::exception& e) {
            config_error(path(key) + ": " + e.what());
        }
    }

    bool has(const char* key) const { return obj_.contains(key); }

    const json& child(const char* key) {
        seen_.insert(key);
        static const json empty = json::object();
        auto it = obj_.find(key);
        return it == obj_.end() ? empty : *it;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) config_error(path(it.key().c_str()) + ": unknown key");
    }

    void forbid(const char* key, const std::string& reason) {
        if (obj_.contains(key)) config_error(path(key) + ": " + reason);
        seen_.insert(key);
    }

private:
    std::string path(const char* key) const { return where_ + "." + key; }

    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

bool kind_has_replay(StrategyKind k) {
    return k == StrategyKind::Er || k == StrategyKind::Agem || k == StrategyKind::Ilora;
}

}  // namespace

std::size_t ExperimentConfig::steps_per_task() const { return ilora::steps_per_task(strategy, stream.n_train); }

void ExperimentConfig::validate() const {
    try {
        require(tasks >= 1, "stream.tasks must be at least 1");
        stream.validate();
        arch.validate();
        require(arch.input_dim == stream.input_dim && arch.classes == stream.classes,
                "arch and stream disagree on input_dim/classes");
        require(pretrain.epochs >= 1 && pretrain.batch_size >= 1 && pretrain.lr > 0.0,
                "pretrain: epochs, batch_size and lr must be positive");
        strategy.validate();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Contract) config_error(e.what());
        throw;
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig c;
    ObjectReader top(root, "config");
    top.read("seed", c.seed);
    top.read("output_dir", c.output_dir);

    ObjectReader stream(top.child("stream"), "stream");
    stream.read("tasks", c.tasks);
    stream.read("input_dim", c.stream.input_dim);
    stream.read("classes", c.stream.classes);
    stream.read("n_train", c.stream.n_train);
    stream.read("n_eval", c.stream.n_eval);
    stream.read("cluster_std", c.stream.cluster_std);
    stream.read("rotation_deg", c.stream.rotation_deg);
    stream.read("mean_shift", c.stream.mean_shift);
    stream.read("class_spacing", c.stream.class_spacing);
    stream.finish();
    c.arch.input_dim = c.stream.input_dim;
    c.arch.classes = c.stream.classes;

    ObjectReader arch(top.child("arch"), "arch");
    arch.read("hidden", c.arch.hidden);
    arch.read("embedding", c.arch.embedding);
    arch.read("rank", c.arch.rank);
    arch.read("alpha", c.arch.alpha);
    arch.finish();

    ObjectReader pre(top.child("pretrain"), "pretrain");
    pre.read("epochs", c.pretrain.epochs);
    pre.read("batch_size", c.pretrain.batch_size);
    pre.read("lr", c.pretrain.lr);
    pre.finish();

    ObjectReader strat(top.child("strategy"), "strategy");
    std::string kind_name = to_string(c.strategy.kind);
    strat.read("kind", kind_name);
    const auto kind = parse_strategy_kind(kind_name);
    if (!kind) config_error("strategy.kind: unknown strategy '" + kind_name + "'");
    c.strategy.kind = *kind;
    const std::string why = std::string("not used by strategy ") + kind_name;
    if (kind_has_replay(*kind)) {
        strat.read("rho", c.strategy.rho);
        strat.read("stratified", c.strategy.stratified);
    } else {
        strat.forbid("rho", why);
        strat.forbid("stratified", why);
    }
    if (*kind == StrategyKind::Ilora) {
        strat.read("gamma", c.strategy.gamma);
        strat.read("lambda_ema", c.strategy.lambda_ema);
        strat.read("update_frequency", c.strategy.update_frequency);
        std::string deploy = "longterm";
        strat.read("deploy", deploy);
        if (deploy == "longterm") c.strategy.deploy = Deploy::LongTerm;
        else if (deploy == "working") c.strategy.deploy = Deploy::Working;
        else config_error("strategy.deploy: expected 'longterm' or 'working'");
    } else {
        for (const char* k : {"gamma", "lambda_ema", "update_frequency", "deploy"}) strat.forbid(k, why);
    }
    if (*kind == StrategyKind::Ewc) {
        strat.read("lambda_ewc", c.strategy.lambda_ewc);
        strat.read("fisher_samples", c.strategy.fisher_samples);
    } else {
        strat.forbid("lambda_ewc", why);
        strat.forbid("fisher_samples", why);
    }
    strat.finish();

    ObjectReader train(top.child("training"), "training");
    train.read("epochs", c.strategy.epochs);
    train.read("batch_size", c.strategy.batch_size);
    train.read("lr", c.strategy.lr);
    train.read("warmup_ratio", c.strategy.warmup_ratio);
    std::string optimizer = "adam";
    train.read("optimizer", optimizer);
    if (optimizer == "adam") c.strategy.optimizer = OptimizerKind::Adam;
    else if (optimizer == "sgd") c.strategy.optimizer = OptimizerKind::Sgd;
    else config_error("training.optimizer: expected 'adam' or 'sgd'");
    std::size_t declared_steps = 0;
    const bool has_steps = train.has("steps_per_task");
    train.read("steps_per_task", declared_steps);
    train.finish();

    top.finish();
    c.validate();
    if (has_steps && declared_steps != c.steps_per_task())
        config_error("training.steps_per_task: declared " + std::to_string(declared_steps) + " but epochs and "
                     "batch_size give " + std::to_string(c.steps_per_task()));
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        config_error(std::string("cannot read config: ") + e.what());
    }
    return parse_config(text);
}

std::string echo_config(const ExperimentConfig& c) {
    ordered_json root;
    root["seed"] = c.seed;
    root["stream"] = {{"tasks", c.tasks},
                      {"input_dim", c.stream.input_dim},
                      {"classes", c.stream.classes},
                      {"n_train", c.stream.n_train},
                      {"n_eval", c.stream.n_eval},
                      {"cluster_std", c.stream.cluster_std},
                      {"rotation_deg", c.stream.rotation_deg},
                      {"mean_shift", c.stream.mean_shift},
                      {"class_spacing", c.stream.class_spacing}};
    root["arch"] = {{"hidden", c.arch.hidden},
                    {"embedding", c.arch.embedding},
                    {"rank", c.arch.rank},
                    {"alpha", c.arch.alpha}};
    root["pretrain"] = {{"epochs", c.pretrain.epochs},
                        {"batch_size", c.pretrain.batch_size},
                        {"lr", c.pretrain.lr}};
    ordered_json strat;
    strat["kind"] = to_string(c.strategy.kind);
    if (kind_has_replay(c.strategy.kind)) {
        strat["rho"] = c.strategy.rho;
        strat["stratified"] = c.strategy.stratified;
    }
    if (c.strategy.kind == StrategyKind::Ilora) {
        strat["gamma"] = c.strategy.gamma;
        strat["lambda_ema"] = c.strategy.lambda_ema;
        strat["update_frequency"] = c.strategy.update_frequency;
        strat["deploy"] = c.strategy.deploy == Deploy::LongTerm ? "longterm" : "working";
    }
    if (c.strategy.kind == StrategyKind::Ewc) {
        strat["lambda_ewc"] = c.strategy.lambda_ewc;
        strat["fisher_samples"] = c.strategy.fisher_samples;
    }
    root["strategy"] = strat;
    root["training"] = {{"epochs", c.strategy.epochs},
                        {"batch_size", c.strategy.batch_size},
                        {"lr", c.strategy.lr},
                        {"warmup_ratio", c.strategy.warmup_ratio},
                        {"optimizer", c.strategy.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                        {"steps_per_task", c.steps_per_task()}};
    return root.dump(2) + "\n";
}

ExperimentSeeds derive_seeds(std::uint64_t seed) {
    Rng rng(seed);
    ExperimentSeeds s{};
    s.stream = rng.next_u64();
    s.pretrain = rng.next_u64();
    s.training = rng.next_u64();
    return s;
}

Experiment prepare_experiment(const ExperimentConfig& config) {
    config.validate();
    const ExperimentSeeds seeds = derive_seeds(config.seed);
    Experiment ex;
    ex.stream = make_stream(seeds.stream, config.tasks, config.stream);
    ex.backbone = pretrain_backbone(ex.stream.anchor.train, config.arch, config.pretrain, seeds.pretrain);
    return ex;
}

RunRecord run_experiment(const ExperimentConfig& config, const Experiment& experiment, const StepObserver& observer) {
    Rng rng(derive_seeds(config.seed).training);
    RunRecord rec = run_sequence(config.strategy, experiment.stream.tasks, experiment.backbone, rng, observer);
    rec.seed = config.seed;
    return rec;
}

}  // namespace ilora
