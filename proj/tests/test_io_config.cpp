// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "ilora/commands.hpp"
#include "ilora/config.hpp"
#include "ilora/io.hpp"
#include "ilora/metrics.hpp"
#include "test_support.hpp"

using namespace ilora;
using namespace ilora::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ilora_io_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Empty when f returns normally.
std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

// Small enough to run in well under a second.
std::string small_config(const std::string& kind, std::size_t tasks, const std::string& extra = "") {
    std::ostringstream s;
    s << R"({"seed": 3, "stream": {"tasks": )" << tasks
      << R"(, "n_train": 128, "n_eval": 64}, "pretrain": {"epochs": 5},)"
      << R"( "strategy": {"kind": ")" << kind << "\"" << extra << R"(}, "training": {"epochs": 2}})";
    return s.str();
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        n += name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    }
    return n;
}

}  // namespace

TEST_CASE("checkpoint encoding") {
    Checkpoint c;
    c.task_index = 7;
    c.seed = 0x0102030405060708ull;
    c.role = CheckpointRole::LongTerm;
    c.params = {1.0, -0.0, std::numeric_limits<double>::denorm_min(), -3.25e300, 0.1};
    const auto bytes = encode_checkpoint(c);
    CHECK(bytes.size() == Checkpoint::kHeaderSize + 8 * c.params.size());
    CHECK(std::string(bytes.begin(), bytes.begin() + 6) == "ILORA1");
    CHECK(bytes[6] == 1);
    CHECK(bytes[10] == 5);
    CHECK(bytes[18] == 7);
    CHECK(bytes[22] == 0x08);
    CHECK(bytes[29] == 0x01);
    CHECK(bytes[30] == 1);
    // 1.0 is 0x3FF0000000000000, stored low byte first.
    CHECK(bytes[34] == 0x00);
    CHECK(bytes[41] == 0x3F);

    const Checkpoint d = decode_checkpoint(bytes);
    CHECK(d.task_index == 7);
    CHECK(d.seed == c.seed);
    CHECK(d.role == CheckpointRole::LongTerm);
    CHECK(bit_equal(d.params, c.params));
    CHECK(std::signbit(d.params[1]));
}

TEST_CASE("malformed checkpoints are rejected") {
    Checkpoint c;
    c.params = {1.0, 2.0};
    const auto good = encode_checkpoint(c);
    auto bad = good;
    bad[0] = 'X';
    CHECK(kind_of([&] { decode_checkpoint(bad); }) == ErrorKind::Io);
    bad = good;
    bad.pop_back();
    CHECK(kind_of([&] { decode_checkpoint(bad); }) == ErrorKind::Io);
    bad = good;
    bad[6] = 2;
    CHECK(kind_of([&] { decode_checkpoint(bad); }) == ErrorKind::Io);
    bad = good;
    bad[30] = 9;
    CHECK(kind_of([&] { decode_checkpoint(bad); }) == ErrorKind::Io);
    CHECK(kind_of([&] { decode_checkpoint({}); }) == ErrorKind::Io);
}

TEST_CASE("checkpoint files round trip and missing files are named") {
    const fs::path dir = scratch("ckpt");
    Rng rng(1);
    const Checkpoint c{3, 42, CheckpointRole::Working, random_theta(small_arch(), rng)};
    save_checkpoint(dir / "a.ckpt", c);
    CHECK(load_checkpoint(dir / "a.ckpt") == c);
    CHECK(fs::file_size(dir / "a.ckpt") == Checkpoint::kHeaderSize + 8 * c.params.size());

    const fs::path gone = dir / "nope.ckpt";
    CHECK(kind_of([&] { load_checkpoint(gone); }) == ErrorKind::Missing);
    CHECK(message_of([&] { load_checkpoint(gone); }).find("nope.ckpt") != std::string::npos);
}

TEST_CASE("real formatting round trips") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
        CHECK(std::strtod(format_real(x).c_str(), nullptr) == x);
    }
    CHECK(std::strtod(format_real(0.1).c_str(), nullptr) == 0.1);
}

TEST_CASE("result matrix csv round trip") {
    ResultMatrix r(3);
    Rng rng(3);
    for (std::size_t t = 1; t <= 3; ++t)
        for (std::size_t j = 1; j <= t; ++j) r.set(t, j, rng.uniform());
    const std::string csv = result_matrix_csv(r);
    CHECK(csv.rfind("after_task,eval_task,accuracy\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(parse_result_matrix_csv(csv) == r);
    CHECK(kind_of([] { parse_result_matrix_csv("a,b\n"); }) == ErrorKind::Io);
    CHECK(kind_of([] { parse_result_matrix_csv("after_task,eval_task,accuracy\n2,1,0.5\n"); }) == ErrorKind::Io);
}

TEST_CASE("config defaults and echo") {
    const ExperimentConfig c = parse_config("{}");
    CHECK(c.tasks == 5);
    CHECK(c.strategy.kind == StrategyKind::Ilora);
    CHECK(c.arch.rank == 8);
    const std::string echo = echo_config(c);
    const auto j = nlohmann::json::parse(echo);
    CHECK(j["training"]["steps_per_task"] == c.steps_per_task());
    CHECK_FALSE(j.contains("output_dir"));
    CHECK(echo_config(parse_config(echo)) == echo);

    for (const char* kind : {"SEQ", "ER", "EWC", "AGEM", "MTL", "ILORA"}) {
        const ExperimentConfig k = parse_config(small_config(kind, 2));
        CHECK(echo_config(parse_config(echo_config(k))) == echo_config(k));
    }
}

TEST_CASE("config rejects unknown and inapplicable keys") {
    auto err = [](const std::string& text) { return kind_of([&] { parse_config(text); }); };
    CHECK(err("{\"sed\": 1}") == ErrorKind::Config);
    CHECK(err("{\"stream\": {\"taks\": 2}}") == ErrorKind::Config);
    CHECK(err("not json") == ErrorKind::Config);
    CHECK(err("{\"seed\": -1}") == ErrorKind::Config);
    CHECK(err("{\"seed\": \"1\"}") == ErrorKind::Config);
    CHECK(err(small_config("SEQ", 2, ", \"rho\": 0.1")) == ErrorKind::Config);
    CHECK(err(small_config("ER", 2, ", \"lambda_ema\": 0.9")) == ErrorKind::Config);
    CHECK(err(small_config("ILORA", 2, ", \"lambda_ewc\": 1")) == ErrorKind::Config);
    CHECK(err(small_config("ILORA", 2, ", \"lambda_ema\": 1.5")) == ErrorKind::Config);
    CHECK(err(small_config("ILORA", 2, ", \"deploy\": \"both\"")) == ErrorKind::Config);
    CHECK(err(small_config("NOPE", 2)) == ErrorKind::Config);
    CHECK(err("{\"stream\": {\"tasks\": 0}}") == ErrorKind::Config);
    CHECK(message_of([] { parse_config("{\"stream\": {\"taks\": 2}}"); }).find("stream.taks") != std::string::npos);

    // 128 rows / 16 per batch × 2 epochs = 16 steps.
    CHECK_NOTHROW(parse_config(R"({"stream": {"n_train": 128}, "training": {"epochs": 2, "steps_per_task": 16}})"));
    CHECK(err(R"({"stream": {"n_train": 128}, "training": {"epochs": 2, "steps_per_task": 17}})") == ErrorKind::Config);
    CHECK(kind_of([] { load_config("/nonexistent/config.json"); }) == ErrorKind::Config);
}

TEST_CASE("derived seeds") {
    const ExperimentSeeds a = derive_seeds(0), b = derive_seeds(0), c = derive_seeds(1);
    CHECK(a.stream == b.stream);
    CHECK(a.training == b.training);
    CHECK(a.stream != a.pretrain);
    CHECK(a.pretrain != a.training);
    CHECK(a.stream != c.stream);
    Rng rng(0);
    CHECK(a.stream == rng.next_u64());
    CHECK(a.pretrain == rng.next_u64());
    CHECK(a.training == rng.next_u64());
}

TEST_CASE("run directories") {
    const fs::path root = scratch("runs");
    const ExperimentConfig il = parse_config(small_config("ILORA", 3));
    cmd_run(il, root / "a");
    cmd_run(il, root / "b");
    CHECK(count_files(root / "a", "_working.ckpt") == 3);
    CHECK(count_files(root / "a", "_longterm.ckpt") == 3);
    for (const char* f : {run_files::kBackbone, run_files::kInitial, run_files::kMetrics, run_files::kConfigEcho})
        CHECK(fs::exists(root / "a" / f));
    const std::string results = read_text_file(root / "a" / run_files::kResults);
    CHECK(results == read_text_file(root / "b" / run_files::kResults));

    // Rerunning from the echoed config reproduces the results byte for byte.
    const ExperimentConfig again = load_config((root / "a" / run_files::kConfigEcho).string());
    cmd_run(again, root / "c");
    CHECK(read_text_file(root / "c" / run_files::kResults) == results);

    const Checkpoint w2 = load_checkpoint(root / "a" / run_files::working(2));
    CHECK(w2.task_index == 2);
    CHECK(w2.seed == 3);
    CHECK(w2.role == CheckpointRole::Working);
    CHECK(load_checkpoint(root / "a" / run_files::longterm(2)).role == CheckpointRole::LongTerm);
    CHECK(load_checkpoint(root / "a" / run_files::kBackbone).role == CheckpointRole::Backbone);

    const auto metrics = nlohmann::json::parse(read_text_file(root / "a" / run_files::kMetrics));
    const ResultMatrix r = parse_result_matrix_csv(results);
    CHECK(metrics["acc"].size() == 3);
    CHECK(metrics["bwt"].size() == 2);
    CHECK(metrics["acc"][2].get<double>() == acc_t(r, 3));
    CHECK(metrics["bwt"][1].get<double>() == bwt_t(r, 3));

    // The stored evaluations match fresh ones on the reloaded checkpoints.
    const LoadedRun run = load_run(root / "a");
    for (std::size_t t = 1; t <= 3; ++t)
        for (std::size_t j = 1; j <= t; ++j)
            CHECK(r.at(t, j) == predict_accuracy(run.backbone, run.deployed(t), run.stream.tasks[j - 1].eval));

    const ExperimentConfig one = parse_config(small_config("SEQ", 1));
    cmd_run(one, root / "seq1");
    const auto m1 = nlohmann::json::parse(read_text_file(root / "seq1" / run_files::kMetrics));
    CHECK(m1["bwt"].empty());
    CHECK(m1["acc"].size() == 1);
    CHECK(count_files(root / "seq1", "_longterm.ckpt") == 0);
}

TEST_CASE("lambda sweep files") {
    const fs::path dir = scratch("sweep") / "run";
    cmd_run(parse_config(small_config("SEQ", 3)), dir);
    const auto grid = linspace(0.0, 1.0, 21);
    const LambdaSweep s = cmd_sweep_lambda(dir, 2, grid);
    const std::string csv = read_text_file(dir / run_files::sweep(2));
    CHECK(csv.rfind("lambda,Ap,An,Aall\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);

    const LoadedRun run = load_run(dir);
    const double ap0 = (predict_accuracy(run.backbone, run.deployed(2), run.stream.tasks[0].eval) +
                        predict_accuracy(run.backbone, run.deployed(2), run.stream.tasks[1].eval)) / 2.0;
    CHECK(s.ap.front() == ap0);
    CHECK(s.an.front() == predict_accuracy(run.backbone, run.deployed(2), run.stream.tasks[2].eval));
    CHECK(s.an.back() == predict_accuracy(run.backbone, run.deployed(3), run.stream.tasks[2].eval));

    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        double lam, ap, an, all;
        char c1, c2, c3;
        std::istringstream row(line);
        row >> lam >> c1 >> ap >> c2 >> an >> c3 >> all;
        CHECK(std::abs(all - (2.0 * ap + an) / 3.0) <= 1e-12);
        ++rows;
    }
    CHECK(rows == 21);

    CHECK(kind_of([&] { cmd_sweep_lambda(dir, 3, grid); }) == ErrorKind::Config);
    CHECK(kind_of([&] { cmd_sweep_lambda(dir, 1, {0.0, 0.5}); }) == ErrorKind::Config);
    fs::remove(dir / run_files::working(3));
    CHECK(kind_of([&] { cmd_sweep_lambda(dir, 2, grid); }) == ErrorKind::Missing);
    CHECK(message_of([&] { cmd_sweep_lambda(dir, 2, grid); }).find(run_files::working(3)) != std::string::npos);
    CHECK(kind_of([&] { cmd_sweep_lambda(dir.parent_path() / "absent", 1, grid); }) == ErrorKind::Missing);
}

TEST_CASE("probes") {
    const fs::path root = scratch("probe");
    const fs::path dir = root / "run";
    cmd_run(parse_config(small_config("ILORA", 3)), dir);
    const LoadedRun run = load_run(dir);

    const std::string wd = read_text_file(cmd_probe(dir, ProbeKind::WeightDistance, {}));
    CHECK(wd.rfind("transition,WD_w,WD_l\n1,", 0) == 0);
    CHECK(std::count(wd.begin(), wd.end(), '\n') == 3);
    CHECK(weight_distance(run.working(1), run.working(1)) == 0.0);

    const std::string cka = read_text_file(cmd_probe(dir, ProbeKind::Cka, {}));
    CHECK(std::count(cka.begin(), cka.end(), '\n') == 3);
    const Matrix e = embed(run.backbone, run.working(2), run.stream.tasks[0].eval.x);
    CHECK(std::abs(linear_cka(e, e) - 1.0) <= 1e-10);

    ProbeOptions opt;
    opt.transition = 2;
    opt.points = 5;
    opt.lo = -1.0;
    opt.hi = 1.0;
    const std::string land = read_text_file(cmd_probe(dir, ProbeKind::Landscape, opt));
    CHECK(std::count(land.begin(), land.end(), '\n') == 26);
    CHECK(land.find("\n0,0,0\n") != std::string::npos);

    const fs::path seq = root / "seq";
    cmd_run(parse_config(small_config("SEQ", 2)), seq);
    const std::string wd_seq = read_text_file(cmd_probe(seq, ProbeKind::WeightDistance, {}));
    CHECK(wd_seq.back() == '\n');
    CHECK(wd_seq[wd_seq.size() - 2] == ',');
    CHECK(kind_of([&] { cmd_probe(seq, ProbeKind::Landscape, {}); }) == ErrorKind::Missing);
    opt.transition = 9;
    CHECK(kind_of([&] { cmd_probe(dir, ProbeKind::Landscape, opt); }) == ErrorKind::Config);
}

TEST_CASE("stream dump") {
    const ExperimentConfig c = parse_config(small_config("SEQ", 2));
    const std::string csv = stream_csv(make_stream(derive_seeds(c.seed).stream, c.tasks, c.stream));
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("task_id,split,label,x0,", 0) == 0);
    CHECK(header.find(",x15") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * (128 + 64));
    CHECK(csv.find("\n2,eval,") != std::string::npos);
    CHECK(csv.find("\n3,") == std::string::npos);
}
