// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ilora/bench.hpp"
#include "ilora/config.hpp"
#include "ilora/error.hpp"
#include "ilora/metrics.hpp"

using namespace ilora;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

bool same_task(const Task& a, const Task& b) {
    return bit_equal(a.train.x, b.train.x) && a.train.y == b.train.y && bit_equal(a.eval.x, b.eval.x) &&
           a.eval.y == b.eval.y && bit_equal(a.transform, b.transform) && a.spec.planes == b.spec.planes;
}

}  // namespace

TEST_CASE("the anchor is separable by its class means") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const TaskStream s = make_stream(seed, 1, TaskSpec{});
        CHECK(s.tasks.size() == 1);
        const double acc = nearest_centroid_accuracy(s.anchor.class_means, s.anchor.eval);
        CHECK(acc >= 0.9);
        for (const auto& t : s.tasks) CHECK(nearest_centroid_accuracy(t.class_means, t.eval) >= 0.9);
    }
}

TEST_CASE("streams are reproducible from the seed") {
    const TaskStream a = make_stream(5, 3, TaskSpec{}), b = make_stream(5, 3, TaskSpec{});
    CHECK(same_task(a.anchor, b.anchor));
    for (std::size_t t = 0; t < 3; ++t) CHECK(same_task(a.tasks[t], b.tasks[t]));
    const TaskStream c = make_stream(6, 3, TaskSpec{});
    CHECK_FALSE(same_task(a.tasks[0], c.tasks[0]));
}

TEST_CASE("rotations are orthogonal and cumulative") {
    const TaskStream s = make_stream(3, 5, TaskSpec{});
    for (std::size_t t = 0; t < 5; ++t) {
        const Matrix& q = s.tasks[t].transform;
        const Matrix qtq = matmul_tn(q, q);
        for (std::size_t i = 0; i < qtq.rows(); ++i)
            for (std::size_t j = 0; j < qtq.cols(); ++j) CHECK(std::abs(qtq(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
        CHECK(s.tasks[t].spec.planes.size() == t + 1);
        CHECK(s.tasks[t].spec.task_id == static_cast<int>(t + 1));
    }
    // Task t's transform is the Givens rotation for its newest plane applied to task t-1's.
    const auto [i, j] = s.tasks[2].spec.planes.back();
    const Matrix expect = matmul(givens(16, i, j, 25.0 * std::numbers::pi / 180.0), s.tasks[1].transform);
    CHECK(bit_equal(expect, s.tasks[2].transform));
}

TEST_CASE("label counts are balanced and eval rows are not train rows") {
    const TaskStream s = make_stream(4, 3, TaskSpec{});
    auto check_balance = [](const Batch& b) {
        std::vector<std::size_t> counts(4, 0);
        for (int y : b.y) ++counts[static_cast<std::size_t>(y)];
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        CHECK(*hi - *lo <= 1);
    };
    std::vector<const Task*> all{&s.anchor};
    for (const auto& t : s.tasks) all.push_back(&t);
    for (const Task* t : all) {
        check_balance(t->train);
        check_balance(t->eval);
        std::set<std::vector<double>> train_rows;
        for (std::size_t i = 0; i < t->train.size(); ++i)
            train_rows.emplace(t->train.x.row(i).begin(), t->train.x.row(i).end());
        for (std::size_t i = 0; i < t->eval.size(); ++i)
            CHECK(train_rows.count(std::vector<double>(t->eval.x.row(i).begin(), t->eval.x.row(i).end())) == 0);
    }
}

TEST_CASE("zero rotation and zero shift reproduce the anchor distribution") {
    TaskSpec spec;
    spec.rotation_deg = 0.0;
    spec.mean_shift = 0.0;
    const TaskStream s = make_stream(8, 3, spec);
    for (const auto& t : s.tasks) {
        CHECK(t.transform == Matrix::identity(16));
        CHECK(t.class_means == s.anchor.class_means);
    }
}

TEST_CASE("spec validation") {
    TaskSpec bad;
    bad.n_eval = 2;
    CHECK_THROWS_AS(make_stream(0, 2, bad), Error);
    CHECK_THROWS_AS(make_stream(0, 0, TaskSpec{}), Error);
    CHECK_THROWS_AS(givens(4, 1, 1, 0.3), Error);
}

TEST_CASE("pretraining reaches the accuracy floor and is deterministic") {
    const ArchConfig arch;
    for (std::uint64_t seed : {0u, 1u}) {
        const TaskStream s = make_stream(seed, 1, TaskSpec{});
        const BackboneParams bb = pretrain_backbone(s.anchor.train, arch, PretrainConfig{}, seed + 100);
        Rng rng(0);
        const ParamVector theta = init_adapters(arch, rng);
        const double acc = predict_accuracy(bb, theta, s.anchor.eval);
        const double oracle = nearest_centroid_accuracy(s.anchor.class_means, s.anchor.eval);
        MESSAGE("seed " << seed << ": backbone " << acc << ", nearest centroid " << oracle);
        CHECK(acc >= 0.85);
        CHECK(oracle >= 0.85);
        const BackboneParams again = pretrain_backbone(s.anchor.train, arch, PretrainConfig{}, seed + 100);
        CHECK(bit_equal(again.flatten(), bb.flatten()));
    }
}

TEST_CASE("random adapters lose general knowledge") {
    const ArchConfig arch;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const TaskStream s = make_stream(seed, 1, TaskSpec{});
        const BackboneParams bb = pretrain_backbone(s.anchor.train, arch, PretrainConfig{}, seed);
        Rng rng(seed);
        const ParamVector trained = init_adapters(arch, rng);
        ParamVector random(arch.adapter_param_count());
        for (auto& x : random) x = rng.normal();
        CHECK(general_retention(bb, trained, random, s.anchor.eval) < 0.0);
    }
}

TEST_CASE("forgetting grows with the rotation angle") {
    std::vector<double> medians;
    for (double deg : {0.0, 15.0, 30.0}) {
        std::vector<double> bwts;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            ExperimentConfig c;
            c.seed = seed;
            c.strategy.kind = StrategyKind::Seq;
            c.stream.rotation_deg = deg;
            if (deg == 0.0) c.stream.mean_shift = 0.0;
            const Experiment ex = prepare_experiment(c);
            const RunRecord rec = run_experiment(c, ex);
            bwts.push_back(bwt_t(rec.result_matrix, c.tasks));
        }
        medians.push_back(median(bwts));
        MESSAGE("rotation " << deg << " deg: median SEQ BWT_5 " << medians.back());
    }
    CHECK(std::abs(medians[0]) <= 0.05);
}
