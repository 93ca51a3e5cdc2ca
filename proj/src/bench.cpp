// SPDX-License-Identifier: Apache-2.0
#include "ilora/bench.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ilora/error.hpp"
#include "ilora/optim.hpp"

namespace ilora {

namespace {

// Balanced labels (i mod c) in a seeded order, then x = transform·(μ_y + σ·ε) + shift_y.
Batch sample_task(Rng& rng, std::size_t n, const Matrix& base_means, const Matrix& transform, const Matrix& shifts,
                  double std) {
    const std::size_t c = base_means.rows();
    const std::size_t d = base_means.cols();
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % c);
    for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

    const Matrix noise = gaussian_fill(rng, n, d, 0.0, std);
    Matrix raw(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) raw(i, k) = base_means(static_cast<std::size_t>(labels[i]), k) + noise(i, k);
    Matrix x = matmul_nt(raw, transform);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) x(i, k) += shifts(static_cast<std::size_t>(labels[i]), k);
    return {std::move(x), std::move(labels)};
}

Matrix transformed_means(const Matrix& base_means, const Matrix& transform, const Matrix& shifts) {
    Matrix m = matmul_nt(base_means, transform);
    for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] += shifts.values()[i];
    return m;
}

}  // namespace

void TaskSpec::validate() const {
    require(classes >= 2, "TaskSpec: need at least two classes");
    require(input_dim >= classes, "TaskSpec: input_dim must be at least the number of classes");
    require(n_train >= classes && n_eval >= classes, "TaskSpec: n_train and n_eval must be at least classes");
    require(cluster_std >= 0.0 && mean_shift >= 0.0 && class_spacing > 0.0,
            "TaskSpec: std, shift and spacing must be non-negative");
    require(std::isfinite(rotation_deg), "TaskSpec: rotation must be finite");
}

Matrix givens(std::size_t dim, std::size_t i, std::size_t j, double angle_rad) {
    require(i < dim && j < dim && i != j, "givens: invalid plane");
    Matrix g = Matrix::identity(dim);
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    g(i, i) = c;
    g(j, j) = c;
    g(i, j) = -s;
    g(j, i) = s;
    return g;
}

TaskStream make_stream(std::uint64_t seed, std::size_t n_tasks, const TaskSpec& base) {
    require(n_tasks >= 1, "make_stream: need at least one task");
    base.validate();
    const std::size_t c = base.classes;
    const std::size_t d = base.input_dim;

    Rng rng(seed);
    // Seeded distinct axes for the class means.
    std::vector<std::size_t> axes(d);
    std::iota(axes.begin(), axes.end(), std::size_t{0});
    for (std::size_t i = 0; i < c; ++i) std::swap(axes[i], axes[i + rng.below(d - i)]);
    Matrix means(c, d);
    for (std::size_t k = 0; k < c; ++k) means(k, axes[k]) = base.class_spacing;

    TaskStream stream;
    stream.seed = seed;

    const Matrix no_shift(c, d);
    stream.anchor.spec = base;
    stream.anchor.spec.task_id = 0;
    stream.anchor.spec.planes.clear();
    stream.anchor.transform = Matrix::identity(d);
    stream.anchor.class_means = means;
    {
        Rng data = rng.split();
        stream.anchor.train = sample_task(data, base.n_train, means, stream.anchor.transform, no_shift, base.cluster_std);
        stream.anchor.eval = sample_task(data, base.n_eval, means, stream.anchor.transform, no_shift, base.cluster_std);
    }

    const double angle = base.rotation_deg * std::numbers::pi / 180.0;
    Matrix transform = Matrix::identity(d);
    std::vector<std::pair<std::size_t, std::size_t>> planes;
    for (std::size_t t = 1; t <= n_tasks; ++t) {
        const std::size_t a = rng.below(c);
        std::size_t b = rng.below(c - 1);
        if (b >= a) ++b;
        const std::size_t i = axes[a];
        const std::size_t j = axes[b];
        planes.emplace_back(i, j);
        transform = matmul(givens(d, i, j, angle), transform);

        Matrix shifts = gaussian_fill(rng, c, d, 0.0, 1.0);
        for (std::size_t k = 0; k < c; ++k) {
            auto row = shifts.row(k);
            double norm = std::sqrt(dot(row, row));
            for (double& v : row) v = norm > 0.0 ? base.mean_shift * v / norm : 0.0;
        }

        Task task;
        task.spec = base;
        task.spec.task_id = static_cast<int>(t);
        task.spec.planes = planes;
        task.transform = transform;
        task.class_means = transformed_means(means, transform, shifts);
        Rng data = rng.split();
        task.train = sample_task(data, base.n_train, means, transform, shifts, base.cluster_std);
        task.eval = sample_task(data, base.n_eval, means, transform, shifts, base.cluster_std);
        stream.tasks.push_back(std::move(task));
    }
    return stream;
}

double nearest_centroid_accuracy(const Matrix& class_means, const Batch& eval) {
    require(!eval.empty(), "nearest_centroid_accuracy: empty batch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t k = 0; k < class_means.rows(); ++k) {
            double dist = 0.0;
            for (std::size_t j = 0; j < class_means.cols(); ++j) {
                const double diff = eval.x(i, j) - class_means(k, j);
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                arg = k;
            }
        }
        if (arg == static_cast<std::size_t>(eval.y[i])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval.size());
}

BackboneParams pretrain_backbone(const Batch& anchor_train, const ArchConfig& arch, const PretrainConfig& cfg,
                                 std::uint64_t seed) {
    arch.validate();
    anchor_train.validate(arch);
    require(cfg.batch_size > 0 && cfg.epochs > 0, "pretrain_backbone: epochs and batch_size must be positive");

    Rng rng(seed);
    BackboneParams bb = BackboneParams::random(arch, rng);
    ParamVector flat = bb.flatten();
    const std::size_t n = anchor_train.size();
    const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    AdamState adam = AdamState::make(flat.size(), cfg.lr, 0.0, cfg.epochs * steps_per_epoch);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const Batch mb = select_rows(anchor_train, std::span(order).subspan(start, stop - start));
            const LossGrad lg = backbone_loss_and_grad(bb, mb);
            flat = adam_step(adam, flat, lg.grad);
            bb = BackboneParams::unflatten(arch, flat);
        }
    }
    return bb;
}

}  // namespace ilora
