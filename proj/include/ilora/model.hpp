// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ilora/numerics.hpp"

namespace ilora {

/// Network dimensions. The adapted layers are the two hidden weight matrices.
struct ArchConfig {
    std::size_t input_dim = 16;
    std::size_t hidden = 32;
    std::size_t embedding = 16;
    std::size_t classes = 4;
    std::size_t rank = 8;
    double alpha = 16.0;

    double scale() const noexcept { return alpha / static_cast<double>(rank); }
    /// r·d + h·r + r·h + e·r
    std::size_t adapter_param_count() const noexcept;
    std::size_t backbone_param_count() const noexcept;
    void validate() const;

    friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

/// Frozen base network: x -> relu(W1 x + b1) -> z = W2 h + b2 -> head z + bias.
struct BackboneParams {
    ArchConfig arch;
    Matrix w1;                  // hidden × input_dim
    std::vector<double> b1;     // hidden
    Matrix w2;                  // embedding × hidden
    std::vector<double> b2;     // embedding
    Matrix head;                // classes × embedding
    std::vector<double> head_bias;

    static BackboneParams zeros(const ArchConfig& arch);
    /// He-style Gaussian init for the weights, zero biases.
    static BackboneParams random(const ArchConfig& arch, Rng& rng);

    /// Layout: w1, b1, w2, b2, head, head_bias (matrices row-major).
    ParamVector flatten() const;
    static BackboneParams unflatten(const ArchConfig& arch, const ParamVector& flat);
};

/// Low-rank factors. Effective delta on layer L is (alpha/r)·B_L·A_L.
struct AdapterParams {
    Matrix a1;  // rank × input_dim
    Matrix b1;  // hidden × rank
    Matrix a2;  // rank × hidden
    Matrix b2;  // embedding × rank

    /// Layout: a1, b1, a2, b2, each row-major. Bit-exact inverse of unflatten.
    ParamVector flatten() const;
    static AdapterParams unflatten(const ArchConfig& arch, const ParamVector& theta);
};

/// A ~ N(0, init_std²), B = 0, so the adapted network starts exactly at the
/// backbone.
ParamVector init_adapters(const ArchConfig& arch, Rng& rng, double init_std = 0.02);

struct Batch {
    Matrix x;
    std::vector<int> y;

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }
    void validate(const ArchConfig& arch) const;
};

Batch concat(const Batch& a, const Batch& b);
Batch select_rows(const Batch& src, std::span<const std::size_t> rows);

struct ForwardOutput {
    Matrix logits;     // n × classes
    Matrix embedding;  // n × embedding, the pre-head representation
};

ForwardOutput forward(const BackboneParams& backbone, const ParamVector& theta, const Matrix& x);
/// Same network with no adapter contribution at all.
ForwardOutput forward_backbone(const BackboneParams& backbone, const Matrix& x);
/// Embedding only (the pre-head features).
Matrix embed(const BackboneParams& backbone, const ParamVector& theta, const Matrix& x);

/// Inputs and frozen target embeddings for the embedding-deviation term.
struct DistillTarget {
    const Matrix& inputs;
    const Matrix& targets;
};

struct LossGrad {
    double loss = 0.0;
    ParamVector grad;
};

/// Mean cross-entropy on `batch` plus gamma · mean over (sample, coordinate)
/// of (embed(inputs; θ) − targets)². The gradient is exact and taken with
/// respect to the adapters only; targets are constants.
LossGrad loss_and_grad(const BackboneParams& backbone, const ParamVector& theta, const Batch& batch,
                       double gamma = 0.0, std::optional<DistillTarget> distill = std::nullopt);

/// Cross-entropy loss and gradient with respect to every backbone parameter
/// (flatten() layout). Used only for pretraining.
LossGrad backbone_loss_and_grad(const BackboneParams& backbone, const Batch& batch);

/// Row-wise softmax, max-shifted.
Matrix softmax_rows(const Matrix& logits);
/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

double predict_accuracy(const BackboneParams& backbone, const ParamVector& theta, const Batch& eval);

}  // namespace ilora
