// SPDX-License-Identifier: Apache-2.0
#include "ilora/model.hpp"

#include <algorithm>
#include <cmath>

#include "ilora/error.hpp"

namespace ilora {

namespace {

void append(std::vector<double>& out, std::span<const double> src) { out.insert(out.end(), src.begin(), src.end()); }

Matrix take_matrix(const ParamVector& flat, std::size_t& offset, std::size_t rows, std::size_t cols) {
    std::vector<double> data(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                             flat.begin() + static_cast<std::ptrdiff_t>(offset + rows * cols));
    offset += rows * cols;
    return Matrix(rows, cols, std::move(data));
}

std::vector<double> take_vector(const ParamVector& flat, std::size_t& offset, std::size_t n) {
    std::vector<double> v(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                          flat.begin() + static_cast<std::ptrdiff_t>(offset + n));
    offset += n;
    return v;
}

// W + s·B·A
Matrix effective_weight(const Matrix& w, const Matrix& b, const Matrix& a, double s) {
    Matrix delta = matmul(b, a);
    Matrix out = w;
    auto ov = out.values();
    auto dv = delta.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += s * dv[i];
    return out;
}

// x · wᵀ + bias, row-broadcast.
Matrix affine(const Matrix& x, const Matrix& w, const std::vector<double>& bias) {
    Matrix out = matmul_nt(x, w);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
    }
    return out;
}

struct Activations {
    Matrix pre1;
    Matrix h1;
    Matrix z;
    Matrix logits;
};

Activations run(const BackboneParams& bb, const Matrix& w1, const Matrix& w2, const Matrix& x) {
    require(x.cols() == bb.arch.input_dim, "forward: input dimension mismatch");
    Activations act;
    act.pre1 = affine(x, w1, bb.b1);
    act.h1 = act.pre1;
    for (double& v : act.h1.values()) v = v > 0.0 ? v : 0.0;
    act.z = affine(act.h1, w2, bb.b2);
    act.logits = affine(act.z, bb.head, bb.head_bias);
    return act;
}

struct HiddenGrads {
    Matrix dw1;
    Matrix dw2;
    std::vector<double> db1;
    std::vector<double> db2;
};

// Back-propagates dL/dz through both hidden layers, accumulating into g.
void backprop_embedding(const Activations& act, const Matrix& w2, const Matrix& x, const Matrix& dz,
                        HiddenGrads& g) {
    Matrix dw2 = matmul_tn(dz, act.h1);
    Matrix dpre1 = matmul(dz, w2);
    for (std::size_t i = 0; i < dpre1.size(); ++i)
        if (!(act.pre1.values()[i] > 0.0)) dpre1.values()[i] = 0.0;
    Matrix dw1 = matmul_tn(dpre1, x);

    auto accumulate = [](Matrix& dst, const Matrix& src) {
        if (dst.size() == 0) {
            dst = src;
            return;
        }
        for (std::size_t i = 0; i < dst.size(); ++i) dst.values()[i] += src.values()[i];
    };
    accumulate(g.dw1, dw1);
    accumulate(g.dw2, dw2);
    if (g.db1.empty()) g.db1.assign(dpre1.cols(), 0.0);
    if (g.db2.empty()) g.db2.assign(dz.cols(), 0.0);
    for (std::size_t i = 0; i < dpre1.rows(); ++i)
        for (std::size_t j = 0; j < dpre1.cols(); ++j) g.db1[j] += dpre1(i, j);
    for (std::size_t i = 0; i < dz.rows(); ++i)
        for (std::size_t j = 0; j < dz.cols(); ++j) g.db2[j] += dz(i, j);
}

// Mean cross-entropy and dL/dlogits.
double cross_entropy(const Matrix& logits, const std::vector<int>& y, Matrix& dlogits) {
    const std::size_t n = logits.rows();
    dlogits = softmax_rows(logits);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = logits.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        loss += (std::log(sum) + mx) - row[static_cast<std::size_t>(y[i])];
        dlogits(i, static_cast<std::size_t>(y[i])) -= 1.0;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : dlogits.values()) v *= inv_n;
    return loss * inv_n;
}

void check_loss(double loss) {
    if (!std::isfinite(loss)) throw Error(ErrorKind::Numeric, "loss is not finite");
}

}  // namespace

std::size_t ArchConfig::adapter_param_count() const noexcept {
    return rank * input_dim + hidden * rank + rank * hidden + embedding * rank;
}

std::size_t ArchConfig::backbone_param_count() const noexcept {
    return hidden * input_dim + hidden + embedding * hidden + embedding + classes * embedding + classes;
}

void ArchConfig::validate() const {
    require(input_dim > 0 && hidden > 0 && embedding > 0 && rank > 0, "arch: dimensions must be positive");
    require(classes >= 2, "arch: need at least two classes");
    require(std::isfinite(alpha), "arch: alpha must be finite");
}

BackboneParams BackboneParams::zeros(const ArchConfig& arch) {
    BackboneParams bb;
    bb.arch = arch;
    bb.w1 = Matrix(arch.hidden, arch.input_dim);
    bb.b1.assign(arch.hidden, 0.0);
    bb.w2 = Matrix(arch.embedding, arch.hidden);
    bb.b2.assign(arch.embedding, 0.0);
    bb.head = Matrix(arch.classes, arch.embedding);
    bb.head_bias.assign(arch.classes, 0.0);
    return bb;
}

BackboneParams BackboneParams::random(const ArchConfig& arch, Rng& rng) {
    BackboneParams bb = zeros(arch);
    bb.w1 = gaussian_fill(rng, arch.hidden, arch.input_dim, 0.0, std::sqrt(2.0 / arch.input_dim));
    bb.w2 = gaussian_fill(rng, arch.embedding, arch.hidden, 0.0, std::sqrt(2.0 / arch.hidden));
    bb.head = gaussian_fill(rng, arch.classes, arch.embedding, 0.0, std::sqrt(1.0 / arch.embedding));
    return bb;
}

ParamVector BackboneParams::flatten() const {
    std::vector<double> out;
    out.reserve(arch.backbone_param_count());
    append(out, w1.values());
    append(out, b1);
    append(out, w2.values());
    append(out, b2);
    append(out, head.values());
    append(out, head_bias);
    return ParamVector(std::move(out));
}

BackboneParams BackboneParams::unflatten(const ArchConfig& arch, const ParamVector& flat) {
    require(flat.size() == arch.backbone_param_count(), "backbone: parameter count mismatch");
    BackboneParams bb;
    bb.arch = arch;
    std::size_t off = 0;
    bb.w1 = take_matrix(flat, off, arch.hidden, arch.input_dim);
    bb.b1 = take_vector(flat, off, arch.hidden);
    bb.w2 = take_matrix(flat, off, arch.embedding, arch.hidden);
    bb.b2 = take_vector(flat, off, arch.embedding);
    bb.head = take_matrix(flat, off, arch.classes, arch.embedding);
    bb.head_bias = take_vector(flat, off, arch.classes);
    return bb;
}

ParamVector AdapterParams::flatten() const {
    std::vector<double> out;
    out.reserve(a1.size() + b1.size() + a2.size() + b2.size());
    append(out, a1.values());
    append(out, b1.values());
    append(out, a2.values());
    append(out, b2.values());
    return ParamVector(std::move(out));
}

AdapterParams AdapterParams::unflatten(const ArchConfig& arch, const ParamVector& theta) {
    require(theta.size() == arch.adapter_param_count(), "adapter: parameter count mismatch");
    AdapterParams p;
    std::size_t off = 0;
    p.a1 = take_matrix(theta, off, arch.rank, arch.input_dim);
    p.b1 = take_matrix(theta, off, arch.hidden, arch.rank);
    p.a2 = take_matrix(theta, off, arch.rank, arch.hidden);
    p.b2 = take_matrix(theta, off, arch.embedding, arch.rank);
    return p;
}

ParamVector init_adapters(const ArchConfig& arch, Rng& rng, double init_std) {
    AdapterParams p;
    p.a1 = gaussian_fill(rng, arch.rank, arch.input_dim, 0.0, init_std);
    p.b1 = Matrix(arch.hidden, arch.rank);
    p.a2 = gaussian_fill(rng, arch.rank, arch.hidden, 0.0, init_std);
    p.b2 = Matrix(arch.embedding, arch.rank);
    return p.flatten();
}

void Batch::validate(const ArchConfig& arch) const {
    require(!y.empty(), "batch: must contain at least one sample");
    require(x.rows() == y.size(), "batch: label count must equal row count");
    require(x.cols() == arch.input_dim, "batch: input dimension mismatch");
    for (int label : y)
        require(label >= 0 && static_cast<std::size_t>(label) < arch.classes, "batch: label out of range");
}

Batch concat(const Batch& a, const Batch& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    require(a.x.cols() == b.x.cols(), "concat: column mismatch");
    std::vector<double> data(a.x.values().begin(), a.x.values().end());
    data.insert(data.end(), b.x.values().begin(), b.x.values().end());
    Batch out{Matrix(a.size() + b.size(), a.x.cols(), std::move(data)), a.y};
    out.y.insert(out.y.end(), b.y.begin(), b.y.end());
    return out;
}

Batch select_rows(const Batch& src, std::span<const std::size_t> rows) {
    Batch out{Matrix(rows.size(), src.x.cols()), {}};
    out.y.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < src.size(), "select_rows: index out of range");
        auto dst = out.x.row(i);
        auto s = src.x.row(rows[i]);
        std::copy(s.begin(), s.end(), dst.begin());
        out.y.push_back(src.y[rows[i]]);
    }
    return out;
}

ForwardOutput forward(const BackboneParams& bb, const ParamVector& theta, const Matrix& x) {
    const AdapterParams ad = AdapterParams::unflatten(bb.arch, theta);
    const double s = bb.arch.scale();
    const Matrix w1 = effective_weight(bb.w1, ad.b1, ad.a1, s);
    const Matrix w2 = effective_weight(bb.w2, ad.b2, ad.a2, s);
    Activations act = run(bb, w1, w2, x);
    return {std::move(act.logits), std::move(act.z)};
}

ForwardOutput forward_backbone(const BackboneParams& bb, const Matrix& x) {
    Activations act = run(bb, bb.w1, bb.w2, x);
    return {std::move(act.logits), std::move(act.z)};
}

Matrix embed(const BackboneParams& bb, const ParamVector& theta, const Matrix& x) {
    return forward(bb, theta, x).embedding;
}

LossGrad loss_and_grad(const BackboneParams& bb, const ParamVector& theta, const Batch& batch, double gamma,
                       std::optional<DistillTarget> distill) {
    const ArchConfig& arch = bb.arch;
    batch.validate(arch);
    require(gamma >= 0.0 && std::isfinite(gamma), "loss_and_grad: gamma must be finite and non-negative");
    if (gamma > 0.0) {
        require(distill.has_value(), "loss_and_grad: gamma > 0 requires a memory batch and target embeddings");
        require(distill->inputs.rows() == distill->targets.rows() && distill->inputs.rows() > 0,
                "loss_and_grad: memory batch and target rows differ");
        require(distill->targets.cols() == arch.embedding, "loss_and_grad: target embedding width mismatch");
    }

    const AdapterParams ad = AdapterParams::unflatten(arch, theta);
    const double s = arch.scale();
    const Matrix w1 = effective_weight(bb.w1, ad.b1, ad.a1, s);
    const Matrix w2 = effective_weight(bb.w2, ad.b2, ad.a2, s);

    HiddenGrads g;
    const Activations act = run(bb, w1, w2, batch.x);
    Matrix dlogits;
    double loss = cross_entropy(act.logits, batch.y, dlogits);
    backprop_embedding(act, w2, batch.x, matmul(dlogits, bb.head), g);

    if (gamma > 0.0) {
        const Activations mem = run(bb, w1, w2, distill->inputs);
        Matrix dz(mem.z.rows(), mem.z.cols());
        const double denom = static_cast<double>(mem.z.size());
        double mse = 0.0;
        for (std::size_t i = 0; i < dz.size(); ++i) {
            const double diff = mem.z.values()[i] - distill->targets.values()[i];
            mse += diff * diff;
            dz.values()[i] = gamma * 2.0 * diff / denom;
        }
        loss += gamma * (mse / denom);
        backprop_embedding(mem, w2, distill->inputs, dz, g);
    }
    check_loss(loss);

    // dL/dA = s·Bᵀ·dW, dL/dB = s·dW·Aᵀ
    AdapterParams grad;
    auto scaled = [s](Matrix m) {
        for (double& v : m.values()) v *= s;
        return m;
    };
    grad.a1 = scaled(matmul_tn(ad.b1, g.dw1));
    grad.b1 = scaled(matmul_nt(g.dw1, ad.a1));
    grad.a2 = scaled(matmul_tn(ad.b2, g.dw2));
    grad.b2 = scaled(matmul_nt(g.dw2, ad.a2));
    return {loss, grad.flatten()};
}

LossGrad backbone_loss_and_grad(const BackboneParams& bb, const Batch& batch) {
    batch.validate(bb.arch);
    const Activations act = run(bb, bb.w1, bb.w2, batch.x);
    Matrix dlogits;
    const double loss = cross_entropy(act.logits, batch.y, dlogits);
    check_loss(loss);
    HiddenGrads g;
    backprop_embedding(act, bb.w2, batch.x, matmul(dlogits, bb.head), g);

    BackboneParams grad = BackboneParams::zeros(bb.arch);
    grad.w1 = std::move(g.dw1);
    grad.b1 = std::move(g.db1);
    grad.w2 = std::move(g.dw2);
    grad.b2 = std::move(g.db2);
    grad.head = matmul_tn(dlogits, act.z);
    for (std::size_t i = 0; i < dlogits.rows(); ++i)
        for (std::size_t j = 0; j < dlogits.cols(); ++j) grad.head_bias[j] += dlogits(i, j);
    return {loss, grad.flatten()};
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out = logits;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        const double mx = *std::max_element(r.begin(), r.end());
        double sum = 0.0;
        for (double& v : r) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : r) v /= sum;
    }
    return out;
}

std::size_t argmax(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

double predict_accuracy(const BackboneParams& bb, const ParamVector& theta, const Batch& eval) {
    eval.validate(bb.arch);
    const Matrix logits = forward(bb, theta, eval.x).logits;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval.size(); ++i)
        if (argmax(logits.row(i)) == static_cast<std::size_t>(eval.y[i])) ++correct;
    return static_cast<double>(correct) / static_cast<double>(eval.size());
}

}  // namespace ilora
