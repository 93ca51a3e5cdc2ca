// SPDX-License-Identifier: Apache-2.0
#include "ilora/connectivity.hpp"

#include <cmath>

#include "ilora/error.hpp"

namespace ilora {

namespace {

Matrix center_columns(const Matrix& m) {
    Matrix out = m;
    const double inv = 1.0 / static_cast<double>(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
        mean *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) -= mean;
    }
    return out;
}

}  // namespace

ParamVector interpolate(const ParamVector& theta_a, const ParamVector& theta_b, double lambda) {
    require(theta_a.size() == theta_b.size(), "interpolate: layout mismatch");
    require(lambda >= 0.0 && lambda <= 1.0, "interpolate: lambda must lie in [0,1]");
    if (lambda == 0.0) return theta_a;
    if (lambda == 1.0) return theta_b;
    ParamVector out(theta_a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - lambda) * theta_a[i] + lambda * theta_b[i];
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    require(n >= 2, "linspace: need at least two points");
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    out.back() = hi;
    return out;
}

void validate_lambda_grid(const std::vector<double>& grid) {
    require(grid.size() >= 2, "lambda grid: need at least two points");
    require(grid.front() == 0.0 && grid.back() == 1.0, "lambda grid: must start at 0 and end at 1");
    for (std::size_t i = 1; i < grid.size(); ++i) require(grid[i] > grid[i - 1], "lambda grid: must be ascending");
}

LambdaSweep sweep_lambda(const ParamVector& theta_t, const ParamVector& theta_t1, const BackboneParams& backbone,
                         const std::vector<Batch>& past_evals, const Batch& new_eval,
                         const std::vector<double>& grid) {
    validate_lambda_grid(grid);
    require(!past_evals.empty(), "sweep_lambda: need at least one past task");
    LambdaSweep sweep;
    sweep.transition = past_evals.size();
    sweep.lambda_grid = grid;
    const double t = static_cast<double>(past_evals.size());
    for (double lambda : grid) {
        const ParamVector theta = interpolate(theta_t, theta_t1, lambda);
        double past_sum = 0.0;
        for (const Batch& e : past_evals) past_sum += predict_accuracy(backbone, theta, e);
        const double an = predict_accuracy(backbone, theta, new_eval);
        sweep.ap.push_back(past_sum / t);
        sweep.an.push_back(an);
        sweep.aall.push_back((past_sum + an) / (t + 1.0));
    }
    return sweep;
}

double weight_distance(const ParamVector& theta_a, const ParamVector& theta_b) {
    require(theta_a.size() == theta_b.size(), "weight_distance: layout mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < theta_a.size(); ++i) {
        const double d = theta_a[i] - theta_b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double linear_cka(const Matrix& x, const Matrix& y) {
    require(x.rows() == y.rows(), "linear_cka: sample counts differ");
    require(x.rows() >= 2, "linear_cka: need at least two samples");
    const Matrix xc = center_columns(x);
    const Matrix yc = center_columns(y);
    const double xx = frobenius_norm(matmul_tn(xc, xc));
    const double yy = frobenius_norm(matmul_tn(yc, yc));
    if (!(xx > 0.0) || !(yy > 0.0))
        throw Error(ErrorKind::Degenerate, "linear_cka: constant representation has no centred variance");
    const double yx = frobenius_norm(matmul_tn(yc, xc));
    return (yx * yx) / (xx * yy);
}

double embedding_deviation(const BackboneParams& backbone, const Matrix& reference, const ParamVector& theta,
                           const Matrix& probe) {
    const Matrix z = embed(backbone, theta, probe);
    require(z.rows() == reference.rows() && z.cols() == reference.cols(), "embedding_deviation: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = z.values()[i] - reference.values()[i];
        s += d * d;
    }
    return s / static_cast<double>(z.size());
}

LandscapeGrid landscape_grid(const ParamVector& theta0, const ParamVector& d1, const ParamVector& d2,
                             const std::vector<double>& a_grid, const std::vector<double>& b_grid,
                             const BackboneParams& backbone, const Batch& probe) {
    require(theta0.size() == d1.size() && theta0.size() == d2.size(), "landscape_grid: layout mismatch");
    require(!probe.empty(), "landscape_grid: probe must be nonempty");
    require(!a_grid.empty() && !b_grid.empty(), "landscape_grid: empty coefficient grid");

    LandscapeGrid out{theta0, d1, d2, a_grid, b_grid, Matrix(a_grid.size(), b_grid.size())};
    const Matrix reference = embed(backbone, theta0, probe.x);
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        for (std::size_t j = 0; j < b_grid.size(); ++j) {
            if (a_grid[i] == 0.0 && b_grid[j] == 0.0) {
                out.values(i, j) = 0.0;  // θ0 itself
                continue;
            }
            ParamVector theta(theta0.size());
            for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = theta0[k] + a_grid[i] * d1[k] + b_grid[j] * d2[k];
            out.values(i, j) = embedding_deviation(backbone, reference, theta, probe.x);
        }
    }
    return out;
}

}  // namespace ilora
