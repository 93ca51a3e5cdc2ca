// SPDX-License-Identifier: Apache-2.0
#include "ilora/numerics.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "ilora/error.hpp"

namespace ilora {

namespace {

void check_finite(const Matrix& m, const char* op) {
    if (!m.all_finite()) throw Error(ErrorKind::Numeric, std::string(op) + ": non-finite result");
}

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Contract: return "contract";
        case ErrorKind::Config: return "config";
        case ErrorKind::Missing: return "missing_artifact";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Degenerate: return "degenerate_input";
        case ErrorKind::Undefined: return "undefined_metric";
        case ErrorKind::Oracle: return "oracle_failure";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows * cols, "Matrix: data length must equal rows*cols");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        require(row.size() == c, "Matrix::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const noexcept {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul: dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    }
    check_finite(out, "matmul");
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt: dimension mismatch");
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ar = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto br = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += ar[k] * br[k];
            out(i, j) = acc;
        }
    }
    check_finite(out, "matmul_nt");
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
    Matrix out(a.cols(), b.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
            out(i, j) = acc;
        }
    }
    check_finite(out, "matmul_tn");
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double x : a.values()) s += x * x;
    return std::sqrt(s);
}

bool ParamVector::all_finite() const noexcept {
    for (double x : v_)
        if (!std::isfinite(x)) return false;
    return true;
}

bool bit_equal(const ParamVector& a, const ParamVector& b) noexcept {
    return a.size() == b.size() &&
           (a.size() == 0 || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bit_equal(const Matrix& a, const Matrix& b) noexcept {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 ||
            std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0);
}

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
    require(n > 0, "Rng::below: empty range");
    // Largest multiple of n that fits; draws at or above it are rejected.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() noexcept {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split() noexcept { return Rng(next_u64()); }

Matrix gaussian_fill(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev) {
    require(stddev >= 0.0, "gaussian_fill: std must be non-negative");
    Matrix out(rows, cols);
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); i += 2) {
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        v[i] = mean + stddev * (r * std::cos(angle));
        if (i + 1 < v.size()) v[i + 1] = mean + stddev * (r * std::sin(angle));
    }
    return out;
}

ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& loss_fn,
                             const ParamVector& theta, double h) {
    require(h > 0.0, "finite_diff_grad: step must be positive");
    ParamVector grad(theta.size());
    ParamVector probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const double up = loss_fn(probe);
        probe[i] = theta[i] - h;
        const double down = loss_fn(probe);
        probe[i] = theta[i];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw Error(ErrorKind::Oracle, "finite_diff_grad: non-finite loss at coordinate " +
                                               std::to_string(i));
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace ilora
