// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ilora {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a · b. Accumulation runs over k ascending for every (i, j).
Matrix matmul(const Matrix& a, const Matrix& b);
/// a · bᵀ without materialising the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// aᵀ · b without materialising the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);

/// Flat vector of trainable parameters. The layout is owned by whoever
/// produced it (see ilora::AdapterLayout).
class ParamVector {
public:
    ParamVector() = default;
    explicit ParamVector(std::size_t n, double fill = 0.0) : v_(n, fill) {}
    explicit ParamVector(std::vector<double> v) : v_(std::move(v)) {}
    ParamVector(std::initializer_list<double> v) : v_(v) {}

    std::size_t size() const noexcept { return v_.size(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    double* data() noexcept { return v_.data(); }
    const double* data() const noexcept { return v_.data(); }
    std::span<double> span() noexcept { return v_; }
    std::span<const double> span() const noexcept { return v_; }
    const std::vector<double>& values() const noexcept { return v_; }
    auto begin() noexcept { return v_.begin(); }
    auto end() noexcept { return v_.end(); }
    auto begin() const noexcept { return v_.begin(); }
    auto end() const noexcept { return v_.end(); }

    bool all_finite() const noexcept;

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> v_;
};

/// Byte-level equality (distinguishes +0 from -0 and NaN payloads).
bool bit_equal(const ParamVector& a, const ParamVector& b) noexcept;
bool bit_equal(const Matrix& a, const Matrix& b) noexcept;

double dot(std::span<const double> a, std::span<const double> b);

/// xoshiro256** seeded through splitmix64.
///
/// The state after seeding is s[i] = splitmix64 applied four times to the
/// seed, in order. Each next_u64() is the reference xoshiro256** step, so the
/// stream depends only on 64-bit integer arithmetic. uniform() takes the top
/// 53 bits: (next_u64() >> 11) * 2^-53, giving a value in [0, 1).
///
/// Reference stream for seed 0 (first three next_u64 outputs) is pinned in
/// tests/test_numerics.cpp and in the README.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64() noexcept;
    /// [0, 1), 53-bit resolution.
    double uniform() noexcept;
    /// Uniform integer in [0, n), unbiased (rejection on the top of the range).
    std::uint64_t below(std::uint64_t n);
    /// One standard normal via Box–Muller; consumes two uniforms and discards
    /// the sine branch. Prefer gaussian_fill for bulk draws.
    double normal() noexcept;
    /// Derive an independent child stream (used to hand one generator per
    /// task or per seed without sharing state).
    Rng split() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

/// Fills rows×cols entries with N(mean, std²) draws. Normals are produced in
/// pairs by Box–Muller from two uniforms (u1 mapped to (0,1] as 1-uniform()),
/// cosine branch first, then sine branch. An odd entry count consumes one
/// extra pair and drops its sine value, so exactly 2·ceil(rows·cols/2)
/// uniforms are consumed.
Matrix gaussian_fill(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev);

/// Central-difference gradient (f(θ+h·eᵢ) − f(θ−h·eᵢ)) / 2h of a scalar
/// function. Throws ErrorKind::Oracle if any evaluation is non-finite.
ParamVector finite_diff_grad(const std::function<double(const ParamVector&)>& loss_fn,
                             const ParamVector& theta, double h);

}  // namespace ilora
