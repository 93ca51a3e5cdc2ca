// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "ilora/model.hpp"
#include "ilora/numerics.hpp"

namespace ilora {

/// R[t][j]: accuracy on task j after training through task t (both 1-based,
/// j ≤ t). Entries above the diagonal are storage only and never read.
class ResultMatrix {
public:
    explicit ResultMatrix(std::size_t tasks);
    /// Builds from full rows; only the lower triangle is taken.
    static ResultMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t tasks() const noexcept { return tasks_; }
    double at(std::size_t t, std::size_t j) const;
    void set(std::size_t t, std::size_t j, double accuracy);

    friend bool operator==(const ResultMatrix&, const ResultMatrix&) = default;

private:
    std::size_t tasks_;
    Matrix r_;
};

/// Average accuracy over the t learned tasks, (1/t)·Σ_{i≤t} R[t][i].
double acc_t(const ResultMatrix& r, std::size_t t);

/// Backward transfer, (1/(t−1))·Σ_{j<t} (R[t][j] − R[j][j]). Undefined for t < 2.
double bwt_t(const ResultMatrix& r, std::size_t t);

/// accuracy(θ_after) − accuracy(θ_before) on a held-out anchor task.
double general_retention(const BackboneParams& backbone, const ParamVector& theta_before,
                         const ParamVector& theta_after, const Batch& anchor_eval);

}  // namespace ilora
