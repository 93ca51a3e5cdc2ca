// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "ilora/model.hpp"
#include "ilora/numerics.hpp"

namespace ilora {

/// (1−λ)·θa + λ·θb. The endpoints return the corresponding input unchanged.
ParamVector interpolate(const ParamVector& theta_a, const ParamVector& theta_b, double lambda);

/// n evenly spaced points lo + i·(hi−lo)/(n−1); the first and last are exactly lo and hi.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Accuracy along the segment θ_t → θ_{t+1}.
struct LambdaSweep {
    std::size_t transition = 0;    // t: sweep runs from θ_t to θ_{t+1}
    std::vector<double> lambda_grid;
    std::vector<double> ap;        // mean accuracy over tasks 1..t
    std::vector<double> an;        // accuracy on task t+1
    std::vector<double> aall;      // unweighted mean over tasks 1..t+1
};

/// Grid must be ascending within [0,1] and contain both 0 and 1.
void validate_lambda_grid(const std::vector<double>& grid);

LambdaSweep sweep_lambda(const ParamVector& theta_t, const ParamVector& theta_t1, const BackboneParams& backbone,
                         const std::vector<Batch>& past_evals, const Batch& new_eval,
                         const std::vector<double>& grid);

/// ‖θa − θb‖₂
double weight_distance(const ParamVector& theta_a, const ParamVector& theta_b);

/// Linear CKA on column-centred features:
/// ‖Ycᵀ Xc‖²_F / (‖Xcᵀ Xc‖_F · ‖Ycᵀ Yc‖_F).
/// Throws ErrorKind::Degenerate when either representation is constant.
double linear_cka(const Matrix& x, const Matrix& y);

/// Embedding-deviation surface around θ0 in span{d1, d2}.
struct LandscapeGrid {
    ParamVector anchor;
    ParamVector d1;
    ParamVector d2;
    std::vector<double> a;
    std::vector<double> b;
    Matrix values;  // |a| × |b|
};

/// Mean squared deviation between embed(probe; θ0 + a·d1 + b·d2) and
/// embed(probe; θ0), averaged over samples and coordinates.
double embedding_deviation(const BackboneParams& backbone, const Matrix& reference, const ParamVector& theta,
                           const Matrix& probe);

LandscapeGrid landscape_grid(const ParamVector& theta0, const ParamVector& d1, const ParamVector& d2,
                             const std::vector<double>& a_grid, const std::vector<double>& b_grid,
                             const BackboneParams& backbone, const Batch& probe);

}  // namespace ilora
