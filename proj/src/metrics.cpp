// SPDX-License-Identifier: Apache-2.0
#include "ilora/metrics.hpp"

#include <cmath>
#include <string>

#include "ilora/error.hpp"

namespace ilora {

ResultMatrix::ResultMatrix(std::size_t tasks) : tasks_(tasks), r_(tasks, tasks) {
    require(tasks >= 1, "ResultMatrix: need at least one task");
}

ResultMatrix ResultMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    ResultMatrix out(rows.size());
    for (std::size_t t = 1; t <= rows.size(); ++t) {
        require(rows[t - 1].size() >= t, "ResultMatrix::from_rows: row " + std::to_string(t) + " too short");
        for (std::size_t j = 1; j <= t; ++j) out.set(t, j, rows[t - 1][j - 1]);
    }
    return out;
}

double ResultMatrix::at(std::size_t t, std::size_t j) const {
    require(t >= 1 && t <= tasks_ && j >= 1 && j <= t, "ResultMatrix::at: index outside the defined region");
    return r_(t - 1, j - 1);
}

void ResultMatrix::set(std::size_t t, std::size_t j, double accuracy) {
    require(t >= 1 && t <= tasks_ && j >= 1 && j <= t, "ResultMatrix::set: index outside the defined region");
    require(std::isfinite(accuracy) && accuracy >= 0.0 && accuracy <= 1.0,
            "ResultMatrix::set: accuracy must lie in [0,1]");
    r_(t - 1, j - 1) = accuracy;
}

double acc_t(const ResultMatrix& r, std::size_t t) {
    if (t < 1 || t > r.tasks()) throw Error(ErrorKind::Contract, "acc_t: t out of range");
    double sum = 0.0;
    for (std::size_t i = 1; i <= t; ++i) sum += r.at(t, i);
    return sum / static_cast<double>(t);
}

double bwt_t(const ResultMatrix& r, std::size_t t) {
    if (t < 2) throw Error(ErrorKind::Undefined, "bwt_t: backward transfer is undefined for t < 2");
    if (t > r.tasks()) throw Error(ErrorKind::Contract, "bwt_t: t out of range");
    double sum = 0.0;
    for (std::size_t j = 1; j < t; ++j) sum += r.at(t, j) - r.at(j, j);
    return sum / static_cast<double>(t - 1);
}

double general_retention(const BackboneParams& backbone, const ParamVector& theta_before,
                         const ParamVector& theta_after, const Batch& anchor_eval) {
    return predict_accuracy(backbone, theta_after, anchor_eval) -
           predict_accuracy(backbone, theta_before, anchor_eval);
}

}  // namespace ilora
