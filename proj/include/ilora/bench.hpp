// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ilora/model.hpp"
#include "ilora/numerics.hpp"

namespace ilora {

/// Generator parameters for one domain-incremental task.
struct TaskSpec {
    int task_id = 0;
    std::size_t n_train = 512;
    std::size_t n_eval = 256;
    std::size_t classes = 4;
    std::size_t input_dim = 16;
    double cluster_std = 0.5;
    double rotation_deg = 25.0;  // per task, cumulative
    double mean_shift = 0.5;     // norm of each class-conditional offset
    double class_spacing = 1.5;  // norm of each anchor class mean

    /// Coordinate planes (i, j) of every rotation applied so far, oldest first.
    std::vector<std::pair<std::size_t, std::size_t>> planes;

    void validate() const;
};

struct Task {
    Batch train;
    Batch eval;
    TaskSpec spec;
    Matrix transform;                 // cumulative rotation, input_dim × input_dim
    Matrix class_means;               // classes × input_dim, after rotation and shift
};

/// Anchor (general-knowledge) task plus the ordered continual tasks 1..T.
struct TaskStream {
    std::uint64_t seed = 0;
    Task anchor;
    std::vector<Task> tasks;
};

/// Anchor: c Gaussian clusters whose means sit at class_spacing along seeded,
/// distinct coordinate axes. Continual task t rotates the anchor distribution
/// by t cumulative Givens rotations of rotation_deg, each in a seeded
/// coordinate plane spanned by two of the class axes, then adds a seeded
/// class-conditional mean offset of norm mean_shift. Labels keep their
/// meaning across tasks. Per-task label counts differ by at most one.
TaskStream make_stream(std::uint64_t seed, std::size_t tasks, const TaskSpec& base);

/// Givens rotation by angle_rad in coordinate plane (i, j).
Matrix givens(std::size_t dim, std::size_t i, std::size_t j, double angle_rad);

/// Nearest-class-mean accuracy using the generator's own means.
double nearest_centroid_accuracy(const Matrix& class_means, const Batch& eval);

struct PretrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double lr = 5e-3;

    friend bool operator==(const PretrainConfig&, const PretrainConfig&) = default;
};

/// Full-parameter Adam training of the backbone (no adapters) on the anchor
/// task. Deterministic in (data, arch, config, seed).
BackboneParams pretrain_backbone(const Batch& anchor_train, const ArchConfig& arch, const PretrainConfig& cfg,
                                 std::uint64_t seed);

}  // namespace ilora
