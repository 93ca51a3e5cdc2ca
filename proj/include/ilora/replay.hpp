// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "ilora/model.hpp"
#include "ilora/numerics.hpp"

namespace ilora {

/// Episodic memory: a per-task subset of raw training rows.
class ReplayBuffer {
public:
    struct Store {
        Batch data;
        int task_id = 0;
        std::vector<std::size_t> source_rows;  // row indices into the ingested task, ascending
    };

    explicit ReplayBuffer(double rho = 0.1, bool stratified = false);

    /// Number of rows retained from a task of n rows: floor(rho·n), raised to
    /// 1 when rho > 0 and n > 0.
    static std::size_t retained_count(double rho, std::size_t n);

    /// Stores a uniform without-replacement sample of floor(rho·n) rows,
    /// kept in their original order. Throws on a repeated task_id.
    void ingest_task(const Batch& task_data, int task_id, Rng& rng);

    /// batch_size rows drawn with replacement. Uniform over the union of all
    /// stored rows, or, in stratified mode, task first then row.
    Batch sample(std::size_t batch_size, Rng& rng) const;

    /// All stored rows, tasks in ingestion order.
    Batch all() const;

    std::size_t size() const noexcept;
    bool empty() const noexcept { return size() == 0; }
    double rho() const noexcept { return rho_; }
    bool stratified() const noexcept { return stratified_; }
    const std::vector<Store>& stores() const noexcept { return stores_; }

private:
    double rho_;
    bool stratified_;
    std::vector<Store> stores_;
};

}  // namespace ilora
