// SPDX-License-Identifier: Apache-2.0
#include "ilora/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ilora/error.hpp"

namespace ilora {

ReplayBuffer::ReplayBuffer(double rho, bool stratified) : rho_(rho), stratified_(stratified) {
    require(rho >= 0.0 && rho <= 1.0, "ReplayBuffer: rho must lie in [0,1]");
}

std::size_t ReplayBuffer::retained_count(double rho, std::size_t n) {
    if (n == 0 || rho <= 0.0) return 0;
    auto k = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n) + 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

void ReplayBuffer::ingest_task(const Batch& task_data, int task_id, Rng& rng) {
    for (const Store& s : stores_)
        require(s.task_id != task_id, "ReplayBuffer: task " + std::to_string(task_id) + " already ingested");

    const std::size_t n = task_data.size();
    const std::size_t k = retained_count(rho_, n);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (k < n) {
        // Partial Fisher–Yates: the first k slots become the sample.
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(rows[i], rows[j]);
        }
        rows.resize(k);
        std::sort(rows.begin(), rows.end());
    }
    Store store{select_rows(task_data, rows), task_id, std::move(rows)};
    stores_.push_back(std::move(store));
}

std::size_t ReplayBuffer::size() const noexcept {
    std::size_t total = 0;
    for (const Store& s : stores_) total += s.data.size();
    return total;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    const std::size_t total = size();
    if (total == 0) throw Error(ErrorKind::Contract, "ReplayBuffer::sample: buffer is empty");
    require(batch_size > 0, "ReplayBuffer::sample: batch_size must be positive");

    std::vector<const Store*> nonempty;
    for (const Store& s : stores_)
        if (!s.data.empty()) nonempty.push_back(&s);

    const std::size_t cols = nonempty.front()->data.x.cols();
    Batch out{Matrix(batch_size, cols), std::vector<int>(batch_size)};
    for (std::size_t i = 0; i < batch_size; ++i) {
        const Store* store = nullptr;
        std::size_t row = 0;
        if (stratified_) {
            store = nonempty[rng.below(nonempty.size())];
            row = rng.below(store->data.size());
        } else {
            std::size_t idx = rng.below(total);
            for (const Store* s : nonempty) {
                if (idx < s->data.size()) {
                    store = s;
                    row = idx;
                    break;
                }
                idx -= s->data.size();
            }
        }
        const auto src = store->data.x.row(row);
        std::copy(src.begin(), src.end(), out.x.row(i).begin());
        out.y[i] = store->data.y[row];
    }
    return out;
}

Batch ReplayBuffer::all() const {
    Batch out;
    for (const Store& s : stores_) out = concat(out, s.data);
    return out;
}

}  // namespace ilora
