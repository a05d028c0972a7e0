#pragma once

#include "eitmech/errors.hpp"

#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace eitmech {

struct SweepAxis {
    std::string key; // config key path, e.g. "mirror.omega_m_mhz"
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    bool log_spaced = false;

    double value(int i) const;
};

enum class SweepKind { analytic, hierarchy, coupled };

struct SweepGrid {
    std::vector<SweepAxis> axes; // 1 or 2
    SweepKind kind = SweepKind::analytic;

    void validate() const;
    size_t cell_count() const;
    // Row-major: cell = i0 * axes[1].count + i1 (or just i0 for one axis).
    std::pair<int, int> cell_indices(size_t cell) const;
};

// Evaluates `eval(cell)` for every cell over `jobs` worker threads. Results
// land in a slot per cell, so output order equals serial order and the bytes
// downstream never depend on the worker count. The first failing cell (lowest
// index) aborts the sweep with its indices in the message.
template <typename Result>
std::vector<Result> sweep_run(size_t n_cells, int jobs,
                              const std::function<Result(size_t)>& eval) {
    if (n_cells == 0) throw ValidationError("sweep: empty grid");
    if (jobs < 1) jobs = 1;
    std::vector<Result> results(n_cells);
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::optional<std::pair<size_t, std::string>> first_error;

    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= n_cells) return;
            try {
                results[i] = eval(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error || i < first_error->first)
                    first_error = {i, e.what()};
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(jobs));
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error)
        throw NumericalError("sweep: cell " + std::to_string(first_error->first) + " failed: " +
                             first_error->second);
    return results;
}

} // namespace eitmech
