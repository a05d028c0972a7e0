#include "eitmech/sweep.hpp"

#include <cmath>

namespace eitmech {

double SweepAxis::value(int i) const {
    if (count < 2) throw ValidationError("sweep axis '" + key + "': count must be >= 2");
    const double f = static_cast<double>(i) / (count - 1);
    if (log_spaced) return lo * std::pow(hi / lo, f);
    return lo + (hi - lo) * f;
}

void SweepGrid::validate() const {
    if (axes.empty() || axes.size() > 2)
        throw ValidationError("sweep grid: need 1 or 2 axes");
    for (const auto& ax : axes) {
        if (ax.count < 2)
            throw ValidationError("sweep axis '" + ax.key + "': count must be >= 2");
        if (ax.log_spaced && !(ax.lo > 0.0 && ax.hi > 0.0))
            throw ValidationError("sweep axis '" + ax.key + "': log spacing needs positive bounds");
        if (ax.key.find('.') == std::string::npos)
            throw ValidationError("sweep axis '" + ax.key + "': key must be section.key");
    }
}

size_t SweepGrid::cell_count() const {
    size_t n = 1;
    for (const auto& ax : axes) n *= static_cast<size_t>(ax.count);
    return n;
}

std::pair<int, int> SweepGrid::cell_indices(size_t cell) const {
    if (axes.size() == 1) return {static_cast<int>(cell), 0};
    const int inner = axes[1].count;
    return {static_cast<int>(cell / inner), static_cast<int>(cell % inner)};
}

} // namespace eitmech
