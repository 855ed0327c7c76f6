#pragma once

#include <functional>
#include <vector>

#include "qpspec/series.hpp"

namespace qpspec::algebra {

// Uniform sampling grid on [0, 2pi)^d: point g has x_j = 2pi g_j / M_j.
class TorusGrid {
  public:
    explicit TorusGrid(std::vector<int> sizes);

    int dim() const { return int(sizes_.size()); }
    const std::vector<int>& sizes() const { return sizes_; }
    std::size_t total() const { return total_; }

    std::vector<double> point(std::size_t flat) const;
    std::vector<int> coords(std::size_t flat) const;

    // Grid big enough to resolve every index in `support` exactly
    // (M_j >= 2 max|k_j| + 3).
    static TorusGrid for_support(const std::vector<MultiIndex>& support, int dim);

  private:
    std::vector<int> sizes_;
    std::size_t total_ = 1;
};

// All indices with |k|_eta <= bound (plus the zero mode), lexicographic.
std::vector<MultiIndex> index_ball(const WeightScheme& scheme, double bound,
                                   bool include_zero = true);

template <class V>
std::vector<V> sample_on_grid(const TorusGrid& grid,
                              const std::function<V(const std::vector<double>&)>& fn) {
    std::vector<V> out(grid.total());
    for (std::size_t g = 0; g < grid.total(); ++g) out[g] = fn(grid.point(g));
    return out;
}

template <class V>
struct GridRecovery {
    FourierSeries<V> series;
    double residual = 0.0;  // max |reconstruction - sample| over the grid
};

namespace detail {

// Table of e^{+-i 2pi (g k mod M) / M} per axis; exact modular phases.
struct PhaseTable {
    std::vector<std::vector<cplx>> roots;  // roots[j][r] = e^{i 2pi r / M_j}
    explicit PhaseTable(const TorusGrid& grid);
    cplx forward(const TorusGrid& grid, const std::vector<int>& g,
                 const MultiIndex& k) const;  // e^{+i<k,x_g>}
};

}  // namespace detail

// Discrete Fourier coefficients restricted to a declared support. The grid
// must satisfy M_j >= 2 max|k_j| + 1 over the support; content outside the
// support aliases and is reported through `residual`.
template <class V>
GridRecovery<V> coefficients_from_grid(const std::vector<V>& samples, const TorusGrid& grid,
                                       const std::vector<MultiIndex>& support,
                                       const WeightScheme& scheme, double width) {
    if (samples.size() != grid.total())
        throw std::invalid_argument("coefficients_from_grid: sample count != grid size");
    for (const auto& k : support)
        for (std::size_t j = 0; j < k.size(); ++j)
            if (2 * std::abs(k[j]) + 1 > grid.sizes()[j])
                throw std::invalid_argument("coefficients_from_grid: grid resolution too low");

    detail::PhaseTable table(grid);
    GridRecovery<V> out;
    out.series = FourierSeries<V>(scheme, width);
    const double inv_total = 1.0 / double(grid.total());
    std::vector<std::vector<int>> gcoords(grid.total());
    for (std::size_t g = 0; g < grid.total(); ++g) gcoords[g] = grid.coords(g);

    for (const auto& k : support) {
        V acc{};
        for (std::size_t g = 0; g < grid.total(); ++g)
            acc = acc + samples[g] * std::conj(table.forward(grid, gcoords[g], k));
        out.series.set(k, acc * inv_total);
    }

    for (std::size_t g = 0; g < grid.total(); ++g) {
        V recon{};
        for (const auto& [k, v] : out.series.coefficients())
            recon = recon + v * table.forward(grid, gcoords[g], k);
        out.residual = std::max(out.residual, value_norm(recon - samples[g]));
    }
    return out;
}

// Exact sampling of a series on the grid through the modular phase table.
template <class V>
std::vector<V> series_grid_values(const FourierSeries<V>& f, const TorusGrid& grid,
                                  const detail::PhaseTable& table) {
    std::vector<V> out(grid.total(), V{});
    for (std::size_t g = 0; g < grid.total(); ++g) {
        const auto gc = grid.coords(g);
        V acc{};
        for (const auto& [k, v] : f.coefficients())
            acc = acc + v * table.forward(grid, gc, k);
        out[g] = acc;
    }
    return out;
}

}  // namespace qpspec::algebra
