#include "qpspec/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpspec::algebra {

TorusGrid::TorusGrid(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("TorusGrid: empty size list");
    for (int m : sizes_) {
        if (m < 1) throw std::invalid_argument("TorusGrid: sizes must be >= 1");
        total_ *= std::size_t(m);
    }
}

std::vector<double> TorusGrid::point(std::size_t flat) const {
    std::vector<double> x(sizes_.size());
    for (std::size_t j = sizes_.size(); j-- > 0;) {
        const int m = sizes_[j];
        x[j] = 2.0 * std::numbers::pi * double(flat % std::size_t(m)) / double(m);
        flat /= std::size_t(m);
    }
    return x;
}

std::vector<int> TorusGrid::coords(std::size_t flat) const {
    std::vector<int> g(sizes_.size());
    for (std::size_t j = sizes_.size(); j-- > 0;) {
        const int m = sizes_[j];
        g[j] = int(flat % std::size_t(m));
        flat /= std::size_t(m);
    }
    return g;
}

TorusGrid TorusGrid::for_support(const std::vector<MultiIndex>& support, int dim) {
    std::vector<int> maxk(std::size_t(dim), 0);
    for (const auto& k : support)
        for (int j = 0; j < dim; ++j)
            maxk[std::size_t(j)] = std::max(maxk[std::size_t(j)], std::abs(k[std::size_t(j)]));
    std::vector<int> sizes(std::size_t(dim), 0);
    for (int j = 0; j < dim; ++j) sizes[std::size_t(j)] = 2 * maxk[std::size_t(j)] + 3;
    return TorusGrid(sizes);
}

std::vector<MultiIndex> index_ball(const WeightScheme& scheme, double bound,
                                   bool include_zero) {
    std::vector<MultiIndex> out;
    for_each_index(
        scheme, bound, [&](const MultiIndex& k) { out.push_back(k); }, nullptr,
        include_zero);
    return out;
}

namespace detail {

PhaseTable::PhaseTable(const TorusGrid& grid) {
    roots.resize(grid.sizes().size());
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const int m = grid.sizes()[j];
        roots[j].resize(std::size_t(m));
        for (int r = 0; r < m; ++r)
            roots[j][std::size_t(r)] =
                std::polar(1.0, 2.0 * std::numbers::pi * double(r) / double(m));
    }
}

cplx PhaseTable::forward(const TorusGrid& grid, const std::vector<int>& g,
                         const MultiIndex& k) const {
    cplx p = 1.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const int m = grid.sizes()[j];
        long r = (long(g[j]) * long(k[j])) % m;
        if (r < 0) r += m;
        p *= roots[j][std::size_t(r)];
    }
    return p;
}

}  // namespace detail

}  // namespace qpspec::algebra
