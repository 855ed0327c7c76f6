#include "qpspec/weights.hpp"

namespace qpspec::algebra {

namespace {

void recurse(const WeightScheme& s, double bound, MultiIndex& k, std::size_t axis,
             double used, const std::function<void(const MultiIndex&)>& fn,
             const ConeSpec* cone, bool include_zero) {
    if (axis == k.size()) {
        if (!include_zero && is_zero(k)) return;
        if (cone && !cone_contains(k, *cone)) return;
        fn(k);
        return;
    }
    const double wj = std::pow(coord_bracket(axis), s.eta);
    const int cap = int(std::floor((bound - used) / wj + 1e-12));
    for (int v = -cap; v <= cap; ++v) {
        k[axis] = v;
        recurse(s, bound, k, axis + 1, used + wj * std::abs(double(v)), fn, cone,
                include_zero);
    }
    k[axis] = 0;
}

}  // namespace

void for_each_index(const WeightScheme& s, double bound,
                    const std::function<void(const MultiIndex&)>& fn,
                    const ConeSpec* cone, bool include_zero) {
    if (bound < 0.0) return;
    MultiIndex k(std::size_t(s.dim), 0);
    recurse(s, bound, k, 0, 0.0, fn, cone, include_zero);
}

}  // namespace qpspec::algebra
