#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qpspec::algebra {

// Integer frequency vector k in Z^d.
using MultiIndex = std::vector<int>;

inline bool is_zero(const MultiIndex& k) {
    for (int v : k)
        if (v != 0) return false;
    return true;
}

inline MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

inline MultiIndex negate(const MultiIndex& k) {
    MultiIndex r(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) r[j] = -k[j];
    return r;
}

// Coordinate weight <j> = max{1, j}, coordinates indexed j = 0..d-1.
inline double coord_bracket(std::size_t j) { return j <= 1 ? 1.0 : double(j); }

// Weighted norm |k|_eta = sum_j <j>^eta |k_j| and cone data.
struct WeightScheme {
    int dim = 1;
    double eta = 1.0;
    std::vector<double> weights;  // w_j > 0, sum w_j = 1

    static WeightScheme uniform(int d, double eta_ = 1.0) {
        WeightScheme s;
        s.dim = d;
        s.eta = eta_;
        s.weights.assign(std::size_t(d), 1.0 / double(d));
        return s;
    }

    void validate() const {
        if (dim < 1) throw std::invalid_argument("WeightScheme: dim must be positive");
        if (!(eta > 0.0)) throw std::invalid_argument("WeightScheme: eta must be > 0");
        if (int(weights.size()) != dim)
            throw std::invalid_argument("WeightScheme: weights length != dim");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w > 0.0)) throw std::invalid_argument("WeightScheme: weights must be > 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-14)
            throw std::invalid_argument("WeightScheme: weights must sum to 1");
    }

    bool same_as(const WeightScheme& o) const {
        if (dim != o.dim || eta != o.eta) return false;
        for (int j = 0; j < dim; ++j)
            if (weights[std::size_t(j)] != o.weights[std::size_t(j)]) return false;
        return true;
    }
};

inline double weighted_norm(const MultiIndex& k, const WeightScheme& s) {
    if (int(k.size()) != s.dim)
        throw std::invalid_argument("weighted_norm: index length != scheme dim");
    double n = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
        n += std::pow(coord_bracket(j), s.eta) * std::abs(double(k[j]));
    return n;
}

// Integer cone Gamma_r: k != 0 with [[k]] >= r |k|_eta, where
// [[k]] = sum_j <j>^eta k_j w_j.
struct ConeSpec {
    double aperture = 1.0;  // r in (0, 1]
    WeightScheme scheme;

    void validate() const {
        scheme.validate();
        if (!(aperture > 0.0 && aperture <= 1.0))
            throw std::invalid_argument("ConeSpec: aperture must be in (0, 1]");
    }
};

inline double cone_value(const MultiIndex& k, const ConeSpec& c) {
    double v = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j)
        v += std::pow(coord_bracket(j), c.scheme.eta) * double(k[j]) * c.scheme.weights[j];
    return v;
}

inline bool cone_contains(const MultiIndex& k, const ConeSpec& c) {
    if (is_zero(k)) return false;
    return cone_value(k, c) >= c.aperture * weighted_norm(k, c.scheme) - 1e-12;
}

// Visit every k != 0 with |k|_eta <= bound (optionally restricted to a cone).
// Deterministic lexicographic order.
void for_each_index(const WeightScheme& s, double bound,
                    const std::function<void(const MultiIndex&)>& fn,
                    const ConeSpec* cone = nullptr, bool include_zero = false);

}  // namespace qpspec::algebra
