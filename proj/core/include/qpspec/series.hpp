#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include "qpspec/mat2.hpp"
#include "qpspec/weights.hpp"

namespace qpspec::algebra {

inline double value_norm(const cplx& v) { return std::abs(v); }
inline double value_norm(const Mat2& v) { return v.op_norm(); }

inline cplx value_mul(const cplx& x, const cplx& y) { return x * y; }
inline Mat2 value_mul(const Mat2& x, const Mat2& y) { return x * y; }

// Finitely supported Fourier series x -> sum_k c_k e^{i<k,x>} on the torus,
// with analyticity width h and the weighted l^1 norm
// |F|_h = sum_k |c_k| e^{h |k|_eta}.
template <class V>
class FourierSeries {
  public:
    using Map = std::map<MultiIndex, V>;

    FourierSeries() = default;
    FourierSeries(WeightScheme scheme, double width)
        : scheme_(std::move(scheme)), width_(width) {
        if (!(width_ > 0.0)) throw std::invalid_argument("FourierSeries: width must be > 0");
    }

    const WeightScheme& scheme() const { return scheme_; }
    double width() const { return width_; }
    void set_width(double h) {
        if (!(h > 0.0)) throw std::invalid_argument("FourierSeries: width must be > 0");
        width_ = h;
    }

    bool empty() const { return coef_.empty(); }
    std::size_t size() const { return coef_.size(); }
    const Map& coefficients() const { return coef_; }

    void set(const MultiIndex& k, const V& v) {
        if (int(k.size()) != scheme_.dim)
            throw std::invalid_argument("FourierSeries::set: index length != dim");
        if (value_norm(v) == 0.0)
            coef_.erase(k);
        else
            coef_[k] = v;
    }

    void add(const MultiIndex& k, const V& v) {
        auto it = coef_.find(k);
        if (it == coef_.end()) {
            if (value_norm(v) != 0.0) coef_.emplace(k, v);
        } else {
            it->second = it->second + v;
        }
    }

    V at(const MultiIndex& k) const {
        auto it = coef_.find(k);
        return it == coef_.end() ? V{} : it->second;
    }

    // |F|_h (matrix coefficients measured in operator norm).
    double norm() const {
        double n = 0.0;
        for (const auto& [k, v] : coef_)
            n += value_norm(v) * std::exp(width_ * weighted_norm(k, scheme_));
        return n;
    }

    double norm_at_width(double h) const {
        double n = 0.0;
        for (const auto& [k, v] : coef_)
            n += value_norm(v) * std::exp(h * weighted_norm(k, scheme_));
        return n;
    }

    double max_index_norm() const {
        double m = 0.0;
        for (const auto& [k, v] : coef_) m = std::max(m, weighted_norm(k, scheme_));
        return m;
    }

    FourierSeries scaled(cplx s) const {
        FourierSeries r(scheme_, width_);
        for (const auto& [k, v] : coef_) r.set(k, v * s);
        return r;
    }

    FourierSeries operator+(const FourierSeries& o) const {
        require_compatible(o);
        FourierSeries r = *this;
        for (const auto& [k, v] : o.coef_) r.add(k, v);
        r.prune();
        return r;
    }

    FourierSeries operator-(const FourierSeries& o) const {
        require_compatible(o);
        FourierSeries r = *this;
        for (const auto& [k, v] : o.coef_) r.add(k, -1.0 * v);
        r.prune();
        return r;
    }

    // Keep |k|_eta <= cut (low) or > cut (high); low + high == *this exactly.
    FourierSeries truncate_low(double cut) const {
        FourierSeries r(scheme_, width_);
        for (const auto& [k, v] : coef_)
            if (weighted_norm(k, scheme_) <= cut) r.coef_.emplace(k, v);
        return r;
    }
    FourierSeries truncate_high(double cut) const {
        FourierSeries r(scheme_, width_);
        for (const auto& [k, v] : coef_)
            if (weighted_norm(k, scheme_) > cut) r.coef_.emplace(k, v);
        return r;
    }

    // Composition with the rotation x -> x + shift (shift in radians per
    // coordinate): coefficients pick up e^{i<k, shift>}.
    FourierSeries phase_shifted(const std::vector<double>& shift) const {
        FourierSeries r(scheme_, width_);
        for (const auto& [k, v] : coef_) {
            double ang = 0.0;
            for (std::size_t j = 0; j < k.size(); ++j) ang += double(k[j]) * shift[j];
            r.coef_.emplace(k, v * std::polar(1.0, ang));
        }
        return r;
    }

    // Evaluate at a complexified torus point (y_j = Re on the torus, Im inside
    // the strip |Im x_j| < h <j>^eta).
    V evaluate(const std::vector<cplx>& x) const {
        if (int(x.size()) != scheme_.dim)
            throw std::invalid_argument("FourierSeries::evaluate: point length != dim");
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double lim = width_ * std::pow(coord_bracket(j), scheme_.eta);
            if (!(std::abs(x[j].imag()) < lim + 1e-15))
                throw std::domain_error("FourierSeries::evaluate: point outside analyticity strip");
        }
        V out{};
        for (const auto& [k, v] : coef_) {
            cplx phase = 0.0;
            for (std::size_t j = 0; j < k.size(); ++j) phase += double(k[j]) * x[j];
            out = out + v * std::exp(cplx(0.0, 1.0) * phase);
        }
        return out;
    }

    V evaluate_real(const std::vector<double>& x) const {
        std::vector<cplx> cx(x.begin(), x.end());
        return evaluate(cx);
    }

    // Support containment in a cone; returns total |coef| mass outside.
    double off_cone_mass(const ConeSpec& cone) const {
        double m = 0.0;
        for (const auto& [k, v] : coef_)
            if (!cone_contains(k, cone)) m += value_norm(v);
        return m;
    }

    double zero_mode_norm() const {
        MultiIndex z(std::size_t(scheme_.dim), 0);
        return value_norm(at(z));
    }

    void prune(double floor = 0.0) {
        for (auto it = coef_.begin(); it != coef_.end();) {
            if (value_norm(it->second) <= floor)
                it = coef_.erase(it);
            else
                ++it;
        }
    }

    void require_compatible(const FourierSeries& o) const {
        if (width_ != o.width_ || !scheme_.same_as(o.scheme_))
            throw std::invalid_argument("FourierSeries: incompatible width or weight scheme");
    }

  private:
    WeightScheme scheme_ = WeightScheme::uniform(1);
    double width_ = 1.0;
    Map coef_;
};

using ScalarSeries = FourierSeries<cplx>;
using MatSeries = FourierSeries<Mat2>;

template <class V>
struct ProductResult {
    FourierSeries<V> series;
    double dropped_mass = 0.0;  // |.|_h mass of coefficients beyond the cap
};

// Convolution product with support capped at |k|_eta <= k_cap; the dropped
// mass is reported, never silently discarded.
template <class V>
ProductResult<V> series_multiply(const FourierSeries<V>& f, const FourierSeries<V>& g,
                                 double k_cap) {
    f.require_compatible(g);
    ProductResult<V> out;
    out.series = FourierSeries<V>(f.scheme(), f.width());
    for (const auto& [k, fv] : f.coefficients()) {
        for (const auto& [n, gv] : g.coefficients()) {
            MultiIndex m = add(k, n);
            const V prod = value_mul(fv, gv);
            if (weighted_norm(m, f.scheme()) <= k_cap + 1e-12) {
                out.series.add(m, prod);
            } else {
                out.dropped_mass +=
                    value_norm(prod) * std::exp(f.width() * weighted_norm(m, f.scheme()));
            }
        }
    }
    out.series.prune();
    return out;
}

inline MatSeries commutator(const MatSeries& f, const MatSeries& g, double k_cap,
                            double* dropped = nullptr) {
    auto fg = series_multiply(f, g, k_cap);
    auto gf = series_multiply(g, f, k_cap);
    if (dropped) *dropped = fg.dropped_mass + gf.dropped_mass;
    return fg.series - gf.series;
}

// Conjugate every coefficient by a constant matrix: k-th coefficient becomes
// C^{-1} c_k C.
inline MatSeries conjugate_coefficients(const MatSeries& f, const Mat2& c) {
    const Mat2 cinv = c.inverse();
    MatSeries r(f.scheme(), f.width());
    for (const auto& [k, v] : f.coefficients()) r.set(k, cinv * v * c);
    return r;
}

}  // namespace qpspec::algebra
