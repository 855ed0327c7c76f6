#include "qpspec/mat2.hpp"

#include <stdexcept>

namespace qpspec::algebra {

namespace {

// cosh(mu) and sinh(mu)/mu, stable for small |mu|.
void cosh_sinhc(cplx mu2, cplx& ch, cplx& shc) {
    const cplx mu = std::sqrt(mu2);
    if (std::abs(mu) < 1e-4) {
        // cosh = 1 + mu^2/2 + mu^4/24; sinh(mu)/mu = 1 + mu^2/6 + mu^4/120
        ch = 1.0 + mu2 * (0.5 + mu2 / 24.0);
        shc = 1.0 + mu2 * (1.0 / 6.0 + mu2 / 120.0);
    } else {
        ch = std::cosh(mu);
        shc = std::sinh(mu) / mu;
    }
}

}  // namespace

Mat2 mat_exp_traceless(const Mat2& f) {
    if (std::abs(f.trace()) > 1e-9)
        throw std::invalid_argument("mat_exp_traceless: matrix is not traceless");
    const cplx mu2 = -f.det();  // mu^2
    cplx ch, shc;
    cosh_sinhc(mu2, ch, shc);
    return {ch + shc * f.a, shc * f.b, shc * f.c, ch + shc * f.d};
}

Mat2 mat_log_near_identity(const Mat2& m) {
    const Mat2 dev{m.a - 1.0, m.b, m.c, m.d - 1.0};
    if (dev.op_norm() >= 0.5)
        throw std::invalid_argument("mat_log_near_identity: matrix too far from identity");
    const cplx w = 0.5 * m.trace();  // cosh(mu)
    // Principal branch: mu = log(w + sqrt(w^2 - 1)); even in mu, so either
    // sqrt branch gives the same result below.
    const cplx mu = std::log(w + std::sqrt(w * w - 1.0));
    cplx ratio;  // mu / sinh(mu)
    if (std::abs(mu) < 1e-4) {
        const cplx mu2 = mu * mu;
        ratio = 1.0 - mu2 * (1.0 / 6.0) + mu2 * mu2 * (7.0 / 360.0);
    } else {
        ratio = mu / std::sinh(mu);
    }
    Mat2 l{(m.a - w) * ratio, m.b * ratio, m.c * ratio, (m.d - w) * ratio};
    // Project onto trace zero; drops only rounding residue.
    const cplx half_tr = 0.5 * l.trace();
    l.a -= half_tr;
    l.d -= half_tr;
    return l;
}

}  // namespace qpspec::algebra
