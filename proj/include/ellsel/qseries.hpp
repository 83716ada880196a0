// Infinite q-products, the theta function and the Ruijsenaars elliptic gamma
// function with certified truncation.
//
// Conventions:
//
//   (u;q)_inf   = prod_{k>=0} (1 - q^k u)
//   (u;p,q)_inf = prod_{mu,nu>=0} (1 - p^mu q^nu u)
//   theta(u;p)  = (u;p)_inf (p/u;p)_inf
//   Gamma(u;p,q) = (pq/u;p,q)_inf / (u;p,q)_inf
//
// so that Gamma(qu) = theta(u;p) Gamma(u) and Gamma(pq/u) Gamma(u) = 1.
//
// Every truncated product keeps a factor (1 - c u) iff |c u| >= tau and
// reports the analytic bound sum_{excluded} |c u| on the neglected tail, which
// also bounds the error of the logarithm of the product (up to a factor
// 1/(1 - tail)).

#ifndef ELLSEL_QSERIES_HPP
#define ELLSEL_QSERIES_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "errors.hpp"

namespace ellsel
{

using cplx = std::complex<double>;

/// The pair of elliptic nomes. Either may be zero; neither may reach modulus 1.
struct Nomes {
    cplx p;
    cplx q;

    void validate() const
    {
        if (!(std::abs(p) < 1.0) || !(std::abs(q) < 1.0)) {
            throw domain_error("nomes must satisfy |p| < 1 and |q| < 1");
        }
    }
};

struct TruncationPolicy {
    /// Bound on the neglected sum of |c u| over excluded factors.
    double tail_tol = 1e-17;
    /// Cap on each product index.
    int max_terms = 10000;

    void validate() const
    {
        if (!(tail_tol > 0.0) || max_terms < 1) {
            throw domain_error("truncation policy requires tail_tol > 0 and max_terms >= 1");
        }
    }
};

/// A truncated product together with its certified tail bound.
struct ProductResult {
    cplx value{1.0, 0.0};
    double tail_bound = 0.0;
    int factors = 0;
};

/// Relative distance |u - pole| / |pole| below which an elliptic gamma
/// argument is treated as sitting on a pole.
inline constexpr double pole_tolerance = 1e-12;

namespace detail
{

enum class on_zero { exact_zero, pole };

// Plain real arithmetic; avoids the NaN-recovery path of operator* for
// std::complex in the inner loops.
inline void mul_one_minus(double &ar, double &ai, double xr, double xi)
{
    const double fr = 1.0 - xr;
    const double fi = -xi;
    const double r = ar * fr - ai * fi;
    ai = ar * fi + ai * fr;
    ar = r;
}

inline bool is_exact_one(double xr, double xi)
{
    constexpr double eps = 4.0 * std::numeric_limits<double>::epsilon();
    return std::abs(1.0 - xr) <= eps && std::abs(xi) <= eps;
}

inline ProductResult single_product(cplx u, cplx q, const TruncationPolicy &policy, on_zero mode)
{
    ProductResult out;
    const double au = std::abs(u);
    if (au == 0.0) {
        return out;
    }
    const double aq = std::abs(q);
    double ar = 1.0, ai = 0.0;
    double xr = u.real(), xi = u.imag();
    const double qr = q.real(), qi = q.imag();
    double mag = au;
    int k = 0;
    // Stop as soon as the remaining geometric tail |x| / (1 - |q|) is small enough.
    while (mag / (1.0 - aq) > policy.tail_tol) {
        if (k >= policy.max_terms) {
            throw truncation_error("q-Pochhammer product: max_terms reached before the tail bound",
                                   mag / (1.0 - aq));
        }
        if (is_exact_one(xr, xi)) {
            if (mode == on_zero::pole) {
                throw pole_error("elliptic gamma argument on a pole", 0, k);
            }
            out.value = cplx(0.0, 0.0);
            out.factors = k + 1;
            return out;
        }
        if (mode == on_zero::pole && std::hypot(1.0 - xr, xi) < pole_tolerance) {
            throw pole_error("elliptic gamma argument within pole tolerance", 0, k);
        }
        mul_one_minus(ar, ai, xr, xi);
        ++k;
        if (aq == 0.0) {
            mag = 0.0;
            break;
        }
        const double nr = xr * qr - xi * qi;
        xi = xr * qi + xi * qr;
        xr = nr;
        mag *= aq;
    }
    out.value = cplx(ar, ai);
    out.tail_bound = mag / (1.0 - aq);
    out.factors = k;
    return out;
}

inline ProductResult double_product(cplx u, cplx p, cplx q, const TruncationPolicy &policy, on_zero mode)
{
    ProductResult out;
    const double au = std::abs(u);
    if (au == 0.0) {
        return out;
    }
    const double ap = std::abs(p), aq = std::abs(q);
    const double sq = 1.0 - aq;
    const double spq = (1.0 - ap) * (1.0 - aq);

    // tau = tail_tol / (expected number of tail contributions): one per row
    // plus the block of rows that is dropped entirely.
    double rows = 1.0;
    if (ap > 0.0 && au > policy.tail_tol) {
        rows += std::ceil(std::log(policy.tail_tol / au) / std::log(ap));
    }
    double tau = policy.tail_tol / (rows / sq + 1.0 / spq);

    for (int attempt = 0; attempt < 8; ++attempt, tau *= 0.1) {
        double ar = 1.0, ai = 0.0;
        double tail = 0.0;
        int factors = 0;
        double rr = u.real(), ri = u.imag();
        double rowmag = au;
        for (int mu = 0;; ++mu) {
            if (rowmag < tau) {
                tail += rowmag / spq;
                break;
            }
            if (mu >= policy.max_terms) {
                throw truncation_error("double q-product: max_terms reached in p-direction", tail + rowmag / spq);
            }
            double xr = rr, xi = ri, mag = rowmag;
            int nu = 0;
            while (mag >= tau) {
                if (nu >= policy.max_terms) {
                    throw truncation_error("double q-product: max_terms reached in q-direction", tail + mag / sq);
                }
                if (is_exact_one(xr, xi)) {
                    if (mode == on_zero::pole) {
                        throw pole_error("elliptic gamma argument on a pole", mu, nu);
                    }
                    out.value = cplx(0.0, 0.0);
                    out.factors = factors + 1;
                    return out;
                }
                if (mode == on_zero::pole && std::hypot(1.0 - xr, xi) < pole_tolerance) {
                    throw pole_error("elliptic gamma argument within pole tolerance", mu, nu);
                }
                mul_one_minus(ar, ai, xr, xi);
                ++factors;
                ++nu;
                if (aq == 0.0) {
                    mag = 0.0;
                    break;
                }
                const double nr = xr * q.real() - xi * q.imag();
                xi = xr * q.imag() + xi * q.real();
                xr = nr;
                mag *= aq;
            }
            tail += mag / sq;
            if (ap == 0.0) {
                break;
            }
            const double nr = rr * p.real() - ri * p.imag();
            ri = rr * p.imag() + ri * p.real();
            rr = nr;
            rowmag *= ap;
        }
        if (tail <= policy.tail_tol) {
            out.value = cplx(ar, ai);
            out.tail_bound = tail;
            out.factors = factors;
            return out;
        }
    }
    throw truncation_error("double q-product: tail bound not reached", policy.tail_tol);
}

} // namespace detail

/// (u;q)_inf with its tail bound. Exactly zero when u = q^{-k} for a retained k.
inline ProductResult qpoch_inf_detailed(cplx u, cplx q, const TruncationPolicy &policy = {})
{
    policy.validate();
    if (!(std::abs(q) < 1.0)) {
        throw domain_error("qpoch_inf requires |q| < 1");
    }
    return detail::single_product(u, q, policy, detail::on_zero::exact_zero);
}

inline cplx qpoch_inf(cplx u, cplx q, const TruncationPolicy &policy = {})
{
    return qpoch_inf_detailed(u, q, policy).value;
}

/// (u;p,q)_inf with its tail bound.
inline ProductResult double_poch_inf_detailed(cplx u, const Nomes &nomes, const TruncationPolicy &policy = {})
{
    policy.validate();
    nomes.validate();
    return detail::double_product(u, nomes.p, nomes.q, policy, detail::on_zero::exact_zero);
}

inline cplx double_poch_inf(cplx u, const Nomes &nomes, const TruncationPolicy &policy = {})
{
    return double_poch_inf_detailed(u, nomes, policy).value;
}

/// theta(u;p) = (u;p)_inf (p/u;p)_inf; equals 1 - u at p = 0.
inline cplx theta(cplx u, cplx p, const TruncationPolicy &policy = {})
{
    if (u == cplx(0.0, 0.0)) {
        throw domain_error("theta(u;p) is undefined at u = 0");
    }
    if (!(std::abs(p) < 1.0)) {
        throw domain_error("theta requires |p| < 1");
    }
    const cplx a = detail::single_product(u, p, policy, detail::on_zero::exact_zero).value;
    if (a == cplx(0.0, 0.0)) {
        return a;
    }
    return a * detail::single_product(p / u, p, policy, detail::on_zero::exact_zero).value;
}

/// Gamma(u;p,q). Throws pole_error when u is within pole_tolerance of some
/// p^{-mu} q^{-nu}. At pq = 0 the numerator is the empty product, so
/// Gamma(0;0,q) = 1.
inline cplx elliptic_gamma(cplx u, const Nomes &nomes, const TruncationPolicy &policy = {})
{
    nomes.validate();
    const cplx pq = nomes.p * nomes.q;
    if (u == cplx(0.0, 0.0)) {
        if (pq == cplx(0.0, 0.0)) {
            return {1.0, 0.0};
        }
        throw domain_error("elliptic gamma is undefined at u = 0 when pq != 0");
    }
    const cplx den = detail::double_product(u, nomes.p, nomes.q, policy, detail::on_zero::pole).value;
    if (pq == cplx(0.0, 0.0)) {
        return 1.0 / den;
    }
    const cplx num = detail::double_product(pq / u, nomes.p, nomes.q, policy, detail::on_zero::exact_zero).value;
    return num / den;
}

/// theta(a z^{+-1}; p) = theta(az;p) theta(a/z;p).
inline cplx theta_pm(cplx a, cplx z, cplx p, const TruncationPolicy &policy = {})
{
    if (z == cplx(0.0, 0.0)) {
        throw domain_error("theta_pm requires z != 0");
    }
    return theta(a * z, p, policy) * theta(a / z, p, policy);
}

/// Gamma(a z^{+-1}; p, q) = Gamma(az) Gamma(a/z).
inline cplx gamma_pm(cplx a, cplx z, const Nomes &nomes, const TruncationPolicy &policy = {})
{
    if (z == cplx(0.0, 0.0)) {
        throw domain_error("gamma_pm requires z != 0");
    }
    return elliptic_gamma(a * z, nomes, policy) * elliptic_gamma(a / z, nomes, policy);
}

/// Gamma(a z1^{+-1} z2^{+-1}; p, q): all four sign choices.
inline cplx gamma_pm(cplx a, cplx z1, cplx z2, const Nomes &nomes, const TruncationPolicy &policy = {})
{
    return gamma_pm(a * z2, z1, nomes, policy) * gamma_pm(a / z2, z1, nomes, policy);
}

/// 1 / (Gamma(x) Gamma(1/x)) = theta(x;p) theta(1/x;q); entire in x, which
/// makes the factors 1/Gamma(z^{+-2}) and 1/Gamma(z_j^{+-1} z_k^{+-1}) safe on
/// the unit torus.
inline cplx inverse_gamma_pair(cplx x, const Nomes &nomes, const TruncationPolicy &policy = {})
{
    return theta(x, nomes.p, policy) * theta(1.0 / x, nomes.q, policy);
}

/// Evaluation context: nomes, truncation policy and the cached constants
/// (p;p)_inf and (q;q)_inf. Immutable after construction, so a single
/// instance may be shared between threads.
class QSeries
{
public:
    explicit QSeries(Nomes nomes, TruncationPolicy policy = {}) : m_nomes(nomes), m_policy(policy)
    {
        m_nomes.validate();
        m_policy.validate();
        m_pp = qpoch_inf(m_nomes.p, m_nomes.p, m_policy);
        m_qq = qpoch_inf(m_nomes.q, m_nomes.q, m_policy);
    }

    const Nomes &nomes() const noexcept
    {
        return m_nomes;
    }
    const TruncationPolicy &policy() const noexcept
    {
        return m_policy;
    }
    cplx p() const noexcept
    {
        return m_nomes.p;
    }
    cplx q() const noexcept
    {
        return m_nomes.q;
    }
    /// (p;p)_inf
    cplx pp() const noexcept
    {
        return m_pp;
    }
    /// (q;q)_inf
    cplx qq() const noexcept
    {
        return m_qq;
    }

    cplx theta_p(cplx u) const
    {
        return theta(u, m_nomes.p, m_policy);
    }
    cplx theta_q(cplx u) const
    {
        return theta(u, m_nomes.q, m_policy);
    }
    cplx theta_pm(cplx a, cplx z) const
    {
        return ellsel::theta_pm(a, z, m_nomes.p, m_policy);
    }
    cplx gamma(cplx u) const
    {
        return elliptic_gamma(u, m_nomes, m_policy);
    }
    cplx gamma_pm(cplx a, cplx z) const
    {
        return ellsel::gamma_pm(a, z, m_nomes, m_policy);
    }
    cplx gamma_pm(cplx a, cplx z1, cplx z2) const
    {
        return ellsel::gamma_pm(a, z1, z2, m_nomes, m_policy);
    }
    cplx inverse_gamma_pair(cplx x) const
    {
        return ellsel::inverse_gamma_pair(x, m_nomes, m_policy);
    }

private:
    Nomes m_nomes;
    TruncationPolicy m_policy;
    cplx m_pp;
    cplx m_qq;
};

} // namespace ellsel

#endif
