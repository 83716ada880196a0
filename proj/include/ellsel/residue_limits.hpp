// Residues of Gamma(a z^{+-1}), the continued rank-one integral over the
// deformed cycle, pinching limits a_2 -> 1/a_1, and the c_n recurrence.

#ifndef ELLSEL_RESIDUE_LIMITS_HPP
#define ELLSEL_RESIDUE_LIMITS_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "errors.hpp"
#include "integrand.hpp"
#include "params.hpp"
#include "qseries.hpp"
#include "torus_quadrature.hpp"

namespace ellsel
{

/// Res(Gamma(a z^{+-1}) dz/z; z = a) = Gamma(a^2) / ((p;p)(q;q)).
/// With at_inverse the residue at z = 1/a, which is the negative.
inline cplx residue_gamma_pm(cplx a, const QSeries &qs, bool at_inverse = false)
{
    const cplx r = qs.gamma(a * a) / (qs.pp() * qs.qq());
    return at_inverse ? -r : r;
}

/// (1 / 2 pi i) times the contour integral of Gamma(a z^{+-1}) / z over the
/// circle |z - center| = radius, by the N-point trapezoid rule.
inline cplx residue_contour_numeric(cplx a, cplx center, const QSeries &qs, double radius = 1e-3, int N = 64)
{
    if (!(radius > 0.0) || N < 4) {
        throw domain_error("contour needs radius > 0 and N >= 4");
    }
    detail::CompensatedSum sum;
    for (int k = 0; k < N; ++k) {
        const cplx w = std::polar(radius, 2.0 * std::numbers::pi * (k + 0.5) / N);
        const cplx z = center + w;
        sum.add(qs.gamma_pm(a, z) / z * w);
    }
    return sum.value() / static_cast<double>(N);
}

/// Gamma(a_m * factor), reading a reflected solved parameter through its dual.
inline cplx gamma_times(const ParameterSet &params, int m, cplx factor, const QSeries &qs)
{
    if (params.reflected() && m == params.solved_index) {
        return 1.0 / qs.gamma(params.dual / factor);
    }
    return qs.gamma(params[m] * factor);
}

struct ContinuedIntegral {
    cplx value{0.0, 0.0};
    QuadResult torus;
    /// Contribution of the small circles around a_k and 1/a_k.
    cplx correction{0.0, 0.0};
    /// 1-based index of the parameter outside the unit disk, 0 if none.
    int outside_index = 0;
};

/// Rank-one integral continued to a single parameter a_k with
/// 1 < |a_k| < |q|^{-1/2} (the others inside the unit disk): the unit-circle
/// integral plus 2 prod_{m != k} Gamma(a_m a_k^{+-1}) / ((p;p)(q;q) Gamma(a_k^{-2})).
/// The integrand is symmetric in a_1..a_6, so any index may play the role of a_1.
inline ContinuedIntegral continued_integral_n1(const ParameterSet &params, const QSeries &qs,
                                               const QuadOptions &opts = {})
{
    if (params.n != 1) {
        throw domain_error("continued_integral_n1 requires n = 1");
    }
    int outside = 0;
    for (int m = 1; m <= 6; ++m) {
        if (params.reflected() && m == params.solved_index) {
            continue;
        }
        const double mod = std::abs(params[m]);
        if (std::abs(mod - 1.0) <= pole_tolerance) {
            throw domain_error("|a_" + std::to_string(m) + "| is within pole tolerance of the unit circle");
        }
        if (mod > 1.0) {
            if (outside != 0) {
                throw domain_error("continued_integral_n1 allows only one parameter outside the unit disk");
            }
            outside = m;
        }
    }
    ContinuedIntegral out;
    if (outside != 0) {
        const cplx ak = params[outside];
        if (!(std::abs(ak) < 1.0 / std::sqrt(std::abs(qs.q())))) {
            throw domain_error("continued_integral_n1 requires |a_k| < |q|^{-1/2}");
        }
        cplx num(2.0, 0.0);
        for (int m = 1; m <= 6; ++m) {
            if (m != outside) {
                num *= gamma_times(params, m, ak, qs) * gamma_times(params, m, 1.0 / ak, qs);
            }
        }
        out.outside_index = outside;
        out.correction = num / (qs.pp() * qs.qq() * qs.gamma(1.0 / (ak * ak)));
    }
    out.torus = integrate_kernel(psi_kernel(params, qs), opts);
    out.value = out.torus.value + out.correction;
    return out;
}

/// Linear elimination of the O(eps) term from f(eps1), f(eps2).
template <typename F>
cplx richardson_limit(F &&f, double eps1, double eps2)
{
    if (eps1 == eps2) {
        throw domain_error("richardson_limit needs two distinct step sizes");
    }
    const cplx f1 = f(eps1);
    const cplx f2 = f(eps2);
    return (eps1 * f2 - eps2 * f1) / (eps1 - eps2);
}

/// Parameters on the pinch a_2 = (1 - eps) / a_1 with a_6 re-solved (pq balancing).
inline ParameterSet pinch_approach(const ParameterSet &limit, double eps, const Nomes &nomes)
{
    if (limit.balancing != Balancing::PQ || limit.solved_index != 6) {
        throw domain_error("pinch limits need pq balancing with a_6 solved");
    }
    ParameterSet out = limit;
    out.a[1] = (1.0 - eps) / limit[1];
    out.rebalance(nomes);
    return out;
}

/// lim_{a_2 -> 1/a_1} (1 - a_1 a_2) J_n in closed form:
///   prod_{i=1}^{n-1} Gamma(t^i) / ((p;p)(q;q))
///   prod_{i=1}^n prod_{m=3}^6 Gamma(a_1^{+-1} a_m t^{i-1})
///   prod_{i=1}^{n-1} prod_{3<=j<k<=6} Gamma(a_j a_k t^{i-1}).
/// Expects a_2 = 1/a_1 and a_3 a_4 a_5 a_6 t^{2n-2} = pq.
inline cplx lim_pinch_J(const ParameterSet &params, const QSeries &qs)
{
    const cplx a1 = params[1];
    if (std::abs(a1 * params[2] - 1.0) > 1e-12) {
        throw domain_error("lim_pinch_J expects a_2 = 1/a_1");
    }
    const int n = params.n;
    const cplx t = params.t;
    cplx acc = 1.0 / (qs.pp() * qs.qq());
    for (int i = 1; i <= n - 1; ++i) {
        acc *= qs.gamma(ipow(t, i));
    }
    for (int i = 1; i <= n; ++i) {
        const cplx ti = ipow(t, i - 1);
        for (int m = 3; m <= 6; ++m) {
            acc *= gamma_times(params, m, a1 * ti, qs) * gamma_times(params, m, ti / a1, qs);
        }
    }
    for (int i = 1; i <= n - 1; ++i) {
        const cplx ti = ipow(t, i - 1);
        for (int j = 3; j <= 6; ++j) {
            for (int k = j + 1; k <= 6; ++k) {
                if (k == 6) {
                    acc *= gamma_times(params, 6, params[j] * ti, qs);
                } else {
                    acc *= qs.gamma(params[j] * params[k] * ti);
                }
            }
        }
    }
    return acc;
}

/// Richardson extrapolation of (1 - a_1 a_2) J_n along a_2 = (1 - eps)/a_1.
inline cplx lim_pinch_J_numeric(const ParameterSet &limit, const QSeries &qs, double eps1 = 1e-3, double eps2 = 1e-4)
{
    return richardson_limit(
        [&](double eps) { return eps * j_closed(pinch_approach(limit, eps, qs.nomes()), qs); }, eps1, eps2);
}

/// 2 prod_{m=3}^6 Gamma(a_m a_1^{+-1}) / ((p;p)^2 (q;q)^2): the rank-one pinch
/// residue times I_0 = 1.
inline cplx pinch_identity_rhs(const ParameterSet &limit, const QSeries &qs)
{
    const cplx a1 = limit[1];
    cplx acc(2.0, 0.0);
    for (int m = 3; m <= 6; ++m) {
        acc *= gamma_times(limit, m, a1, qs) * gamma_times(limit, m, 1.0 / a1, qs);
    }
    const cplx pq = qs.pp() * qs.qq();
    return acc / (pq * pq);
}

/// lim (1 - a_1 a_2) I_1 from the continued integral at a_2 = (1 - eps)/a_1,
/// Richardson-extrapolated. Requires 1 < |a_1| < |q|^{-1/2}.
inline cplx pinch_identity_lhs(const ParameterSet &limit, const QSeries &qs, const QuadOptions &opts = {},
                               double eps1 = 1e-3, double eps2 = 1e-4)
{
    if (limit.n != 1) {
        throw domain_error("the pinch identity is checked at n = 1");
    }
    return richardson_limit(
        [&](double eps) {
            return eps * continued_integral_n1(pinch_approach(limit, eps, qs.nomes()), qs, opts).value;
        },
        eps1, eps2);
}

/// |c_n - c_{n-1} 2n Gamma(t^n) / (Gamma(t) (p;p)(q;q))| / |c_n|.
inline double cn_recurrence_check(int n, cplx t, const QSeries &qs)
{
    if (n < 1) {
        throw domain_error("cn_recurrence_check requires n >= 1");
    }
    const cplx cn = c_constant(n, t, qs);
    const cplx step = c_constant(n - 1, t, qs) * 2.0 * static_cast<double>(n) * qs.gamma(ipow(t, n)) /
                      (qs.gamma(t) * qs.pp() * qs.qq());
    return std::abs(cn - step) / std::abs(cn);
}

} // namespace ellsel

#endif
