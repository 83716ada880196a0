// Fundamental BC_n invariants E_r(a,b;z), the recurrence coefficients C_r and
// the test functions phi_{r,i} = F_i^- E^{(n-1)}_{r-1}.
//
// Indices r, i, m follow the 1-based conventions of the formulas; torus
// points are 0-based spans.

#ifndef ELLSEL_BC_INVARIANTS_HPP
#define ELLSEL_BC_INVARIANTS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "params.hpp"
#include "qseries.hpp"

namespace ellsel
{

/// |theta| below this in a denominator is reported as a degenerate factor.
inline constexpr double degenerate_tolerance = 1e-13;

namespace detail
{

inline cplx checked_denominator(cplx value, const char *what)
{
    if (!(std::abs(value) >= degenerate_tolerance)) {
        throw degenerate_error(std::string("vanishing denominator: ") + what, what);
    }
    return value;
}

} // namespace detail

inline std::uint64_t binomial(int n, int r)
{
    if (r < 0 || r > n) {
        return 0;
    }
    std::uint64_t acc = 1;
    for (int k = 1; k <= r; ++k) {
        acc = acc * static_cast<std::uint64_t>(n - r + k) / static_cast<std::uint64_t>(k);
    }
    return acc;
}

/// Calls fn(i, j) for every split {i_1<...<i_r} + {j_1<...<j_{n-r}} = {1..n},
/// with the i-subsets in lexicographic order and j the ascending complement.
/// Returns the number of splits visited.
template <typename Fn>
std::uint64_t for_each_index_split(int n, int r, Fn &&fn)
{
    if (r < 0 || r > n) {
        return 0;
    }
    std::vector<int> i(static_cast<std::size_t>(r));
    for (int k = 0; k < r; ++k) {
        i[static_cast<std::size_t>(k)] = k + 1;
    }
    std::vector<int> j;
    j.reserve(static_cast<std::size_t>(n - r));
    std::uint64_t visited = 0;
    while (true) {
        j.clear();
        std::size_t pos = 0;
        for (int idx = 1; idx <= n; ++idx) {
            if (pos < i.size() && i[pos] == idx) {
                ++pos;
            } else {
                j.push_back(idx);
            }
        }
        fn(std::span<const int>(i), std::span<const int>(j));
        ++visited;
        // next combination
        int k = r - 1;
        while (k >= 0 && i[static_cast<std::size_t>(k)] == n - r + k + 1) {
            --k;
        }
        if (k < 0) {
            break;
        }
        ++i[static_cast<std::size_t>(k)];
        for (int l = k + 1; l < r; ++l) {
            i[static_cast<std::size_t>(l)] = i[static_cast<std::size_t>(l - 1)] + 1;
        }
    }
    return visited;
}

/// E_r(a, b; z) of rank n = z.size(), as the sum over all index splits.
inline cplx fundamental_invariant(int r, cplx a, cplx b, std::span<const cplx> z, cplx t, const QSeries &qs)
{
    const int n = static_cast<int>(z.size());
    if (r < 0 || r > n) {
        throw domain_error("fundamental_invariant requires 0 <= r <= n");
    }
    check_point(z);
    if (n == 0) {
        return {1.0, 0.0};
    }
    cplx total(0.0, 0.0);
    for_each_index_split(n, r, [&](std::span<const int> is, std::span<const int> js) {
        cplx term(1.0, 0.0);
        for (std::size_t k = 1; k <= is.size(); ++k) {
            const int ik = is[k - 1];
            const cplx c = b * ipow(t, ik - static_cast<int>(k));
            const cplx w = a * ipow(t, static_cast<int>(k) - 1);
            term *= qs.theta_pm(c, z[static_cast<std::size_t>(ik - 1)]) /
                    detail::checked_denominator(qs.theta_pm(c, w), "theta(b t^{i_k-k} (a t^{k-1})^{+-1})");
        }
        for (std::size_t l = 1; l <= js.size(); ++l) {
            const int jl = js[l - 1];
            const cplx c = a * ipow(t, jl - static_cast<int>(l));
            const cplx w = b * ipow(t, static_cast<int>(l) - 1);
            term *= qs.theta_pm(c, z[static_cast<std::size_t>(jl - 1)]) /
                    detail::checked_denominator(qs.theta_pm(c, w), "theta(a t^{j_l-l} (b t^{l-1})^{+-1})");
        }
        total += term;
    });
    return total;
}

inline cplx fundamental_invariant(int r, cplx a, cplx b, std::span<const cplx> z, cplx t, cplx p,
                                  const TruncationPolicy &policy = {})
{
    return fundamental_invariant(r, a, b, z, t, QSeries(Nomes{p, 0.0}, policy));
}

/// E_0(a,b;z) = prod_i theta(a z_i^{+-1}) / theta(a (b t^{i-1})^{+-1}).
inline cplx e0_closed(cplx a, cplx b, std::span<const cplx> z, cplx t, const QSeries &qs)
{
    check_point(z);
    cplx acc(1.0, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        acc *= qs.theta_pm(a, z[i]) /
               detail::checked_denominator(qs.theta_pm(a, b * ipow(t, static_cast<int>(i))), "theta(a (b t^{i-1})^{+-1})");
    }
    return acc;
}

/// E_n(a,b;z) = prod_i theta(b z_i^{+-1}) / theta(b (a t^{i-1})^{+-1}).
inline cplx en_closed(cplx a, cplx b, std::span<const cplx> z, cplx t, const QSeries &qs)
{
    return e0_closed(b, a, z, t, qs);
}

/// C_r for 1 <= r <= n. Only defined under a_1 ... a_6 t^{2n-2} = 1.
inline cplx coefficient_C(int r, const ParameterSet &params, const QSeries &qs)
{
    if (params.balancing != Balancing::One) {
        throw domain_error("coefficient_C requires balancing mode 'one'");
    }
    const int n = params.n;
    if (r < 1 || r > n) {
        throw domain_error("coefficient_C requires 1 <= r <= n");
    }
    const cplx t = params.t;
    const cplx a1 = params[1];
    const cplx a6 = params[6];
    const cplx num = a1 * a1 * ipow(t, 2 * r - 2) * qs.theta_p(ipow(t, n - r + 1)) *
                     qs.theta_p(a6 / a1 * ipow(t, n - r + 1)) * qs.theta_p(a1 / a6 * ipow(t, 2 * r - n));
    const cplx den = a6 * a6 * ipow(t, 2 * n - 2 * r) *
                     detail::checked_denominator(qs.theta_p(ipow(t, r)), "theta(t^r)") *
                     detail::checked_denominator(qs.theta_p(a6 / a1 * ipow(t, n - 2 * r + 2)),
                                                 "theta(a6/a1 t^{n-2r+2})") *
                     detail::checked_denominator(qs.theta_p(a1 / a6 * ipow(t, r)), "theta(a1/a6 t^r)");
    cplx ratio(1.0, 0.0);
    for (int m = 2; m <= 5; ++m) {
        ratio *= qs.theta_p(params[m] * a6 * ipow(t, n - r)) /
                 detail::checked_denominator(qs.theta_p(params[m] * a1 * ipow(t, r - 1)), "theta(a_m a1 t^{r-1})");
    }
    return -num / den * ratio;
}

/// Smallest |theta| among the denominators of C_r; samplers reject parameter
/// sets where this is tiny.
inline double coefficient_C_min_denominator(int r, const ParameterSet &params, const QSeries &qs)
{
    const int n = params.n;
    const cplx t = params.t;
    const cplx a1 = params[1];
    const cplx a6 = params[6];
    double lo = std::min({std::abs(qs.theta_p(ipow(t, r))), std::abs(qs.theta_p(a6 / a1 * ipow(t, n - 2 * r + 2))),
                          std::abs(qs.theta_p(a1 / a6 * ipow(t, r)))});
    for (int m = 2; m <= 5; ++m) {
        lo = std::min(lo, std::abs(qs.theta_p(params[m] * a1 * ipow(t, r - 1))));
    }
    return lo;
}

/// prod_i ( a1^3 theta(a6/a1 t^{i-1}) / (a6^3 theta(a1/a6 t^{i-1}))
///          prod_{m=2}^5 theta(a_m a6 t^{i-1}) / theta(a_m a1 t^{i-1}) ),
/// the factor relating <E_n(a1,a6)> to <E_0(a1,a6)>.
inline cplx telescoped_product(const ParameterSet &params, const QSeries &qs)
{
    const cplx a1 = params[1];
    const cplx a6 = params[6];
    cplx acc(1.0, 0.0);
    for (int i = 1; i <= params.n; ++i) {
        const cplx ti = ipow(params.t, i - 1);
        acc *= a1 * a1 * a1 * qs.theta_p(a6 / a1 * ti) /
               (a6 * a6 * a6 * detail::checked_denominator(qs.theta_p(a1 / a6 * ti), "theta(a1/a6 t^{i-1})"));
        for (int m = 2; m <= 5; ++m) {
            acc *= qs.theta_p(params[m] * a6 * ti) /
                   detail::checked_denominator(qs.theta_p(params[m] * a1 * ti), "theta(a_m a1 t^{i-1})");
        }
    }
    return acc;
}

/// F_i^-(z) = prod_m theta(a_m / z_i) / (z_i^{-2} theta(z_i^{-2}))
///            prod_{j != i} theta(t z_i^{-1} z_j^{+-1}) / theta(z_i^{-1} z_j^{+-1}).
inline cplx f_minus(int i, std::span<const cplx> z, const ParameterSet &params, const QSeries &qs)
{
    const int n = static_cast<int>(z.size());
    if (i < 1 || i > n) {
        throw domain_error("f_minus requires 1 <= i <= n");
    }
    check_point(z);
    const cplx zi = z[static_cast<std::size_t>(i - 1)];
    const cplx inv = 1.0 / zi;
    cplx num(1.0, 0.0);
    for (int m = 1; m <= 6; ++m) {
        num *= qs.theta_p(params[m] * inv);
    }
    cplx acc = num / (inv * inv * detail::checked_denominator(qs.theta_p(inv * inv), "theta(z_i^{-2})"));
    for (int j = 1; j <= n; ++j) {
        if (j == i) {
            continue;
        }
        const cplx zj = z[static_cast<std::size_t>(j - 1)];
        acc *= qs.theta_pm(params.t * inv, zj) /
               detail::checked_denominator(qs.theta_pm(inv, zj), "theta(z_i^{-1} z_j^{+-1})");
    }
    return acc;
}

/// phi_{r,i}(z) = F_i^-(z) E^{(n-1)}_{r-1}(a_1, a_6; z without z_i).
inline cplx phi_test_function(int r, int i, std::span<const cplx> z, const ParameterSet &params, const QSeries &qs)
{
    const int n = static_cast<int>(z.size());
    if (r < 1 || r > n) {
        throw domain_error("phi_test_function requires 1 <= r <= n");
    }
    const cplx f = f_minus(i, z, params, qs);
    if (n == 1) {
        return f;
    }
    std::vector<cplx> rest;
    rest.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 1; j <= n; ++j) {
        if (j != i) {
            rest.push_back(z[static_cast<std::size_t>(j - 1)]);
        }
    }
    return f * fundamental_invariant(r - 1, params[1], params[6], rest, params.t, qs);
}

} // namespace ellsel

#endif
