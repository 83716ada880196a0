// BC_n Selberg kernels Psi and Psi-tilde, their q-shift ratios, the product
// J, the constant c_n and the parameter-domain predicates.

#ifndef ELLSEL_INTEGRAND_HPP
#define ELLSEL_INTEGRAND_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bc_invariants.hpp"
#include "errors.hpp"
#include "params.hpp"
#include "qseries.hpp"

namespace ellsel
{

/// Shape of a kernel
///   prod_i prod_{a in direct} Gamma(a z_i^{+-1}) / prod_{d in reflected} Gamma(d z_i^{+-1})
///          / Gamma(z_i^{+-2})
///   prod_{j<k} [Gamma(t z_j^{+-1} z_k^{+-1})] / Gamma(z_j^{+-1} z_k^{+-1})
/// The bracketed coupling numerator is absent when `coupled` is false.
struct KernelSpec {
    int n = 1;
    std::vector<cplx> direct;
    std::vector<cplx> reflected;
    bool coupled = true;
    cplx t{0.0, 0.0};
};

/// A kernel bound to its nomes. The one-variable part (`single`) and the
/// two-variable part (`pair`) are exposed separately so quadrature can
/// tabulate the former per grid axis.
class Kernel
{
public:
    Kernel(KernelSpec spec, QSeries qs) : m_spec(std::move(spec)), m_qs(std::move(qs))
    {
        if (m_spec.n < 1) {
            throw domain_error("kernel rank must be >= 1");
        }
    }

    const KernelSpec &spec() const noexcept
    {
        return m_spec;
    }
    const QSeries &qseries() const noexcept
    {
        return m_qs;
    }
    int n() const noexcept
    {
        return m_spec.n;
    }

    cplx single(cplx z) const
    {
        if (z == cplx(0.0, 0.0)) {
            throw domain_error("kernel evaluated at z = 0");
        }
        cplx acc = m_qs.inverse_gamma_pair(z * z);
        for (std::size_t m = 0; m < m_spec.direct.size(); ++m) {
            try {
                acc *= m_qs.gamma_pm(m_spec.direct[m], z);
            } catch (const pole_error &e) {
                throw pole_error(std::string(e.what()) + " [factor Gamma(a_" + std::to_string(m + 1) + " z^{+-1})]",
                                 e.mu(), e.nu());
            }
        }
        for (const auto &d : m_spec.reflected) {
            acc /= m_qs.gamma_pm(d, z);
        }
        return acc;
    }

    cplx pair(cplx zj, cplx zk) const
    {
        cplx acc = m_qs.inverse_gamma_pair(zj * zk) * m_qs.inverse_gamma_pair(zj / zk);
        if (m_spec.coupled) {
            try {
                acc *= m_qs.gamma_pm(m_spec.t, zj, zk);
            } catch (const pole_error &e) {
                throw pole_error(std::string(e.what()) + " [factor Gamma(t z_j^{+-1} z_k^{+-1})]", e.mu(), e.nu());
            }
        }
        return acc;
    }

    cplx operator()(std::span<const cplx> z) const
    {
        if (static_cast<int>(z.size()) != m_spec.n) {
            throw domain_error("torus point has wrong dimension for this kernel");
        }
        check_point(z);
        cplx acc(1.0, 0.0);
        for (const auto &zi : z) {
            acc *= single(zi);
        }
        for (std::size_t j = 0; j < z.size(); ++j) {
            for (std::size_t k = j + 1; k < z.size(); ++k) {
                acc *= pair(z[j], z[k]);
            }
        }
        return acc;
    }

private:
    KernelSpec m_spec;
    QSeries m_qs;
};

/// Psi with parameters a_1..a_6. A reflected (pq = 0) parameter set uses
/// Gamma(a_s z^{+-1}) = 1 / Gamma(dual z^{+-1}).
inline Kernel psi_kernel(const ParameterSet &params, const QSeries &qs)
{
    KernelSpec spec;
    spec.n = params.n;
    spec.t = params.t;
    for (int m = 1; m <= 6; ++m) {
        if (params.reflected() && m == params.solved_index) {
            spec.reflected.push_back(params.dual);
        } else {
            spec.direct.push_back(params[m]);
        }
    }
    return Kernel(std::move(spec), qs);
}

/// The two equivalent ways of writing Psi-tilde.
enum class PsiTildeForm {
    /// Gamma(p a_6 z^{+-1}) in the numerator.
    Shifted,
    /// Gamma(q a_6^{-1} z^{+-1}) in the denominator (needs p != 0 to agree).
    Reflected,
};

inline Kernel psi_tilde_kernel(const ParameterSet &params, const QSeries &qs,
                               PsiTildeForm form = PsiTildeForm::Shifted)
{
    KernelSpec spec;
    spec.n = params.n;
    spec.t = params.t;
    for (int m = 1; m <= 5; ++m) {
        spec.direct.push_back(params[m]);
    }
    const cplx a6 = params[6];
    if (form == PsiTildeForm::Shifted) {
        spec.direct.push_back(qs.p() * a6);
    } else {
        if (a6 == cplx(0.0, 0.0)) {
            throw domain_error("reflected form of psi_tilde needs a_6 != 0");
        }
        spec.reflected.push_back(qs.q() / a6);
    }
    return Kernel(std::move(spec), qs);
}

/// Dixon-Anderson kernel: 2n+4 numerator parameters and no t-coupling.
inline Kernel dixon_anderson_kernel(int n, std::span<const cplx> a, const QSeries &qs)
{
    if (static_cast<int>(a.size()) != 2 * n + 4) {
        throw domain_error("Dixon-Anderson kernel needs 2n+4 parameters");
    }
    KernelSpec spec;
    spec.n = n;
    spec.coupled = false;
    spec.direct.assign(a.begin(), a.end());
    return Kernel(std::move(spec), qs);
}

inline cplx psi(std::span<const cplx> z, const ParameterSet &params, const QSeries &qs)
{
    return psi_kernel(params, qs)(z);
}

inline cplx psi_tilde(std::span<const cplx> z, const ParameterSet &params, const QSeries &qs,
                      PsiTildeForm form = PsiTildeForm::Shifted)
{
    return psi_tilde_kernel(params, qs, form)(z);
}

/// Closed form of Psi-tilde(.., q z_i, ..) / Psi-tilde(z); i is 1-based.
inline cplx qshift_ratio_z(int i, std::span<const cplx> z, const ParameterSet &params, const QSeries &qs)
{
    const int n = static_cast<int>(z.size());
    if (i < 1 || i > n) {
        throw domain_error("qshift_ratio_z requires 1 <= i <= n");
    }
    if (qs.q() == cplx(0.0, 0.0)) {
        throw domain_error("qshift_ratio_z requires q != 0");
    }
    check_point(z);
    const cplx zi = z[static_cast<std::size_t>(i - 1)];
    const cplx inv = 1.0 / zi;
    const cplx qi = 1.0 / qs.q();
    using detail::checked_denominator;

    cplx acc = -(qi * inv) * (qi * inv) * qs.theta_p(qi * qi * inv * inv) /
               (zi * zi * checked_denominator(qs.theta_p(zi * zi), "theta(z_i^2)"));
    for (int m = 1; m <= 6; ++m) {
        acc *= qs.theta_p(params[m] * zi) /
               checked_denominator(qs.theta_p(qi * params[m] * inv), "theta(q^{-1} a_m z_i^{-1})");
    }
    for (int k = 1; k <= n; ++k) {
        if (k == i) {
            continue;
        }
        const cplx zk = z[static_cast<std::size_t>(k - 1)];
        acc *= qs.theta_pm(params.t * zi, zk) * qs.theta_pm(qi * inv, zk) /
               (checked_denominator(qs.theta_pm(qi * params.t * inv, zk), "theta(q^{-1} t z_i^{-1} z_k^{+-1})") *
                checked_denominator(qs.theta_pm(zi, zk), "theta(z_i z_k^{+-1})"));
    }
    return acc;
}

/// Closed form of (T_{q,a_m} Psi-tilde) / Psi-tilde; m is 1-based.
inline cplx qshift_ratio_a(int m, std::span<const cplx> z, const ParameterSet &params, const QSeries &qs)
{
    if (m < 1 || m > 6) {
        throw domain_error("qshift_ratio_a requires 1 <= m <= 6");
    }
    check_point(z);
    const cplx a = params[m];
    cplx acc(1.0, 0.0);
    for (const auto &zi : z) {
        acc *= qs.theta_pm(a, zi);
    }
    if (m == 6) {
        acc *= ipow(a, -2 * static_cast<int>(z.size()));
    }
    return acc;
}

/// J = prod_{i=1}^n prod_{j<k} Gamma(a_j a_k t^{i-1}), pairs in lexicographic order.
inline cplx j_closed(const ParameterSet &params, const QSeries &qs)
{
    cplx acc(1.0, 0.0);
    for (int i = 1; i <= params.n; ++i) {
        const cplx ti = ipow(params.t, i - 1);
        for (int j = 1; j <= 6; ++j) {
            for (int k = j + 1; k <= 6; ++k) {
                try {
                    if (params.reflected() && (j == params.solved_index || k == params.solved_index)) {
                        const int other = j == params.solved_index ? k : j;
                        acc /= qs.gamma(params.dual / (params[other] * ti));
                    } else {
                        acc *= qs.gamma(params[j] * params[k] * ti);
                    }
                } catch (const pole_error &e) {
                    throw pole_error(std::string(e.what()) + " [factor Gamma(a_" + std::to_string(j) + " a_" +
                                         std::to_string(k) + " t^" + std::to_string(i - 1) + ")]",
                                     e.mu(), e.nu());
                }
            }
        }
    }
    return acc;
}

/// prod_{j<k} Gamma(a_j a_k) over an arbitrary parameter list.
inline cplx pair_gamma_product(std::span<const cplx> a, const QSeries &qs)
{
    cplx acc(1.0, 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (std::size_t k = j + 1; k < a.size(); ++k) {
            acc *= qs.gamma(a[j] * a[k]);
        }
    }
    return acc;
}

/// prod_{i=1}^n prod_{m<=5, m!=k} theta(scale a_m a_6 t^{i-1}) / theta(a_m a_k t^{i-1}).
/// scale = q^{-1} gives the factor of the pq-balanced system, scale = 1 the
/// p-balanced one.
inline cplx qde_factor(int k, const ParameterSet &params, const QSeries &qs, cplx scale)
{
    if (k < 1 || k > 5) {
        throw domain_error("qde_factor requires 1 <= k <= 5");
    }
    cplx acc(1.0, 0.0);
    for (int i = 1; i <= params.n; ++i) {
        const cplx ti = ipow(params.t, i - 1);
        for (int m = 1; m <= 5; ++m) {
            if (m == k) {
                continue;
            }
            acc *= qs.theta_p(scale * params[m] * params[6] * ti) /
                   detail::checked_denominator(qs.theta_p(params[m] * params[k] * ti), "theta(a_m a_k t^{i-1})");
        }
    }
    return acc;
}

/// c_n = 2^n n! / ((p;p)^n (q;q)^n) prod_{i=1}^n Gamma(t^i) / Gamma(t).
inline cplx c_constant(int n, cplx t, const QSeries &qs)
{
    if (n < 0) {
        throw domain_error("c_constant requires n >= 0");
    }
    if (n == 0) {
        return {1.0, 0.0};
    }
    double factorial = 1.0;
    for (int i = 2; i <= n; ++i) {
        factorial *= i;
    }
    const cplx gt = qs.gamma(t);
    cplx ratio(1.0, 0.0);
    for (int i = 1; i <= n; ++i) {
        ratio *= qs.gamma(ipow(t, i)) / gt;
    }
    return std::ldexp(factorial, n) / (ipow(qs.pp(), n) * ipow(qs.qq(), n)) * ratio;
}

/// Right side of the evaluation formula, c_n J.
inline cplx evaluation_rhs(const ParameterSet &params, const QSeries &qs)
{
    return c_constant(params.n, params.t, qs) * j_closed(params, qs);
}

struct PoleLocation {
    cplx value;
    int m;  // 1-based parameter index
    int mu;
    int nu;
};

/// Forward orbit S_0 = {p^mu q^nu a_m} and reflected orbit
/// S_inf = {p^-mu q^-nu / a_m}, kept inside the window r <= |x| <= 1/r.
struct PoleSets {
    std::vector<PoleLocation> s0;
    std::vector<PoleLocation> s_inf;
    double r = 1.0;

    /// True when no point of S_0 coincides (to pole_tolerance) with one of S_inf.
    bool disjoint() const
    {
        for (const auto &x : s0) {
            for (const auto &y : s_inf) {
                if (std::abs(x.value - y.value) <= pole_tolerance * std::abs(y.value)) {
                    return false;
                }
            }
        }
        return true;
    }
};

inline PoleSets pole_sets(const ParameterSet &params, const Nomes &nomes, double r, int max_index = 200)
{
    if (!(r > 0.0 && r <= 1.0)) {
        throw domain_error("pole_sets requires 0 < r <= 1");
    }
    PoleSets out;
    out.r = r;
    const double lo = r;
    const double hi = 1.0 / r;
    for (int m = 1; m <= 6; ++m) {
        const cplx a = params[m];
        if (a == cplx(0.0, 0.0)) {
            continue;
        }
        cplx pm(1.0, 0.0);
        for (int mu = 0; mu <= max_index; ++mu) {
            cplx c = pm * a;
            if (std::abs(c) < lo) {
                break;
            }
            for (int nu = 0; nu <= max_index; ++nu) {
                const double mod = std::abs(c);
                if (mod < lo) {
                    break;
                }
                if (mod <= hi) {
                    out.s0.push_back({c, m, mu, nu});
                    out.s_inf.push_back({1.0 / c, m, mu, nu});
                }
                if (nomes.q == cplx(0.0, 0.0)) {
                    break;
                }
                c *= nomes.q;
            }
            if (nomes.p == cplx(0.0, 0.0)) {
                break;
            }
            pm *= nomes.p;
        }
    }
    return out;
}

enum class Domain { Outside, U, U0, V0, W0 };

inline const char *to_string(Domain d)
{
    switch (d) {
        case Domain::Outside:
            return "outside";
        case Domain::U:
            return "U";
        case Domain::U0:
            return "U0";
        case Domain::V0:
            return "V0";
        case Domain::W0:
            return "W0";
    }
    return "outside";
}

/// Most specific of the nested parameter domains containing `params`.
/// U: all |a_m| < 1. U0: |a_m| < 1 (m <= 5) and |a_1..a_5| > |p||q|/|t|^{2n-2}.
/// V0: same with bound |p|/|t|^{2n-2}. W0: sr < |a_m| < r (m <= 5), reported
/// only when also in V0.
inline Domain domain_classify(const ParameterSet &params, const Nomes &nomes, double r, double s)
{
    if (!(r > 0.0 && r <= 1.0)) {
        throw domain_error("domain_classify requires 0 < r <= 1");
    }
    if (!(s > 0.0 && s < std::abs(nomes.q))) {
        throw domain_error("domain_classify requires 0 < s < |q|");
    }
    bool first_five = true;
    bool w0 = true;
    double prod5 = 1.0;
    for (int m = 1; m <= 5; ++m) {
        const double mod = std::abs(params[m]);
        first_five = first_five && mod < 1.0;
        w0 = w0 && s * r < mod && mod < r;
        prod5 *= mod;
    }
    const double tpow = std::abs(params.t_power());
    const bool u = first_five && std::abs(params[6]) < 1.0;
    const bool u0 = first_five && prod5 * tpow > std::abs(nomes.p) * std::abs(nomes.q);
    const bool v0 = first_five && prod5 * tpow > std::abs(nomes.p);
    if (v0 && w0) {
        return Domain::W0;
    }
    if (v0) {
        return Domain::V0;
    }
    if (u0) {
        return Domain::U0;
    }
    if (u) {
        return Domain::U;
    }
    return Domain::Outside;
}

/// Radii (r, s) with 0 < r < |q|^{1/4}, r^4 |t|^{n-1} <= s < |q| and
/// |p| <= s^5 r^5 |t|^{2n-2}; these exist when |p| < |q|^{25/4} |t|^{2n-2}.
inline std::optional<std::pair<double, double>> w0_radii(const Nomes &nomes, cplx t, int n)
{
    const double ap = std::abs(nomes.p);
    const double aq = std::abs(nomes.q);
    const double at = std::abs(t);
    if (aq == 0.0 || at == 0.0) {
        return std::nullopt;
    }
    const double rmax = std::pow(aq, 0.25);
    const double t1 = std::pow(at, n - 1);
    const double t2 = std::pow(at, 2 * n - 2);
    for (int k = 1; k <= 15; ++k) {
        const double eta = std::pow(10.0, -k);
        const double r = rmax * (1.0 - eta);
        const double s = aq * (1.0 - eta);
        if (r * r * r * r * t1 <= s && ap <= std::pow(s * r, 5) * t2) {
            return std::make_pair(r, s);
        }
    }
    return std::nullopt;
}

} // namespace ellsel

#endif
