// Equal-weight product trapezoid rule on the torus |z_1| = ... = |z_n| = 1,
// i.e. the mean of f over a grid of roots of unity, with N doubling until two
// successive estimates agree.

#ifndef ELLSEL_TORUS_QUADRATURE_HPP
#define ELLSEL_TORUS_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bc_invariants.hpp"
#include "errors.hpp"
#include "integrand.hpp"
#include "params.hpp"
#include "qseries.hpp"

namespace ellsel
{

/// Default cap on points per circle.
inline int default_budget(int n)
{
    if (n <= 1) {
        return 512;
    }
    if (n == 2) {
        return 256;
    }
    return 64;
}

struct QuadOptions {
    /// Converged when |I_N - I_{N/2}| <= tol * max(|I_N|, scale_floor).
    double tol = 1e-10;
    double scale_floor = 1.0;
    /// Largest N per circle; 0 selects default_budget(n).
    int budget = 0;
    int n_start = 16;
    double offset = 0.0;
};

/// Nodes z_i = exp(2 pi i (k + o_i) / N). The axis phases
/// o_i = frac(offset + (i+1)/(2n+3)) keep every node off z = +-1 and off the
/// hyperplanes z_i = z_j^{+-1}, where test functions have removable 0/0
/// singularities. The phases do not affect exactness for trigonometric
/// polynomials of degree < N.
struct QuadratureGrid {
    int n = 1;
    int N = 16;
    double offset = 0.0;

    double axis_offset(int axis) const
    {
        const double o = offset + static_cast<double>(axis + 1) / static_cast<double>(2 * n + 3);
        return o - std::floor(o);
    }

    cplx node(int axis, int k) const
    {
        const double angle = 2.0 * std::numbers::pi * (static_cast<double>(k) + axis_offset(axis)) / N;
        return std::polar(1.0, angle);
    }

    std::uint64_t size() const
    {
        std::uint64_t s = 1;
        for (int i = 0; i < n; ++i) {
            s *= static_cast<std::uint64_t>(N);
        }
        return s;
    }
};

struct QuadLevel {
    int N = 0;
    cplx value{0.0, 0.0};
    /// |I_N - I_{N/2}|; negative for the first level.
    double err_est = -1.0;
};

struct QuadResult {
    cplx value{0.0, 0.0};
    double err_est = 0.0;
    int N_used = 0;
    bool converged = false;
    std::vector<QuadLevel> levels;
};

namespace detail
{

/// Neumaier-compensated complex sum; deterministic for a fixed input order.
class CompensatedSum
{
public:
    void add(cplx x)
    {
        add_part(m_re, m_cre, x.real());
        add_part(m_im, m_cim, x.imag());
    }
    cplx value() const
    {
        return {m_re + m_cre, m_im + m_cim};
    }

private:
    static void add_part(double &sum, double &comp, double x)
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double m_re = 0.0, m_cre = 0.0, m_im = 0.0, m_cim = 0.0;
};

} // namespace detail

/// Mean of point(idx) over all multi-indices of the grid, in odometer order
/// (last axis fastest).
template <typename Point>
cplx grid_mean(const QuadratureGrid &grid, Point &&point)
{
    if (grid.n < 1 || grid.N < 1) {
        throw domain_error("grid needs n >= 1 and N >= 1");
    }
    std::vector<int> idx(static_cast<std::size_t>(grid.n), 0);
    detail::CompensatedSum sum;
    const std::uint64_t total = grid.size();
    for (std::uint64_t count = 0; count < total; ++count) {
        sum.add(point(std::span<const int>(idx)));
        for (int axis = grid.n - 1; axis >= 0; --axis) {
            if (++idx[static_cast<std::size_t>(axis)] < grid.N) {
                break;
            }
            idx[static_cast<std::size_t>(axis)] = 0;
        }
    }
    return sum.value() / static_cast<double>(total);
}

/// Refinement driver. make(grid) returns a callable idx -> value, so callers
/// can precompute per-axis tables for each level.
template <typename Make>
QuadResult torus_integrate_grid(Make &&make, int n, const QuadOptions &opts)
{
    if (n < 1) {
        throw domain_error("torus_integrate requires n >= 1");
    }
    if (!(opts.tol > 0.0)) {
        throw domain_error("quadrature tolerance must be positive");
    }
    const int budget = opts.budget > 0 ? opts.budget : default_budget(n);
    const int start = std::min(opts.n_start, budget / 2);
    if (start < 4) {
        throw domain_error("quadrature budget must allow N >= 4 and one refinement");
    }
    QuadResult res;
    for (int N = start; N <= budget; N *= 2) {
        const QuadratureGrid grid{n, N, opts.offset};
        QuadLevel level;
        level.N = N;
        level.value = grid_mean(grid, make(grid));
        if (!res.levels.empty()) {
            level.err_est = std::abs(level.value - res.levels.back().value);
        }
        res.levels.push_back(level);
        res.value = level.value;
        res.N_used = N;
        res.err_est = level.err_est;
        if (level.err_est >= 0.0 && level.err_est <= opts.tol * std::max(std::abs(level.value), opts.scale_floor)) {
            res.converged = true;
            return res;
        }
    }
    const cplx prev = res.levels.size() >= 2 ? res.levels[res.levels.size() - 2].value : res.value;
    throw nonconvergence_error("torus quadrature did not converge within N = " + std::to_string(budget) +
                                   " (last error estimate " + std::to_string(res.err_est) + ")",
                               prev, res.value);
}

namespace detail
{

template <typename F>
auto pointwise_maker(F &f)
{
    return [&f](const QuadratureGrid &grid) {
        return [&f, grid, z = std::vector<cplx>(static_cast<std::size_t>(grid.n))](std::span<const int> idx) mutable {
            for (int i = 0; i < grid.n; ++i) {
                z[static_cast<std::size_t>(i)] = grid.node(i, idx[static_cast<std::size_t>(i)]);
            }
            return cplx(f(std::span<const cplx>(z)));
        };
    };
}

/// Tabulates kernel.single on every axis, then multiplies pair factors and
/// the test function pointwise.
template <typename Phi>
auto kernel_maker(const Kernel &kernel, Phi &phi)
{
    return [&kernel, &phi](const QuadratureGrid &grid) {
        std::vector<std::vector<cplx>> table(static_cast<std::size_t>(grid.n));
        for (int i = 0; i < grid.n; ++i) {
            auto &row = table[static_cast<std::size_t>(i)];
            row.resize(static_cast<std::size_t>(grid.N));
            for (int k = 0; k < grid.N; ++k) {
                row[static_cast<std::size_t>(k)] = kernel.single(grid.node(i, k));
            }
        }
        return [&kernel, &phi, grid, table = std::move(table),
                z = std::vector<cplx>(static_cast<std::size_t>(grid.n))](std::span<const int> idx) mutable {
            cplx acc(1.0, 0.0);
            for (int i = 0; i < grid.n; ++i) {
                const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
                z[static_cast<std::size_t>(i)] = grid.node(i, static_cast<int>(k));
                acc *= table[static_cast<std::size_t>(i)][k];
            }
            for (std::size_t j = 0; j < z.size(); ++j) {
                for (std::size_t k = j + 1; k < z.size(); ++k) {
                    acc *= kernel.pair(z[j], z[k]);
                }
            }
            return acc * cplx(phi(std::span<const cplx>(z), acc));
        };
    };
}

} // namespace detail

/// Integral of f over T^n against (2 pi i)^{-n} dz_1...dz_n / (z_1...z_n).
template <typename F>
QuadResult torus_integrate(F &&f, int n, const QuadOptions &opts = {})
{
    return torus_integrate_grid(detail::pointwise_maker(f), n, opts);
}

/// Levels N = n_from, 2 n_from, ..., n_to with their error estimates,
/// without any stopping rule.
template <typename Make>
std::vector<QuadLevel> convergence_profile_grid(Make &&make, int n, int n_from, int n_to, double offset = 0.0)
{
    if (n_from < 4 || n_to < n_from) {
        throw domain_error("convergence_profile requires 4 <= n_from <= n_to");
    }
    std::vector<QuadLevel> out;
    for (int N = n_from; N <= n_to; N *= 2) {
        const QuadratureGrid grid{n, N, offset};
        QuadLevel level;
        level.N = N;
        level.value = grid_mean(grid, make(grid));
        if (!out.empty()) {
            level.err_est = std::abs(level.value - out.back().value);
        }
        out.push_back(level);
    }
    return out;
}

/// Integral of phi * kernel. phi(z, kernel_value) may use or ignore the
/// kernel value at z.
template <typename Phi>
    requires std::invocable<Phi &, std::span<const cplx>, cplx>
QuadResult integrate_kernel(const Kernel &kernel, Phi &&phi, const QuadOptions &opts = {})
{
    return torus_integrate_grid(detail::kernel_maker(kernel, phi), kernel.n(), opts);
}

inline QuadResult integrate_kernel(const Kernel &kernel, const QuadOptions &opts = {})
{
    auto one = [](std::span<const cplx>, cplx) { return cplx(1.0, 0.0); };
    return integrate_kernel(kernel, one, opts);
}

inline std::vector<QuadLevel> kernel_convergence_profile(const Kernel &kernel, int n_from, int n_to,
                                                         double offset = 0.0)
{
    auto one = [](std::span<const cplx>, cplx) { return cplx(1.0, 0.0); };
    return convergence_profile_grid(detail::kernel_maker(kernel, one), kernel.n(), n_from, n_to, offset);
}

/// <phi> = integral of phi(z) Psi-tilde(z) over the torus.
template <typename Phi>
QuadResult expectation(Phi &&phi, const ParameterSet &params, const QSeries &qs, const QuadOptions &opts = {})
{
    const Kernel kernel = psi_tilde_kernel(params, qs);
    auto wrapped = [&phi](std::span<const cplx> z, cplx) { return cplx(phi(z)); };
    return integrate_kernel(kernel, wrapped, opts);
}

/// Mean of |g(z)| over one grid level; a magnitude scale for integrals whose
/// exact value is expected to vanish.
template <typename F>
double grid_abs_mean(F &&g, int n, int N, double offset = 0.0)
{
    const QuadratureGrid grid{n, N, offset};
    auto make = detail::pointwise_maker(g);
    auto point = make(grid);
    return std::abs(grid_mean(grid, [&point](std::span<const int> idx) { return cplx(std::abs(point(idx)), 0.0); }));
}

/// The nabla image phi(z) - (T_{q,z_i} Psi-tilde / Psi-tilde)(z) phi(.., q z_i, ..)
/// of phi = phi_{r,i}, without the Psi-tilde weight.
inline cplx nabla_phi(int r, int i, std::span<const cplx> z, const ParameterSet &params, const QSeries &qs)
{
    std::vector<cplx> shifted(z.begin(), z.end());
    shifted[static_cast<std::size_t>(i - 1)] *= qs.q();
    return phi_test_function(r, i, z, params, qs) -
           qshift_ratio_z(i, z, params, qs) * phi_test_function(r, i, shifted, params, qs);
}

struct NablaResult {
    QuadResult quad;
    /// Mean of |phi_{r,i} Psi-tilde| on the final grid.
    double reference = 0.0;
};

/// <nabla_{q,z_i} phi_{r,i}>, expected to vanish.
inline NablaResult nabla_expectation(int r, int i, const ParameterSet &params, const QSeries &qs,
                                     const QuadOptions &opts = {})
{
    const int n = params.n;
    if (i < 1 || i > n || r < 1 || r > n) {
        throw domain_error("nabla_expectation requires 1 <= r, i <= n");
    }
    const Kernel kernel = psi_tilde_kernel(params, qs);
    auto integrand = [&](std::span<const cplx> z, cplx) { return nabla_phi(r, i, z, params, qs); };
    NablaResult out;
    out.quad = integrate_kernel(kernel, integrand, opts);
    auto weighted = [&](std::span<const cplx> z) { return kernel(z) * phi_test_function(r, i, z, params, qs); };
    out.reference = grid_abs_mean(weighted, n, out.quad.N_used, opts.offset);
    return out;
}

/// Same, taking raw nomes. At q = 1 the shift T_{q,z_i} is the identity and
/// the shift ratio is 1, so the nabla image vanishes identically; that case is
/// answered exactly without building any q-series.
inline NablaResult nabla_expectation(int r, int i, const ParameterSet &params, const Nomes &nomes,
                                     const TruncationPolicy &policy = {}, const QuadOptions &opts = {})
{
    if (nomes.q == cplx(1.0, 0.0)) {
        NablaResult out;
        out.quad.converged = true;
        return out;
    }
    return nabla_expectation(r, i, params, QSeries(nomes, policy), opts);
}

} // namespace ellsel

#endif
