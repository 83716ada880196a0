#ifndef ELLSEL_PARAMS_HPP
#define ELLSEL_PARAMS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "qseries.hpp"

namespace ellsel
{

/// Integer power of a complex number; negative exponents allowed.
inline cplx ipow(cplx x, int e)
{
    cplx acc(1.0, 0.0);
    const int m = e < 0 ? -e : e;
    for (int k = 0; k < m; ++k) {
        acc *= x;
    }
    return e < 0 ? 1.0 / acc : acc;
}

/// A point of (C^*)^n. Components are 0-based here; formulas index them 1..n.
using TorusPoint = std::vector<cplx>;

inline void check_point(std::span<const cplx> z)
{
    for (const auto &zi : z) {
        if (zi == cplx(0.0, 0.0)) {
            throw domain_error("torus point components must be nonzero");
        }
    }
}

/// Which product a_1 ... a_6 t^{2n-2} is pinned to. Free means no constraint
/// (used for raw, unbalanced evaluations such as T_{q,a_m} shifts).
enum class Balancing { PQ, P, One, Free };

inline const char *to_string(Balancing b)
{
    switch (b) {
        case Balancing::PQ:
            return "pq";
        case Balancing::P:
            return "p";
        case Balancing::One:
            return "one";
        case Balancing::Free:
            return "free";
    }
    return "free";
}

inline Balancing balancing_from_string(const std::string &s)
{
    if (s == "pq") return Balancing::PQ;
    if (s == "p") return Balancing::P;
    if (s == "one" || s == "1") return Balancing::One;
    if (s == "free") return Balancing::Free;
    throw config_error("unknown balancing mode '" + s + "' (expected pq, p or one)");
}

inline cplx balancing_target(Balancing b, const Nomes &nomes)
{
    switch (b) {
        case Balancing::PQ:
            return nomes.p * nomes.q;
        case Balancing::P:
            return nomes.p;
        case Balancing::One:
            return {1.0, 0.0};
        case Balancing::Free:
            break;
    }
    throw domain_error("free parameter sets have no balancing target");
}

/// Rank n, coupling t and the six parameters a_1..a_6 (stored 0-based).
///
/// Under PQ balancing with pq = 0 the solved parameter is exactly zero; its
/// gamma factors are then evaluated through Gamma(a x) = 1 / Gamma(pq/(a x)),
/// using `dual` = pq / a_solved = (product of the other five) t^{2n-2}.
struct ParameterSet {
    int n = 1;
    cplx t{0.0, 0.0};
    std::array<cplx, 6> a{};
    Balancing balancing = Balancing::Free;
    /// 1-based index of the parameter derived from the balancing condition.
    int solved_index = 6;
    cplx dual{0.0, 0.0};

    cplx operator[](int m) const
    {
        return a[static_cast<std::size_t>(m - 1)];
    }

    /// True when a_solved vanished through a pq = 0 degeneration.
    bool reflected() const
    {
        return balancing == Balancing::PQ && a[static_cast<std::size_t>(solved_index - 1)] == cplx(0.0, 0.0);
    }

    cplx t_power() const
    {
        return ipow(t, 2 * n - 2);
    }

    cplx product() const
    {
        cplx acc = t_power();
        for (const auto &x : a) {
            acc *= x;
        }
        return acc;
    }

    cplx others_product() const
    {
        cplx acc = t_power();
        for (int m = 1; m <= 6; ++m) {
            if (m != solved_index) {
                acc *= (*this)[m];
            }
        }
        return acc;
    }

    /// Relative residual of the balancing condition (0 for Free sets).
    double balancing_residual(const Nomes &nomes) const
    {
        if (balancing == Balancing::Free) {
            return 0.0;
        }
        const cplx target = balancing_target(balancing, nomes);
        if (reflected()) {
            return std::abs(dual - others_product()) / std::max(std::abs(dual), 1e-300);
        }
        return std::abs(product() - target) / std::abs(target);
    }

    /// Re-derive the solved parameter from the others.
    void rebalance(const Nomes &nomes)
    {
        if (balancing == Balancing::Free) {
            return;
        }
        const cplx rest = others_product();
        if (rest == cplx(0.0, 0.0)) {
            throw domain_error("cannot solve the balancing condition: free parameters multiply to zero");
        }
        a[static_cast<std::size_t>(solved_index - 1)] = balancing_target(balancing, nomes) / rest;
        dual = balancing == Balancing::PQ ? rest : cplx(0.0, 0.0);
    }

    /// Multiply a_k by `factor` and re-solve the dependent parameter.
    ParameterSet shifted(int k, cplx factor, const Nomes &nomes) const
    {
        if (k < 1 || k > 6 || k == solved_index) {
            throw domain_error("shift index must be a free parameter index in 1..6");
        }
        ParameterSet out = *this;
        out.a[static_cast<std::size_t>(k - 1)] *= factor;
        out.rebalance(nomes);
        return out;
    }

    /// Copy with a_m replaced and the balancing dropped.
    ParameterSet with_parameter(int m, cplx value) const
    {
        if (m < 1 || m > 6) {
            throw domain_error("parameter index must be in 1..6");
        }
        ParameterSet out = *this;
        out.a[static_cast<std::size_t>(m - 1)] = value;
        out.balancing = Balancing::Free;
        out.dual = 0.0;
        return out;
    }

    void validate(const Nomes &nomes) const
    {
        if (n < 1) {
            throw domain_error("rank n must be >= 1");
        }
        if (!(std::abs(t) < 1.0)) {
            throw domain_error("coupling must satisfy |t| < 1");
        }
        if (solved_index < 1 || solved_index > 6) {
            throw domain_error("solved_index must be in 1..6");
        }
        for (int m = 1; m <= 6; ++m) {
            if ((*this)[m] == cplx(0.0, 0.0) && !(m == solved_index && reflected())) {
                throw domain_error("parameters a_m must be nonzero");
            }
        }
        if (balancing_residual(nomes) > 1e-14) {
            throw domain_error("parameters violate the declared balancing condition");
        }
    }

    /// Build a balanced set from the five free parameters (in index order,
    /// skipping solved_index).
    static ParameterSet balanced(int n, cplx t, const std::array<cplx, 5> &free, Balancing mode,
                                 const Nomes &nomes, int solved_index = 6)
    {
        if (mode == Balancing::Free) {
            throw domain_error("balanced() needs a balancing mode");
        }
        ParameterSet out;
        out.n = n;
        out.t = t;
        out.balancing = mode;
        out.solved_index = solved_index;
        std::size_t j = 0;
        for (int m = 1; m <= 6; ++m) {
            if (m != solved_index) {
                out.a[static_cast<std::size_t>(m - 1)] = free[j++];
            }
        }
        out.rebalance(nomes);
        out.validate(nomes);
        return out;
    }

    /// Unconstrained set.
    static ParameterSet free_set(int n, cplx t, const std::array<cplx, 6> &a)
    {
        ParameterSet out;
        out.n = n;
        out.t = t;
        out.a = a;
        return out;
    }
};

} // namespace ellsel

#endif
