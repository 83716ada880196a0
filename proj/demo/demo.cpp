// Walkthrough: elliptic gamma values, the rank-one and rank-two evaluation
// formula by torus quadrature, and one recurrence step.

#include <cstdio>

#include <ellsel/ellsel.hpp>

using ellsel::cplx;

namespace
{

void show(const char *what, cplx lhs, cplx rhs)
{
    std::printf("%-34s %s\n%-34s %s   rel %.2e\n", what, ellsel::format_complex(lhs).c_str(), "",
                ellsel::format_complex(rhs).c_str(), std::abs(lhs - rhs) / std::abs(rhs));
}

} // namespace

int main()
{
    const ellsel::Nomes nomes{0.05, 0.07};
    const ellsel::QSeries qs(nomes);
    std::printf("Gamma(0.25; 0.05, 0.07)            %s\n", ellsel::format_complex(qs.gamma(0.25)).c_str());
    std::printf("theta(0.5; 0.05)                   %s\n\n", ellsel::format_complex(qs.theta_p(0.5)).c_str());

    // Rank one; the solved a_6 lies outside the unit disk, so the torus
    // integral is continued past the pole at a_6.
    const auto p1 = ellsel::ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, ellsel::Balancing::PQ, nomes);
    const auto ci = ellsel::continued_integral_n1(p1, qs);
    std::printf("a_6 = %s\n", ellsel::format_complex(p1[6]).c_str());
    show("n=1  integral | c_1 J_1", ci.value, ellsel::evaluation_rhs(p1, qs));

    const ellsel::Nomes nomes2{0.02, 0.05};
    const ellsel::QSeries qs2(nomes2);
    const auto p2 = ellsel::ParameterSet::balanced(2, 0.3, {cplx(0.5, 0.1), 0.4, 0.5, -0.45, 0.55},
                                                   ellsel::Balancing::PQ, nomes2);
    const auto quad = ellsel::integrate_kernel(ellsel::psi_kernel(p2, qs2));
    show("n=2  integral | c_2 J_2", quad.value, ellsel::evaluation_rhs(p2, qs2));
    std::printf("     grid N = %d per axis\n", quad.N_used);

    const ellsel::Nomes nomes3{0.002, 0.1};
    const ellsel::QSeries qs3(nomes3);
    const auto p3 = ellsel::ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6},
                                                   ellsel::Balancing::One, nomes3);
    auto e = [&](int r) {
        return ellsel::expectation(
                   [&](std::span<const cplx> z) { return ellsel::fundamental_invariant(r, p3[1], p3[6], z, p3.t, qs3); },
                   p3, qs3)
            .value;
    };
    show("n=1  <E_1> | C_1 <E_0>", e(1), ellsel::coefficient_C(1, p3, qs3) * e(0));
    return 0;
}
