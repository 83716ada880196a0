#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <ellsel/integrand.hpp>

using ellsel::Balancing;
using ellsel::cplx;
using ellsel::ParameterSet;

namespace
{

double rel(cplx a, cplx b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Frozen from tests/oracle.hpp (50 digits) at the rank-one example point
// a = (0.3, 0.4, 0.5, -0.2, 0.25, solved), (p, q) = (0.05, 0.07).
const cplx psi_example(2.0968387691304745063, 0.0);
const cplx j_example(0.51582125789081666127, 0.0);
const cplx c2_example(7.5467112992922547708, 0.0);

const ellsel::Nomes example_nomes{0.05, 0.07};

ParameterSet example_set()
{
    return ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::PQ, example_nomes);
}

ParameterSet generic_set(int n, Balancing mode, const ellsel::Nomes &nomes)
{
    return ParameterSet::balanced(n, cplx(0.3, 0.1), {cplx(0.4, 0.2), 0.5, cplx(-0.3, 0.1), 0.35, cplx(0.1, 0.6)}, mode,
                                  nomes);
}

} // namespace

TEST(Psi, FrozenOracleValue)
{
    const ellsel::QSeries qs(example_nomes);
    const std::vector<cplx> z{std::polar(1.0, std::numbers::pi / 3)};
    EXPECT_LT(std::abs(ellsel::psi(z, example_set(), qs) - psi_example), 1e-13);
}

TEST(Psi, FiniteNonzeroAndInversionSymmetric)
{
    const ellsel::QSeries qs({0.05, cplx(0.03, 0.04)});
    const ParameterSet ps = generic_set(2, Balancing::PQ, qs.nomes());
    const std::vector<cplx> z{std::polar(1.0, 0.4), std::polar(1.0, 2.2)};
    const cplx v = ellsel::psi(z, ps, qs);
    EXPECT_TRUE(std::isfinite(std::abs(v)));
    EXPECT_GT(std::abs(v), 0.0);
    std::vector<cplx> w = z;
    w[0] = 1.0 / w[0];
    EXPECT_LT(rel(v, ellsel::psi(w, ps, qs)), 1e-13);
    std::swap(w[0], w[1]);
    EXPECT_LT(rel(v, ellsel::psi(w, ps, qs)), 1e-13);
}

TEST(Psi, ReflectedSolvedParameterAtPZero)
{
    // At p = 0 the pq-balanced a_6 vanishes; Gamma(a_6 z^{+-1}) is read as
    // 1 / Gamma(dual / z^{+-1}) and must match the limit p -> 0.
    const ParameterSet ps0 = ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::PQ, {0.0, 0.07});
    const ParameterSet pse = ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::PQ, {1e-12, 0.07});
    const std::vector<cplx> z{std::polar(1.0, 1.1)};
    EXPECT_LT(rel(ellsel::psi(z, ps0, ellsel::QSeries({0.0, 0.07})), ellsel::psi(z, pse, ellsel::QSeries({1e-12, 0.07}))),
              1e-9);
}

TEST(PsiTilde, TwoFormsAgree)
{
    const ellsel::QSeries qs({cplx(0.05, 0.02), 0.07});
    for (int n : {1, 2}) {
        const ParameterSet ps = generic_set(n, Balancing::One, qs.nomes());
        std::vector<cplx> z;
        for (int i = 0; i < n; ++i) {
            z.push_back(std::polar(1.0, 0.5 + 1.3 * i));
        }
        EXPECT_LT(rel(ellsel::psi_tilde(z, ps, qs, ellsel::PsiTildeForm::Shifted),
                      ellsel::psi_tilde(z, ps, qs, ellsel::PsiTildeForm::Reflected)),
                  1e-11);
    }
}

TEST(PsiTilde, PZeroDropsShiftedFactor)
{
    const ellsel::QSeries qs({0.0, 0.07});
    const ParameterSet ps = generic_set(1, Balancing::One, qs.nomes());
    const std::vector<cplx> z{std::polar(1.0, 0.8)};
    ellsel::KernelSpec spec;
    spec.n = 1;
    for (int m = 1; m <= 5; ++m) {
        spec.direct.push_back(ps[m]);
    }
    EXPECT_LT(rel(ellsel::psi_tilde(z, ps, qs), ellsel::Kernel(spec, qs)(z)), 1e-15);
}

TEST(PsiTilde, InversionSymmetric)
{
    const ellsel::QSeries qs({0.002, 0.1});
    const ParameterSet ps = generic_set(2, Balancing::One, qs.nomes());
    const std::vector<cplx> z{std::polar(1.0, 0.4), std::polar(1.0, 2.2)};
    std::vector<cplx> w{z[0], 1.0 / z[1]};
    EXPECT_LT(rel(ellsel::psi_tilde(z, ps, qs), ellsel::psi_tilde(w, ps, qs)), 1e-13);
}

TEST(QShift, ZRatioMatchesDirectRatio)
{
    const ellsel::QSeries qs({0.002, cplx(0.1, 0.03)});
    for (int n : {1, 2, 3}) {
        const ParameterSet ps = generic_set(n, Balancing::One, qs.nomes());
        std::vector<cplx> z;
        for (int k = 0; k < n; ++k) {
            z.push_back(std::polar(1.0, 0.3 + 1.7 * k));
        }
        for (int i = 1; i <= n; ++i) {
            std::vector<cplx> s = z;
            s[static_cast<std::size_t>(i - 1)] *= qs.q();
            const cplx direct = ellsel::psi_tilde(s, ps, qs) / ellsel::psi_tilde(z, ps, qs);
            EXPECT_LT(rel(ellsel::qshift_ratio_z(i, z, ps, qs), direct), 1e-9) << "n=" << n << " i=" << i;
        }
    }
}

TEST(QShift, ZRatioInvariantUnderOtherInversions)
{
    const ellsel::QSeries qs({0.002, 0.1});
    const ParameterSet ps = generic_set(2, Balancing::One, qs.nomes());
    const std::vector<cplx> z{std::polar(1.0, 0.4), std::polar(1.0, 2.2)};
    const std::vector<cplx> w{z[0], 1.0 / z[1]};
    EXPECT_LT(rel(ellsel::qshift_ratio_z(1, z, ps, qs), ellsel::qshift_ratio_z(1, w, ps, qs)), 1e-13);
}

TEST(QShift, ParameterRatioMatchesDirectRatio)
{
    const ellsel::QSeries qs({0.002, 0.1});
    struct Case {
        int n;
        int m;
    };
    for (const Case c : {Case{1, 1}, Case{1, 4}, Case{2, 6}, Case{2, 2}}) {
        const ParameterSet ps = generic_set(c.n, Balancing::One, qs.nomes());
        std::vector<cplx> z;
        for (int k = 0; k < c.n; ++k) {
            z.push_back(std::polar(1.0, 0.9 + 1.1 * k));
        }
        const ParameterSet moved = ps.with_parameter(c.m, qs.q() * ps[c.m]);
        const cplx direct = ellsel::psi_tilde(z, moved, qs) / ellsel::psi_tilde(z, ps, qs);
        EXPECT_LT(rel(ellsel::qshift_ratio_a(c.m, z, ps, qs), direct), 1e-9) << "n=" << c.n << " m=" << c.m;
    }
}

TEST(QShift, ParameterRatioAtSignPoints)
{
    const ellsel::QSeries qs({0.002, 0.1});
    const ParameterSet ps = generic_set(1, Balancing::One, qs.nomes());
    for (double s : {1.0, -1.0}) {
        const std::vector<cplx> z{s};
        const cplx th = qs.theta_p(s * ps[2]);
        EXPECT_LT(rel(ellsel::qshift_ratio_a(2, z, ps, qs), th * th), 1e-15);
    }
}

TEST(JClosed, FrozenOracleValue)
{
    EXPECT_LT(std::abs(ellsel::j_closed(example_set(), ellsel::QSeries(example_nomes)) - j_example), 1e-14);
}

TEST(JClosed, SatisfiesTheQDifferenceSystem)
{
    const ellsel::QSeries qs({0.05, 0.07});
    for (int n : {1, 2, 3}) {
        const ParameterSet ps = generic_set(n, Balancing::PQ, qs.nomes());
        for (int k = 1; k <= 5; ++k) {
            const ParameterSet s = ps.shifted(k, qs.q(), qs.nomes());
            const cplx lhs = ellsel::j_closed(ps, qs);
            const cplx rhs = ellsel::j_closed(s, qs) * ellsel::qde_factor(k, ps, qs, 1.0 / qs.q());
            EXPECT_LT(rel(lhs, rhs), 1e-10) << "n=" << n << " k=" << k;
        }
    }
}

TEST(JClosed, ReflectionPairsCancel)
{
    // a_1 a_2 = pq / (a_3 a_4): Gamma(a_1 a_2) Gamma(a_3 a_4) = 1 at n = 1.
    const ellsel::QSeries qs({0.05, 0.07});
    const cplx a1(0.3, 0.2), a3(0.5, -0.1), a4(-0.4, 0.3);
    const cplx a2 = 0.05 * 0.07 / (a1 * a3 * a4);
    EXPECT_LT(std::abs(qs.gamma(a1 * a2) * qs.gamma(a3 * a4) - 1.0), 1e-13);
}

TEST(CConstant, BaseCasesAndFrozenValue)
{
    const ellsel::QSeries qs({0.05, 0.07});
    // c_0 = 1 is the starting value of the recurrence for c_n.
    EXPECT_EQ(ellsel::c_constant(0, 0.3, qs), cplx(1.0, 0.0));
    EXPECT_LT(rel(ellsel::c_constant(1, 0.3, qs), 2.0 / (qs.pp() * qs.qq())), 1e-15);
    EXPECT_LT(rel(ellsel::c_constant(2, 0.3, qs), c2_example), 1e-14);
}

TEST(CConstant, Recurrence)
{
    const ellsel::QSeries qs({cplx(0.05, 0.01), 0.07});
    const cplx t(0.3, 0.2);
    for (int n = 1; n <= 5; ++n) {
        const cplx step = ellsel::c_constant(n - 1, t, qs) * 2.0 * static_cast<double>(n) *
                          qs.gamma(ellsel::ipow(t, n)) / (qs.gamma(t) * qs.pp() * qs.qq());
        EXPECT_LT(rel(ellsel::c_constant(n, t, qs), step), 1e-12);
    }
}

TEST(Domains, Classification)
{
    const ellsel::Nomes nomes{0.01, 0.02};
    ParameterSet ps = ParameterSet::free_set(1, 0.3, {0.5, -0.5, cplx(0.0, 0.5), 0.5, 0.5, 0.5});
    EXPECT_LT(0.01 * 0.02, std::pow(0.5, 5));
    const ellsel::Domain d = ellsel::domain_classify(ps, nomes, 0.9, 0.01);
    EXPECT_NE(d, ellsel::Domain::Outside);
    EXPECT_NE(d, ellsel::Domain::U);
    ps.a[0] = 1.01;
    EXPECT_EQ(ellsel::domain_classify(ps, nomes, 0.9, 0.01), ellsel::Domain::Outside);
}

TEST(Domains, W0Witness)
{
    // |p| < |q|^{25/4} |t|^{2n-2} guarantees admissible radii.
    const ellsel::Nomes nomes{1e-9, 0.1};
    const cplx t = 0.8;
    const auto radii = ellsel::w0_radii(nomes, t, 2);
    ASSERT_TRUE(radii.has_value());
    const auto [r, s] = *radii;
    EXPECT_LT(r, std::pow(0.1, 0.25));
    EXPECT_LT(s, 0.1);
    EXPECT_LE(1e-9, std::pow(s, 5) * std::pow(r, 5) * std::pow(0.8, 2));
    const double mid = std::sqrt(s) * r;
    ParameterSet ps = ParameterSet::free_set(2, t, {mid, mid, mid, mid, mid, 0.1});
    EXPECT_EQ(ellsel::domain_classify(ps, nomes, r, s), ellsel::Domain::W0);
    EXPECT_FALSE(ellsel::w0_radii({0.5, 0.1}, t, 2).has_value());
}

TEST(Domains, PoleSetsDisjointInsideTheBox)
{
    const ellsel::Nomes nomes{0.05, 0.07};
    const ParameterSet ps = generic_set(1, Balancing::PQ, nomes);
    const ellsel::PoleSets sets = ellsel::pole_sets(ps, nomes, 0.05);
    EXPECT_FALSE(sets.s0.empty());
    EXPECT_TRUE(sets.disjoint());
    for (const auto &x : sets.s0) {
        EXPECT_GE(std::abs(x.value), 0.05 - 1e-15);
    }
}
