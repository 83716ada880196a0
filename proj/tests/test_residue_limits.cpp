#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include <ellsel/residue_limits.hpp>

using ellsel::Balancing;
using ellsel::cplx;
using ellsel::ParameterSet;

namespace
{

double rel(cplx a, cplx b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

const ellsel::Nomes nomes{0.05, 0.07};

ParameterSet outside_set(double modulus)
{
    return ParameterSet::balanced(1, 0.3, {std::polar(modulus, 0.4), 0.5, -0.4, 0.45, cplx(0.2, 0.3)}, Balancing::PQ,
                                  nomes);
}

ParameterSet pinch_limit(int n)
{
    const cplx a1 = std::polar(1.05, 0.4);
    return ParameterSet::balanced(n, cplx(0.3, 0.1), {a1, 1.0 / a1, 0.5, -0.4, 0.45}, Balancing::PQ, nomes);
}

} // namespace

TEST(Residue, MatchesContourIntegral)
{
    const ellsel::QSeries qs(nomes);
    for (const cplx a : {cplx(0.4, 0.2), cplx(-0.6, 0.1), cplx(0.3, -0.5)}) {
        EXPECT_LT(rel(ellsel::residue_contour_numeric(a, a, qs), ellsel::residue_gamma_pm(a, qs)), 1e-8);
        EXPECT_LT(rel(ellsel::residue_contour_numeric(a, 1.0 / a, qs), ellsel::residue_gamma_pm(a, qs, true)), 1e-8);
    }
}

TEST(Residue, OppositeResiduesAtInversePoles)
{
    const ellsel::QSeries qs(nomes);
    const cplx a(0.4, 0.2);
    EXPECT_EQ(ellsel::residue_gamma_pm(a, qs, true), -ellsel::residue_gamma_pm(a, qs));
}

TEST(Residue, FirstOrderApproach)
{
    const ellsel::QSeries qs(nomes);
    const cplx a(0.4, 0.2);
    const double eps = 1e-5;
    const cplx z = a * (1.0 + eps);
    EXPECT_LT(rel((z - a) * qs.gamma_pm(a, z) / z, ellsel::residue_gamma_pm(a, qs)), 10 * eps);
}

TEST(Residue, PZeroDegeneration)
{
    const ellsel::QSeries qs({0.0, 0.07});
    const cplx a(0.4, 0.2);
    const cplx expected = 1.0 / (ellsel::qpoch_inf(a * a, 0.07) * ellsel::qpoch_inf(0.07, 0.07));
    EXPECT_LT(rel(ellsel::residue_gamma_pm(a, qs), expected), 1e-14);
}

TEST(ContinuedIntegral, InsideTheDiskIsThePlainIntegral)
{
    const ellsel::QSeries qs(nomes);
    const ParameterSet ps = outside_set(0.8);
    const auto ci = ellsel::continued_integral_n1(ps, qs);
    EXPECT_EQ(ci.outside_index, 0);
    EXPECT_EQ(ci.correction, cplx(0.0, 0.0));
    EXPECT_EQ(ci.value, ellsel::integrate_kernel(ellsel::psi_kernel(ps, qs)).value);
    EXPECT_LT(rel(ci.value, ellsel::evaluation_rhs(ps, qs)), 1e-10);
}

TEST(ContinuedIntegral, OutsideMatchesEvaluationFormula)
{
    const ellsel::QSeries qs(nomes);
    ellsel::QuadOptions opts;
    opts.tol = 1e-12;
    opts.budget = 2048;
    const ParameterSet ps = outside_set(1.05);
    const auto ci = ellsel::continued_integral_n1(ps, qs, opts);
    EXPECT_EQ(ci.outside_index, 1);
    EXPECT_LT(rel(ci.value, ellsel::evaluation_rhs(ps, qs)), 1e-6);
}

TEST(ContinuedIntegral, SolvedParameterOutside)
{
    // The rank-one example point: a_6 = pq / (a_1 ... a_5) has modulus 7/6.
    const ellsel::QSeries qs(nomes);
    const ParameterSet ps = ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::PQ, nomes);
    const auto ci = ellsel::continued_integral_n1(ps, qs);
    EXPECT_EQ(ci.outside_index, 6);
    EXPECT_LT(rel(ci.value, ellsel::evaluation_rhs(ps, qs)), 1e-8);
}

TEST(ContinuedIntegral, ContinuousAcrossTheUnitCircle)
{
    const ellsel::QSeries qs(nomes);
    ellsel::QuadOptions opts;
    opts.tol = 1e-12;
    opts.budget = 4096;
    const double delta = 0.02;
    const ParameterSet in = outside_set(1.0 - delta);
    const ParameterSet out = outside_set(1.0 + delta);
    const cplx jump = ellsel::continued_integral_n1(out, qs, opts).value - ellsel::continued_integral_n1(in, qs, opts).value;
    const cplx expected = ellsel::evaluation_rhs(out, qs) - ellsel::evaluation_rhs(in, qs);
    EXPECT_LT(std::abs(jump - expected), 1e-6 * std::abs(ellsel::evaluation_rhs(in, qs)));
}

TEST(ContinuedIntegral, DomainChecks)
{
    const ellsel::QSeries qs(nomes);
    EXPECT_THROW(ellsel::continued_integral_n1(outside_set(1.0 / std::sqrt(0.07) + 0.1), qs), ellsel::domain_error);
    ParameterSet two = outside_set(1.05);
    two.a[1] = 1.1;
    EXPECT_THROW(ellsel::continued_integral_n1(two, qs), ellsel::domain_error);
    EXPECT_THROW(ellsel::continued_integral_n1(pinch_limit(2), qs), ellsel::domain_error);
}

TEST(Richardson, RemovesLinearTerm)
{
    auto f = [](double e) { return cplx(2.0, -1.0) + cplx(3.0, 0.5) * e; };
    EXPECT_LT(std::abs(ellsel::richardson_limit(f, 1e-3, 1e-4) - cplx(2.0, -1.0)), 1e-15);
    EXPECT_THROW(ellsel::richardson_limit(f, 1e-3, 1e-3), ellsel::domain_error);
}

TEST(PinchLimit, RankOneReducesToFourGammaPairs)
{
    const ellsel::QSeries qs(nomes);
    const ParameterSet lim = pinch_limit(1);
    cplx expected = 1.0 / (qs.pp() * qs.qq());
    for (int m = 3; m <= 6; ++m) {
        expected *= qs.gamma(lim[1] * lim[m]) * qs.gamma(lim[m] / lim[1]);
    }
    EXPECT_LT(rel(ellsel::lim_pinch_J(lim, qs), expected), 1e-13);
}

TEST(PinchLimit, MatchesExtrapolatedLimit)
{
    const ellsel::QSeries qs(nomes);
    for (int n : {1, 2}) {
        const ParameterSet lim = pinch_limit(n);
        EXPECT_LT(rel(ellsel::lim_pinch_J_numeric(lim, qs), ellsel::lim_pinch_J(lim, qs)), 1e-6) << "n=" << n;
    }
    ParameterSet off = pinch_limit(1);
    off.a[1] *= 1.01;
    EXPECT_THROW(ellsel::lim_pinch_J(off, qs), ellsel::domain_error);
}

TEST(PinchLimit, RankOneIdentity)
{
    const ellsel::QSeries qs(nomes);
    ellsel::QuadOptions opts;
    opts.tol = 1e-12;
    opts.budget = 4096;
    const ParameterSet lim = pinch_limit(1);
    EXPECT_LT(rel(ellsel::pinch_identity_lhs(lim, qs, opts), ellsel::pinch_identity_rhs(lim, qs)), 1e-5);
}

TEST(CnRecurrence, DefectIsRoundOff)
{
    const ellsel::QSeries qs(nomes);
    EXPECT_LT(ellsel::cn_recurrence_check(1, 0.3, qs), 1e-13);
    for (int n = 2; n <= 5; ++n) {
        EXPECT_LT(ellsel::cn_recurrence_check(n, cplx(0.3, 0.2), qs), 1e-12);
    }
    EXPECT_EQ(ellsel::cn_recurrence_check(3, 0.3, qs), ellsel::cn_recurrence_check(3, 0.3, qs));
    EXPECT_THROW(ellsel::cn_recurrence_check(0, 0.3, qs), ellsel::domain_error);
}
