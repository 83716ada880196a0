#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <ellsel/verify.hpp>

using ellsel::Balancing;
using ellsel::cplx;
using ellsel::ParameterSet;
using ellsel::ScenarioContext;

namespace
{

ScenarioContext context(const std::string &name, const ellsel::Nomes &nomes, double tol)
{
    ScenarioContext ctx;
    ctx.scenario = name;
    ctx.nomes = nomes;
    ctx.tol = tol;
    ctx.quad.tol = tol * 1e-2;
    return ctx;
}

ellsel::SampleRequest request(Balancing mode, int n, const ellsel::Nomes &nomes, std::uint64_t seed, int count)
{
    ellsel::SampleRequest req;
    req.mode = mode;
    req.n = n;
    req.nomes = nomes;
    req.seed = seed;
    req.count = count;
    return req;
}

} // namespace

TEST(Sampler, SeedReproducesParameterLists)
{
    const auto req = request(Balancing::PQ, 2, {0.02, 0.05}, 42, 6);
    const auto a = ellsel::sample_parameters(req);
    const auto b = ellsel::sample_parameters(req);
    ASSERT_EQ(a.sets.size(), 6U);
    for (std::size_t k = 0; k < a.sets.size(); ++k) {
        EXPECT_EQ(a.sets[k].a, b.sets[k].a);
        EXPECT_EQ(a.sets[k].t, b.sets[k].t);
    }
    auto other = req;
    other.seed = 43;
    EXPECT_NE(ellsel::sample_parameters(other).sets[0].a, a.sets[0].a);
}

TEST(Sampler, SetsAreBalancedAndInsideTheBox)
{
    for (Balancing mode : {Balancing::PQ, Balancing::P, Balancing::One}) {
        const ellsel::Nomes nomes{0.002, 0.1};
        const auto batch = ellsel::sample_parameters(request(mode, 2, nomes, 7, 20));
        for (const auto &ps : batch.sets) {
            EXPECT_LT(ps.balancing_residual(nomes), 1e-14);
            for (int m = 1; m <= 5; ++m) {
                EXPECT_GE(std::abs(ps[m]), 0.15);
                EXPECT_LE(std::abs(ps[m]), 0.7);
            }
            EXPECT_GE(std::abs(ps.t), 0.2);
            EXPECT_LE(std::abs(ps.t), 0.5);
        }
    }
}

TEST(Sampler, RejectionsAreCounted)
{
    const ellsel::Nomes nomes{0.05, 0.07};
    const auto batch = ellsel::sample_parameters(request(Balancing::PQ, 1, nomes, 3, 10),
                                                 ellsel::accept_eval_formula(ellsel::SafeBox{}));
    EXPECT_EQ(batch.sets.size(), 10U);
    EXPECT_EQ(batch.attempts, 10 + batch.rejected);
    EXPECT_GT(batch.rejected, 0);
    for (const auto &ps : batch.sets) {
        EXPECT_LE(std::abs(ps[6]), 0.7);
    }
}

TEST(Sampler, InfeasibleBoxIsAConfigurationError)
{
    // |p||q| < |t|^{2n-2} cannot hold for |t| <= 0.5 at n = 4 with p = q = 0.2.
    EXPECT_THROW(ellsel::sample_parameters(request(Balancing::PQ, 4, {0.2, 0.2}, 1, 1)), ellsel::config_error);
    EXPECT_THROW(ellsel::sample_parameters(request(Balancing::PQ, 1, {0.5, 0.1}, 1, 1)), ellsel::config_error);
    auto req = request(Balancing::PQ, 1, {0.05, 0.07}, 1, 1);
    req.box.max_attempts = 5;
    EXPECT_THROW(ellsel::sample_parameters(req, [](const ParameterSet &) { throw ellsel::sample_rejected("no"); }),
                 ellsel::config_error);
    req.box.a_min = 0.9;
    req.box.a_max = 0.8;
    EXPECT_THROW(ellsel::sample_parameters(req), ellsel::config_error);
}

TEST(Report, PassRule)
{
    ellsel::ScenarioReport rep;
    rep.tol = 1e-8;
    rep.lhs = 2.0;
    rep.rhs = 2.0 + 1e-9;
    ellsel::finalize(rep);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.rel_err, 5e-10, 1e-15);
    rep.rhs = 2.0 + 1e-7;
    ellsel::finalize(rep);
    EXPECT_FALSE(rep.pass);
    // Both sides tiny: absolute error decides.
    rep.lhs = 1e-14;
    rep.rhs = 0.0;
    ellsel::finalize(rep);
    EXPECT_EQ(rep.rel_err, rep.abs_err);
    EXPECT_TRUE(rep.pass);
}

TEST(EvalFormula, RankOneExamplePoint)
{
    const ellsel::Nomes nomes{0.05, 0.07};
    const auto ps = ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::PQ, nomes);
    const auto rep = ellsel::scenario_eval_formula(ps, context("eval_formula", nomes, 1e-8));
    EXPECT_TRUE(rep.pass) << rep.reason << " rel=" << rep.rel_err;
    EXPECT_EQ(rep.a.size(), 6U);
    EXPECT_EQ(rep.balancing, "pq");
}

TEST(EvalFormula, PZeroDegeneration)
{
    const ellsel::Nomes nomes{0.0, 0.07};
    const auto ps = ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::PQ, nomes);
    const auto rep = ellsel::scenario_eval_formula(ps, context("eval_formula", nomes, 1e-8));
    EXPECT_TRUE(rep.pass) << rep.reason << " rel=" << rep.rel_err;
}

TEST(EvalFormula, RankTwo)
{
    const ellsel::Nomes nomes{0.02, 0.05};
    const auto ps = ParameterSet::balanced(2, 0.3, {cplx(0.5, 0.1), 0.4, 0.5, -0.45, 0.55}, Balancing::PQ, nomes);
    const auto rep = ellsel::scenario_eval_formula(ps, context("eval_formula", nomes, 1e-6));
    EXPECT_TRUE(rep.pass) << rep.reason << " rel=" << rep.rel_err;
}

TEST(EvalFormula, WrongBalancingIsAFailedReport)
{
    const ellsel::Nomes nomes{0.002, 0.1};
    const auto ps = ParameterSet::balanced(1, 0.3, {0.3, 0.4, 0.5, -0.2, 0.25}, Balancing::One, nomes);
    const auto rep = ellsel::scenario_eval_formula(ps, context("eval_formula", nomes, 1e-8));
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.reason.empty());
}

TEST(Qde, RankOneAllIndices)
{
    const ellsel::Nomes nomes{0.002, 0.1};
    const auto ps = ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::PQ, nomes);
    const auto reps = ellsel::scenario_qde(ps, {1, 2, 3, 4, 5}, context("qde", nomes, 1e-7));
    ASSERT_EQ(reps.size(), 5U);
    for (const auto &r : reps) {
        EXPECT_TRUE(r.pass) << r.label << ": " << r.reason << " rel=" << r.rel_err;
    }
}

TEST(Qde, RankTwoIndexThree)
{
    const ellsel::Nomes nomes{2e-4, 0.1};
    const auto ps = ParameterSet::balanced(2, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::PQ, nomes);
    const auto reps = ellsel::scenario_qde(ps, {3}, context("qde", nomes, 1e-6));
    ASSERT_EQ(reps.size(), 1U);
    EXPECT_TRUE(reps[0].pass) << reps[0].reason << " rel=" << reps[0].rel_err;
}

TEST(Qde, PBalancedVariant)
{
    const ellsel::Nomes nomes{0.002, 0.1};
    const auto ps = ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::P, nomes);
    for (const auto &r : ellsel::scenario_qde(ps, {1, 4}, context("qde", nomes, 1e-7))) {
        EXPECT_TRUE(r.pass) << r.label << ": " << r.reason;
    }
}

TEST(Qde, ShiftLeavingTheDiskIsRejected)
{
    // a_6 / q has modulus > 1, so the shifted integral has a pole inside.
    const ellsel::Nomes nomes{0.05, 0.07};
    const auto ps = ParameterSet::balanced(1, 0.3, {0.5, 0.5, 0.5, 0.5, 0.5}, Balancing::PQ, nomes);
    const auto reps = ellsel::scenario_qde(ps, {1}, context("qde", nomes, 1e-7));
    ASSERT_EQ(reps.size(), 1U);
    EXPECT_FALSE(reps[0].pass);
    EXPECT_NE(reps[0].reason.find("rejected"), std::string::npos) << reps[0].reason;
}

TEST(Recurrence, RankOneAndTwo)
{
    const ellsel::Nomes n1{0.002, 0.1};
    const auto p1 = ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::One, n1);
    const auto r1 = ellsel::scenario_recurrence(p1, context("recurrence", n1, 1e-7));
    ASSERT_EQ(r1.size(), 2U);
    for (const auto &r : r1) {
        EXPECT_TRUE(r.pass) << r.label << ": " << r.reason;
    }
    const ellsel::Nomes n2{2e-4, 0.1};
    const auto p2 = ParameterSet::balanced(2, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::One, n2);
    const auto r2 = ellsel::scenario_recurrence(p2, context("recurrence", n2, 1e-6));
    ASSERT_EQ(r2.size(), 3U);
    EXPECT_EQ(r2.back().label, "telescope");
    for (const auto &r : r2) {
        EXPECT_TRUE(r.pass) << r.label << ": " << r.reason;
    }
}

TEST(Recurrence, DegenerateGuardRejectsSample)
{
    ellsel::SafeBox box;
    box.theta_floor = 1e10;
    const ellsel::QSeries qs({0.002, 0.1});
    const auto ps = ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::One, qs.nomes());
    EXPECT_THROW(ellsel::accept_expectation(box, qs)(ps), ellsel::sample_rejected);
    EXPECT_NO_THROW(ellsel::accept_expectation(ellsel::SafeBox{}, qs)(ps));
}

TEST(Nabla, RankOneVanishes)
{
    const ellsel::Nomes nomes{0.002, 0.1};
    const auto ps = ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::One, nomes);
    const auto rep = ellsel::scenario_nabla(ps, 1, 1, context("nabla", nomes, 1e-7));
    EXPECT_TRUE(rep.pass) << rep.reason;
    EXPECT_EQ(rep.rhs, cplx(0.0, 0.0));
}

TEST(Nabla, RejectedSampleViaConfig)
{
    ellsel::RunConfig cfg;
    cfg.scenario = "nabla";
    cfg.n = 1;
    cfg.a = std::vector<cplx>{0.69, 0.69, 0.69, 0.69, 0.69};
    cfg.t = cplx(0.3, 0.0);
    cfg.p = cplx(0.05, 0.0);
    cfg.q = cplx(0.07, 0.0);
    // a_6 = 1/(0.69^5) and |p a_6| = 0.31 passes; raise p so |p a_6| > 0.7.
    cfg.p = cplx(0.19, 0.0);
    const auto reps = ellsel::run(cfg);
    ASSERT_EQ(reps.size(), 1U);
    EXPECT_FALSE(reps[0].pass);
    EXPECT_NE(reps[0].reason.find("rejected"), std::string::npos);
}

TEST(DixonAnderson, RankOneCoincidesWithEvaluation)
{
    const ellsel::Nomes nomes{0.05, 0.07};
    const auto ps = ParameterSet::balanced(1, 0.3, {cplx(0.4, 0.2), 0.5, -0.3, 0.35, 0.6}, Balancing::PQ, nomes);
    const std::vector<cplx> a(ps.a.begin(), ps.a.end());
    const auto da = ellsel::scenario_dixon_anderson(1, a, context("dixon_anderson", nomes, 1e-8), 1.0);
    const auto ev = ellsel::scenario_eval_formula(ps, context("eval_formula", nomes, 1e-8));
    EXPECT_TRUE(da.pass) << da.reason;
    EXPECT_LT(std::abs(da.lhs - ev.lhs), 1e-13 * std::abs(ev.lhs));
    EXPECT_LT(std::abs(da.rhs - ev.rhs), 1e-13 * std::abs(ev.rhs));
}

TEST(DixonAnderson, RankTwoSampled)
{
    const ellsel::Nomes nomes{0.01, 0.02};
    const auto batch = ellsel::sample_dixon_anderson(2, nomes, 1.0, 42, 2, ellsel::SafeBox{});
    for (std::size_t s = 0; s < batch.sets.size(); ++s) {
        const auto rep = ellsel::scenario_dixon_anderson(2, batch.sets[s], context("dixon_anderson", nomes, 1e-6), 1.0);
        EXPECT_TRUE(rep.pass) << rep.reason << " rel=" << rep.rel_err;
    }
}

TEST(DixonAnderson, ConstraintViolationIsRejected)
{
    const ellsel::Nomes nomes{0.05, 0.07};
    const std::vector<cplx> a{0.3, 0.4, 0.5, -0.2, 0.25, 0.3};
    const auto rep = ellsel::scenario_dixon_anderson(1, a, context("dixon_anderson", nomes, 1e-8), 1.0);
    EXPECT_FALSE(rep.pass);
    EXPECT_NE(rep.reason.find("rejected"), std::string::npos);
}

TEST(Pinch, SuitePasses)
{
    ellsel::RunConfig cfg;
    cfg.scenario = "pinch";
    cfg.count = 1;
    const auto reps = ellsel::run(cfg);
    EXPECT_GE(reps.size(), 10U);
    for (const auto &r : reps) {
        EXPECT_TRUE(r.pass) << r.label << ": " << r.reason << " rel=" << r.rel_err;
    }
}

TEST(RunConfig, DefaultsAndValidation)
{
    ellsel::RunConfig cfg;
    cfg.scenario = "bogus";
    EXPECT_THROW(ellsel::run(cfg), ellsel::config_error);
    cfg.scenario = "recurrence";
    cfg.balancing = Balancing::PQ;
    EXPECT_THROW(ellsel::run(cfg), ellsel::config_error);
    cfg.scenario = "all";
    cfg.balancing.reset();
    cfg.a = std::vector<cplx>{0.1, 0.2, 0.3, 0.4, 0.5};
    EXPECT_THROW(ellsel::run(cfg), ellsel::config_error);
}

TEST(RunConfig, RepeatedRunsAreIdentical)
{
    ellsel::RunConfig cfg;
    cfg.scenario = "qde";
    cfg.n = 1;
    cfg.count = 2;
    const auto a = ellsel::run(cfg);
    const auto b = ellsel::run(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].lhs, b[k].lhs);
        EXPECT_EQ(a[k].rhs, b[k].rhs);
        EXPECT_EQ(a[k].a, b[k].a);
        EXPECT_EQ(a[k].runtime_ms, 0);
    }
}
