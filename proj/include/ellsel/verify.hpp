// Scenario runner: deterministic parameter sampling, the verification
// scenarios and their pass/fail reports.

#ifndef ELLSEL_VERIFY_HPP
#define ELLSEL_VERIFY_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bc_invariants.hpp"
#include "errors.hpp"
#include "integrand.hpp"
#include "params.hpp"
#include "qseries.hpp"
#include "residue_limits.hpp"
#include "torus_quadrature.hpp"

namespace ellsel
{

/// Sampler bounds. Free parameters get moduli in [a_min, a_max] and uniform
/// phases; every parameter that enters an integrand (including solved ones
/// and shifted copies) must have modulus <= max_modulus.
struct SafeBox {
    double a_min = 0.15;
    double a_max = 0.7;
    double t_min = 0.2;
    double t_max = 0.5;
    double max_modulus = 0.7;
    double nome_max = 0.2;
    /// Smallest admissible |theta| in a C_r denominator.
    double theta_floor = 1e-10;
    int max_attempts = 200000;

    void validate() const
    {
        if (!(0.0 < a_min && a_min <= a_max && a_max < 1.0)) {
            throw config_error("safe box needs 0 < a_min <= a_max < 1");
        }
        if (!(0.0 < t_min && t_min <= t_max && t_max < 1.0)) {
            throw config_error("safe box needs 0 < t_min <= t_max < 1");
        }
        if (!(0.0 < max_modulus && max_modulus < 1.0)) {
            throw config_error("safe box needs 0 < max_modulus < 1");
        }
        if (!(0.0 <= nome_max && nome_max < 1.0)) {
            throw config_error("safe box needs 0 <= nome_max < 1");
        }
        if (max_attempts < 1) {
            throw config_error("safe box needs max_attempts >= 1");
        }
    }
};

/// mt19937_64 with explicit conversions, so draws are identical on every
/// platform.
class Sampler
{
public:
    explicit Sampler(std::uint64_t seed) : m_rng(seed) {}

    double uniform(double lo, double hi)
    {
        const double u = static_cast<double>(m_rng() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    cplx polar(double lo, double hi)
    {
        const double mod = uniform(lo, hi);
        const double phase = uniform(0.0, 2.0 * std::numbers::pi);
        return std::polar(mod, phase);
    }

private:
    std::mt19937_64 m_rng;
};

/// Throws sample_rejected to discard a draw.
using SamplePredicate = std::function<void(const ParameterSet &)>;

struct SampleRequest {
    Balancing mode = Balancing::PQ;
    int n = 1;
    Nomes nomes{0.0, 0.0};
    std::uint64_t seed = 42;
    int count = 1;
    SafeBox box;
    std::optional<cplx> t;
    /// Per-index modulus ranges replacing [a_min, a_max] (index 0 is a_1).
    std::array<std::optional<std::pair<double, double>>, 5> modulus_override{};
};

struct SampleBatch {
    std::vector<ParameterSet> sets;
    int attempts = 0;
    int rejected = 0;
};

inline void require_sampling_feasible(const SampleRequest &req)
{
    req.box.validate();
    req.nomes.validate();
    if (req.count < 1) {
        throw config_error("sample count must be >= 1");
    }
    if (std::abs(req.nomes.p) > req.box.nome_max || std::abs(req.nomes.q) > req.box.nome_max) {
        throw config_error("nomes outside the safe box (|p|, |q| <= " + std::to_string(req.box.nome_max) + ")");
    }
    const double tmax = req.t ? std::abs(*req.t) : req.box.t_max;
    if (!(std::abs(req.nomes.p) * std::abs(req.nomes.q) < std::pow(tmax, 2 * req.n - 2))) {
        throw config_error("infeasible box: |p||q| < |t|^{2n-2} fails, so U_0 is empty");
    }
}

/// Deterministic draws of balanced parameter sets; each accepted set passed
/// the balancing check and `accept`.
inline SampleBatch sample_parameters(const SampleRequest &req, const SamplePredicate &accept = {})
{
    require_sampling_feasible(req);
    Sampler rng(req.seed);
    SampleBatch batch;
    while (static_cast<int>(batch.sets.size()) < req.count) {
        if (batch.attempts >= req.box.max_attempts) {
            throw config_error("infeasible safe box: " + std::to_string(batch.sets.size()) + " of " +
                               std::to_string(req.count) + " samples after " + std::to_string(batch.attempts) +
                               " attempts");
        }
        ++batch.attempts;
        const cplx t = req.t ? *req.t : rng.polar(req.box.t_min, req.box.t_max);
        std::array<cplx, 5> free{};
        for (std::size_t m = 0; m < 5; ++m) {
            const auto range = req.modulus_override[m].value_or(std::make_pair(req.box.a_min, req.box.a_max));
            free[m] = rng.polar(range.first, range.second);
        }
        try {
            ParameterSet ps = ParameterSet::balanced(req.n, t, free, req.mode, req.nomes);
            if (accept) {
                accept(ps);
            }
            batch.sets.push_back(ps);
        } catch (const sample_rejected &) {
            ++batch.rejected;
        } catch (const domain_error &) {
            ++batch.rejected;
        } catch (const degenerate_error &) {
            ++batch.rejected;
        } catch (const pole_error &) {
            ++batch.rejected;
        }
    }
    return batch;
}

/// Dixon-Anderson parameters: 2n+3 free values, the last one solved from
/// prod a_m = (pq)^exponent.
struct DixonAndersonBatch {
    std::vector<std::vector<cplx>> sets;
    int attempts = 0;
    int rejected = 0;
};

inline cplx dixon_anderson_solve(std::span<const cplx> free, const Nomes &nomes, double exponent)
{
    cplx prod(1.0, 0.0);
    for (const auto &x : free) {
        prod *= x;
    }
    const cplx pq = nomes.p * nomes.q;
    if (pq == cplx(0.0, 0.0)) {
        throw domain_error("Dixon-Anderson constraint needs pq != 0");
    }
    return std::pow(pq, exponent) / prod;
}

inline DixonAndersonBatch sample_dixon_anderson(int n, const Nomes &nomes, double exponent, std::uint64_t seed,
                                                int count, const SafeBox &box)
{
    SampleRequest req;
    req.n = 1;
    req.nomes = nomes;
    req.count = count;
    req.box = box;
    req.t = cplx(box.t_max, 0.0);
    require_sampling_feasible(req);
    Sampler rng(seed);
    DixonAndersonBatch batch;
    const int k = 2 * n + 3;
    while (static_cast<int>(batch.sets.size()) < count) {
        if (batch.attempts >= box.max_attempts) {
            throw config_error("infeasible safe box for the Dixon-Anderson sampler");
        }
        ++batch.attempts;
        std::vector<cplx> a(static_cast<std::size_t>(k));
        for (auto &x : a) {
            x = rng.polar(box.a_min, box.a_max);
        }
        const cplx last = dixon_anderson_solve(a, nomes, exponent);
        if (std::abs(last) > box.max_modulus) {
            ++batch.rejected;
            continue;
        }
        a.push_back(last);
        batch.sets.push_back(std::move(a));
    }
    return batch;
}

/// One verification run. Field order here is the serialized order.
struct ScenarioReport {
    std::string scenario;
    std::string label;
    int sample = 0;
    std::uint64_t seed = 0;
    int n = 1;
    std::string balancing;
    cplx p{0.0, 0.0};
    cplx q{0.0, 0.0};
    cplx t{0.0, 0.0};
    std::vector<cplx> a;
    int N_used = 0;
    cplx lhs{0.0, 0.0};
    cplx rhs{0.0, 0.0};
    double abs_err = 0.0;
    double rel_err = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string reason;
    int rejected = 0;
    std::int64_t runtime_ms = 0;
    double tail_tol = 0.0;
    int max_terms = 0;
};

/// Magnitude below which the relative error falls back to the absolute one.
inline constexpr double magnitude_floor = 1e-12;

inline void finalize(ScenarioReport &rep)
{
    rep.abs_err = std::abs(rep.lhs - rep.rhs);
    const double mag = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
    rep.rel_err = mag < magnitude_floor ? rep.abs_err : rep.abs_err / mag;
    rep.pass = std::isfinite(rep.rel_err) && rep.rel_err <= rep.tol;
}

/// For identities of the form value = 0: rel_err = |value| / reference.
inline void finalize_vanishing(ScenarioReport &rep, double reference)
{
    rep.abs_err = std::abs(rep.lhs - rep.rhs);
    rep.rel_err = reference < magnitude_floor ? rep.abs_err : rep.abs_err / reference;
    rep.pass = std::isfinite(rep.rel_err) && rep.rel_err <= rep.tol;
}

inline void mark_failed(ScenarioReport &rep, const std::string &reason)
{
    rep.pass = false;
    rep.reason = reason;
    rep.abs_err = std::numeric_limits<double>::quiet_NaN();
    rep.rel_err = std::numeric_limits<double>::quiet_NaN();
}

/// Everything a scenario needs besides its parameter set.
struct ScenarioContext {
    std::string scenario;
    Nomes nomes{0.0, 0.0};
    TruncationPolicy policy;
    double tol = 1e-8;
    QuadOptions quad;
    std::uint64_t seed = 42;
    SafeBox box;
    bool timing = false;
};

namespace detail
{

inline ScenarioReport blank_report(const ScenarioContext &ctx, const std::string &label, int sample)
{
    ScenarioReport rep;
    rep.scenario = ctx.scenario;
    rep.label = label;
    rep.sample = sample;
    rep.seed = ctx.seed;
    rep.p = ctx.nomes.p;
    rep.q = ctx.nomes.q;
    rep.tol = ctx.tol;
    rep.tail_tol = ctx.policy.tail_tol;
    rep.max_terms = ctx.policy.max_terms;
    return rep;
}

inline void echo(ScenarioReport &rep, const ParameterSet &ps)
{
    rep.n = ps.n;
    rep.t = ps.t;
    rep.balancing = to_string(ps.balancing);
    rep.a.assign(ps.a.begin(), ps.a.end());
}

class Stopwatch
{
public:
    explicit Stopwatch(bool enabled) : m_enabled(enabled), m_start(std::chrono::steady_clock::now()) {}
    std::int64_t elapsed_ms() const
    {
        if (!m_enabled) {
            return 0;
        }
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - m_start)
            .count();
    }

private:
    bool m_enabled;
    std::chrono::steady_clock::time_point m_start;
};

/// Runs body(rep) and converts library exceptions into failed reports.
template <typename Body>
ScenarioReport guarded(ScenarioReport rep, bool timing, Body &&body)
{
    const Stopwatch clock(timing);
    try {
        body(rep);
    } catch (const sample_rejected &e) {
        mark_failed(rep, std::string("sample rejected: ") + e.what());
    } catch (const nonconvergence_error &e) {
        mark_failed(rep, std::string("non-convergence: ") + e.what());
    } catch (const pole_error &e) {
        mark_failed(rep, std::string("pole proximity: ") + e.what());
    } catch (const degenerate_error &e) {
        mark_failed(rep, std::string("degenerate: ") + e.what());
    } catch (const error &e) {
        mark_failed(rep, e.what());
    }
    rep.runtime_ms = clock.elapsed_ms();
    return rep;
}

inline void require_modulus(cplx x, double bound, const std::string &what)
{
    if (!(std::abs(x) <= bound)) {
        throw sample_rejected(what + " has modulus " + std::to_string(std::abs(x)) + " > " + std::to_string(bound));
    }
}

} // namespace detail

/// Integral of Psi over the cycle appropriate for the parameters: the torus
/// when all |a_m| < 1, the rank-one continued integral when one of them lies
/// outside.
inline QuadResult selberg_integral(const ParameterSet &params, const QSeries &qs, const QuadOptions &opts)
{
    bool outside = false;
    for (int m = 1; m <= 6; ++m) {
        outside = outside || std::abs(params[m]) > 1.0;
    }
    if (!outside) {
        return integrate_kernel(psi_kernel(params, qs), opts);
    }
    if (params.n != 1) {
        throw domain_error("parameters outside the unit disk are only supported at n = 1");
    }
    ContinuedIntegral ci = continued_integral_n1(params, qs, opts);
    QuadResult res = ci.torus;
    res.value = ci.value;
    return res;
}

// ---- sample predicates ----------------------------------------------------

inline SamplePredicate accept_eval_formula(const SafeBox &box)
{
    return [box](const ParameterSet &ps) {
        for (int m = 1; m <= 6; ++m) {
            detail::require_modulus(ps[m], box.max_modulus, "a_" + std::to_string(m));
        }
    };
}

inline SamplePredicate accept_qde(const SafeBox &box, const Nomes &nomes)
{
    return [box, nomes](const ParameterSet &ps) {
        for (int m = 1; m <= 6; ++m) {
            detail::require_modulus(ps[m], box.max_modulus, "a_" + std::to_string(m));
            if (m <= 5) {
                detail::require_modulus(nomes.q * ps[m], box.max_modulus, "q a_" + std::to_string(m));
            }
        }
        if (ps.balancing == Balancing::PQ) {
            detail::require_modulus(ps[6] / nomes.q, box.max_modulus, "q^{-1} a_6");
        } else {
            detail::require_modulus(nomes.q * ps[6], box.max_modulus, "q a_6");
        }
    };
}

inline SamplePredicate accept_expectation(const SafeBox &box, const QSeries &qs)
{
    return [box, qs](const ParameterSet &ps) {
        for (int m = 1; m <= 5; ++m) {
            detail::require_modulus(ps[m], box.max_modulus, "a_" + std::to_string(m));
        }
        detail::require_modulus(qs.p() * ps[6], box.max_modulus, "p a_6");
        for (int r = 1; r <= ps.n; ++r) {
            if (coefficient_C_min_denominator(r, ps, qs) < box.theta_floor) {
                throw sample_rejected("C_" + std::to_string(r) + " denominator below theta floor");
            }
        }
    };
}

// ---- scenarios on a single parameter set -----------------------------------

inline ScenarioReport scenario_eval_formula(const ParameterSet &params, const ScenarioContext &ctx, int sample = 0,
                                            const std::string &label = "")
{
    ScenarioReport rep = detail::blank_report(ctx, label, sample);
    detail::echo(rep, params);
    return detail::guarded(rep, ctx.timing, [&](ScenarioReport &r) {
        if (params.balancing != Balancing::PQ) {
            throw config_error("eval_formula needs pq balancing");
        }
        const QSeries qs(ctx.nomes, ctx.policy);
        const QuadResult lhs = selberg_integral(params, qs, ctx.quad);
        r.N_used = lhs.N_used;
        r.lhs = lhs.value;
        r.rhs = evaluation_rhs(params, qs);
        finalize(r);
    });
}

/// pq balancing: I(a) = I(.., q a_k, .., q^{-1} a_6) prod theta(q^{-1} a_m a_6 t^{i-1}) / theta(a_m a_k t^{i-1}).
/// p balancing:  I(.., q a_6) = I(.., q a_k, .., a_6) prod theta(a_m a_6 t^{i-1}) / theta(a_m a_k t^{i-1}).
inline std::vector<ScenarioReport> scenario_qde(const ParameterSet &params, const std::vector<int> &ks,
                                                const ScenarioContext &ctx, int sample = 0)
{
    std::vector<ScenarioReport> out;
    const bool lemma = params.balancing == Balancing::P;
    const QSeries qs(ctx.nomes, ctx.policy);
    const cplx q = ctx.nomes.q;
    std::optional<QuadResult> base;
    std::string base_error;
    try {
        if (params.balancing != Balancing::PQ && !lemma) {
            throw config_error("qde needs pq or p balancing");
        }
        const ParameterSet lhs_set = lemma ? params.with_parameter(6, q * params[6]) : params;
        base = selberg_integral(lhs_set, qs, ctx.quad);
    } catch (const error &e) {
        base_error = e.what();
    }
    for (int k : ks) {
        ScenarioReport rep = detail::blank_report(ctx, "k=" + std::to_string(k) + (lemma ? ",lemma" : ""), sample);
        detail::echo(rep, params);
        out.push_back(detail::guarded(rep, ctx.timing, [&](ScenarioReport &r) {
            if (!base) {
                throw error(base_error);
            }
            ParameterSet shifted;
            cplx factor;
            if (lemma) {
                shifted = params.with_parameter(k, q * params[k]);
                factor = qde_factor(k, params, qs, 1.0);
            } else {
                shifted = params.shifted(k, q, ctx.nomes);
                if (shifted.balancing_residual(ctx.nomes) > 1e-14) {
                    throw sample_rejected("shifted parameters violate the balancing condition");
                }
                factor = qde_factor(k, params, qs, 1.0 / q);
            }
            for (int m = 1; m <= 6; ++m) {
                if (!(std::abs(shifted[m]) < 1.0)) {
                    throw sample_rejected("shifted parameter a_" + std::to_string(m) + " leaves the unit disk");
                }
            }
            const QuadResult rhs = selberg_integral(shifted, qs, ctx.quad);
            r.N_used = std::max(base->N_used, rhs.N_used);
            r.lhs = base->value;
            r.rhs = rhs.value * factor;
            finalize(r);
        }));
    }
    return out;
}

/// <E_r> = C_r <E_{r-1}> for r = 1..n, plus <E_n> = <E_0> * (telescoped product).
inline std::vector<ScenarioReport> scenario_recurrence(const ParameterSet &params, const ScenarioContext &ctx,
                                                       int sample = 0)
{
    std::vector<ScenarioReport> out;
    const int n = params.n;
    std::vector<QuadResult> ev;
    std::string failure;
    std::optional<QSeries> qs;
    try {
        if (params.balancing != Balancing::One) {
            throw config_error("recurrence needs balancing 'one'");
        }
        qs.emplace(ctx.nomes, ctx.policy);
        for (int r = 0; r <= n; ++r) {
            ev.push_back(expectation(
                [&](std::span<const cplx> z) { return fundamental_invariant(r, params[1], params[6], z, params.t, *qs); },
                params, *qs, ctx.quad));
        }
    } catch (const error &e) {
        failure = e.what();
    }
    auto body = [&](int r) {
        return [&, r](ScenarioReport &rep) {
            if (!failure.empty()) {
                throw error(failure);
            }
            if (r > 0) {
                rep.lhs = ev[static_cast<std::size_t>(r)].value;
                rep.rhs = coefficient_C(r, params, *qs) * ev[static_cast<std::size_t>(r - 1)].value;
                rep.N_used = std::max(ev[static_cast<std::size_t>(r)].N_used, ev[static_cast<std::size_t>(r - 1)].N_used);
            } else {
                rep.lhs = ev.back().value;
                rep.rhs = ev.front().value * telescoped_product(params, *qs);
                rep.N_used = std::max(ev.back().N_used, ev.front().N_used);
            }
            finalize(rep);
        };
    };
    for (int r = 1; r <= n; ++r) {
        ScenarioReport rep = detail::blank_report(ctx, "r=" + std::to_string(r), sample);
        detail::echo(rep, params);
        out.push_back(detail::guarded(rep, ctx.timing, body(r)));
    }
    ScenarioReport rep = detail::blank_report(ctx, "telescope", sample);
    detail::echo(rep, params);
    out.push_back(detail::guarded(rep, ctx.timing, body(0)));
    return out;
}

inline ScenarioReport scenario_nabla(const ParameterSet &params, int r, int i, const ScenarioContext &ctx,
                                     int sample = 0)
{
    ScenarioReport rep =
        detail::blank_report(ctx, "r=" + std::to_string(r) + ",i=" + std::to_string(i), sample);
    detail::echo(rep, params);
    return detail::guarded(rep, ctx.timing, [&](ScenarioReport &out) {
        if (params.balancing != Balancing::One) {
            throw config_error("nabla needs balancing 'one'");
        }
        const NablaResult res = nabla_expectation(r, i, params, ctx.nomes, ctx.policy, ctx.quad);
        out.N_used = res.quad.N_used;
        out.lhs = res.quad.value;
        out.rhs = 0.0;
        finalize_vanishing(out, res.reference);
    });
}

inline ScenarioReport scenario_dixon_anderson(int n, const std::vector<cplx> &a, const ScenarioContext &ctx,
                                              double exponent, int sample = 0)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "exponent=%.17g", exponent);
    ScenarioReport rep = detail::blank_report(ctx, buf, sample);
    rep.n = n;
    rep.a = a;
    rep.balancing = "free";
    return detail::guarded(rep, ctx.timing, [&](ScenarioReport &r) {
        if (static_cast<int>(a.size()) != 2 * n + 4) {
            throw config_error("Dixon-Anderson needs 2n+4 parameters");
        }
        cplx prod(1.0, 0.0);
        for (const auto &x : a) {
            prod *= x;
        }
        const cplx target = std::pow(ctx.nomes.p * ctx.nomes.q, exponent);
        if (!(std::abs(prod - target) <= 1e-14 * std::abs(target))) {
            throw sample_rejected("parameters violate prod a_m = (pq)^" + std::string(buf + 9));
        }
        const QSeries qs(ctx.nomes, ctx.policy);
        const Kernel kernel = dixon_anderson_kernel(n, a, qs);
        const QuadResult lhs = integrate_kernel(kernel, ctx.quad);
        double factorial = 1.0;
        for (int i = 2; i <= n; ++i) {
            factorial *= i;
        }
        r.N_used = lhs.N_used;
        r.lhs = lhs.value;
        r.rhs = std::ldexp(factorial, n) / (ipow(qs.pp(), n) * ipow(qs.qq(), n)) * pair_gamma_product(a, qs);
        finalize(r);
    });
}

struct PinchOptions {
    /// Step between the two parameter sets straddling |a_1| = 1.
    double continuity_delta = 0.02;
    double eps1 = 1e-3;
    double eps2 = 1e-4;
    double residue_radius = 1e-3;
    int residue_points = 64;
    double residue_tol = 1e-8;
    double identity_tol = 1e-5;
    double cn_tol = 1e-12;
    int cn_max = 5;
    std::vector<int> lemma_ranks{1, 2};
};

/// Residue, pinching and constant checks around a parameter set with
/// 1 < |a_1| < |q|^{-1/2} (n = 1, pq balancing).
inline std::vector<ScenarioReport> scenario_pinch(const ParameterSet &base, const ScenarioContext &ctx,
                                                  const PinchOptions &opt = {}, int sample = 0)
{
    std::vector<ScenarioReport> out;
    const Nomes &nomes = ctx.nomes;
    auto add = [&](const std::string &label, const ParameterSet &ps, double tol, auto &&body) {
        ScenarioReport rep = detail::blank_report(ctx, label, sample);
        detail::echo(rep, ps);
        rep.tol = tol;
        out.push_back(detail::guarded(rep, ctx.timing, body));
    };
    const QSeries qs(nomes, ctx.policy);

    const cplx a_res = base[3];
    add("residue", base, opt.residue_tol, [&](ScenarioReport &r) {
        r.lhs = residue_contour_numeric(a_res, a_res, qs, opt.residue_radius, opt.residue_points);
        r.rhs = residue_gamma_pm(a_res, qs);
        finalize(r);
    });
    add("residue_inverse", base, opt.residue_tol, [&](ScenarioReport &r) {
        r.lhs = residue_contour_numeric(a_res, 1.0 / a_res, qs, opt.residue_radius, opt.residue_points);
        r.rhs = residue_gamma_pm(a_res, qs, true);
        finalize(r);
    });

    for (int n : opt.lemma_ranks) {
        ParameterSet lim;
        std::string why;
        try {
            lim = ParameterSet::balanced(n, base.t, {base[1], 1.0 / base[1], base[3], base[4], base[5]},
                                         Balancing::PQ, nomes);
        } catch (const error &e) {
            why = e.what();
        }
        add("lemma_limit_J", why.empty() ? lim : base, ctx.tol, [&](ScenarioReport &r) {
            if (!why.empty()) {
                throw error(why);
            }
            r.lhs = lim_pinch_J_numeric(lim, qs, opt.eps1, opt.eps2);
            r.rhs = lim_pinch_J(lim, qs);
            finalize(r);
        });
    }

    add("continued_integral", base, ctx.tol, [&](ScenarioReport &r) {
        const ContinuedIntegral ci = continued_integral_n1(base, qs, ctx.quad);
        r.N_used = ci.torus.N_used;
        r.lhs = ci.value;
        r.rhs = evaluation_rhs(base, qs);
        finalize(r);
    });

    add("continuity", base, ctx.tol, [&](ScenarioReport &r) {
        const cplx unit = base[1] / std::abs(base[1]);
        ParameterSet outer = base;
        outer.a[0] = unit * (1.0 + opt.continuity_delta);
        outer.rebalance(nomes);
        ParameterSet inner = base;
        inner.a[0] = unit * (1.0 - opt.continuity_delta);
        inner.rebalance(nomes);
        const ContinuedIntegral io = continued_integral_n1(outer, qs, ctx.quad);
        const ContinuedIntegral ii = continued_integral_n1(inner, qs, ctx.quad);
        const cplx c1 = c_constant(1, base.t, qs);
        r.N_used = std::max(io.torus.N_used, ii.torus.N_used);
        r.lhs = io.value - ii.value;
        r.rhs = c1 * (j_closed(outer, qs) - j_closed(inner, qs));
        finalize(r);
    });

    {
        ParameterSet lim;
        std::string why;
        try {
            lim = ParameterSet::balanced(1, base.t, {base[1], 1.0 / base[1], base[3], base[4], base[5]},
                                         Balancing::PQ, nomes);
        } catch (const error &e) {
            why = e.what();
        }
        add("pinch_identity", why.empty() ? lim : base, opt.identity_tol, [&](ScenarioReport &r) {
            if (!why.empty()) {
                throw error(why);
            }
            r.lhs = pinch_identity_lhs(lim, qs, ctx.quad, opt.eps1, opt.eps2);
            r.rhs = pinch_identity_rhs(lim, qs);
            finalize(r);
        });
    }

    for (int n = 1; n <= opt.cn_max; ++n) {
        ParameterSet echo_set = base;
        echo_set.n = n;
        add("cn_recurrence", echo_set, opt.cn_tol, [&](ScenarioReport &r) {
            r.lhs = c_constant(n, base.t, qs);
            r.rhs = c_constant(n - 1, base.t, qs) * 2.0 * static_cast<double>(n) * qs.gamma(ipow(base.t, n)) /
                    (qs.gamma(base.t) * qs.pp() * qs.qq());
            finalize(r);
        });
    }
    return out;
}

// ---- configuration and batch runs ------------------------------------------

/// Command-line / config-file settings. Unset optionals fall back to
/// per-scenario defaults.
struct RunConfig {
    std::string scenario = "all";
    std::optional<int> n;
    std::optional<cplx> p;
    std::optional<cplx> q;
    std::optional<cplx> t;
    std::optional<std::vector<cplx>> a;
    std::optional<cplx> a6;
    std::optional<Balancing> balancing;
    int grid = 0;
    std::optional<double> tol;
    std::uint64_t seed = 42;
    int count = 1;
    std::optional<int> k;
    std::optional<int> r;
    std::optional<int> i;
    SafeBox box;
    TruncationPolicy truncation;
    double quad_tol_factor = 1e-2;
    double offset = 0.0;
    double da_exponent = 1.0;
    bool timing = false;
};

inline const std::vector<std::string> &scenario_names()
{
    static const std::vector<std::string> names{"eval_formula", "qde",           "recurrence",
                                                "nabla",        "dixon_anderson", "pinch"};
    return names;
}

struct ScenarioDefaults {
    cplx p;
    cplx q;
    double tol;
    Balancing balancing;
};

/// Nomes and tolerances per scenario and rank. The 'one' and 'p' modes put
/// |a_6| near 1/|a_1...a_5 t^{2n-2}|, so they need a much smaller p to keep
/// p a_6 (or a_6 itself) inside the disk.
inline ScenarioDefaults scenario_defaults(const std::string &name, int n)
{
    if (name == "eval_formula") {
        if (n <= 1) return {0.05, 0.07, 1e-8, Balancing::PQ};
        if (n == 2) return {0.02, 0.05, 1e-6, Balancing::PQ};
        return {0.01, 0.03, 1e-5, Balancing::PQ};
    }
    if (name == "qde") {
        if (n <= 1) return {0.002, 0.1, 1e-7, Balancing::PQ};
        return {2e-4, 0.1, 1e-6, Balancing::PQ};
    }
    if (name == "recurrence") {
        if (n <= 1) return {0.002, 0.1, 1e-7, Balancing::One};
        return {2e-4, 0.1, 1e-6, Balancing::One};
    }
    if (name == "nabla") {
        if (n <= 1) return {0.002, 0.1, 1e-7, Balancing::One};
        return {2e-4, 0.1, 1e-7, Balancing::One};
    }
    if (name == "dixon_anderson") {
        if (n <= 1) return {0.05, 0.07, 1e-8, Balancing::Free};
        return {0.01, 0.02, 1e-6, Balancing::Free};
    }
    if (name == "pinch") {
        return {0.05, 0.07, 1e-6, Balancing::PQ};
    }
    throw config_error("unknown scenario '" + name + "'");
}

namespace detail
{

inline ScenarioContext make_context(const std::string &name, int n, const RunConfig &cfg)
{
    const ScenarioDefaults d = scenario_defaults(name, n);
    ScenarioContext ctx;
    ctx.scenario = name;
    ctx.nomes = Nomes{cfg.p.value_or(d.p), cfg.q.value_or(d.q)};
    ctx.nomes.validate();
    ctx.policy = cfg.truncation;
    ctx.policy.validate();
    ctx.tol = cfg.tol.value_or(d.tol);
    ctx.quad.tol = ctx.tol * cfg.quad_tol_factor;
    ctx.quad.budget = cfg.grid;
    ctx.quad.offset = cfg.offset;
    ctx.seed = cfg.seed;
    ctx.box = cfg.box;
    ctx.timing = cfg.timing;
    return ctx;
}

inline Balancing resolve_balancing(const std::string &name, const RunConfig &cfg, Balancing fallback)
{
    if (!cfg.balancing) {
        return fallback;
    }
    const Balancing b = *cfg.balancing;
    if (name == "qde" && (b == Balancing::PQ || b == Balancing::P)) {
        return b;
    }
    if (b != fallback) {
        throw config_error("scenario '" + name + "' requires balancing '" + to_string(fallback) + "'");
    }
    return b;
}

/// User-supplied parameters (count = 1) or sampled ones.
inline SampleBatch parameter_sets(const RunConfig &cfg, int n, Balancing mode, const ScenarioContext &ctx,
                                  const SamplePredicate &accept, const SampleRequest *shape = nullptr)
{
    if (cfg.a) {
        const auto &a = *cfg.a;
        if (a.size() != 5) {
            throw config_error("--a expects exactly five values a_1..a_5");
        }
        if (!cfg.t && n > 1) {
            throw config_error("--t is required with explicit parameters when n > 1");
        }
        const cplx t = cfg.t.value_or(cplx(0.3, 0.0));
        ParameterSet ps;
        if (cfg.a6) {
            ps = ParameterSet::free_set(n, t, {a[0], a[1], a[2], a[3], a[4], *cfg.a6});
            ps.balancing = mode;
            ps.validate(ctx.nomes);
        } else {
            ps = ParameterSet::balanced(n, t, {a[0], a[1], a[2], a[3], a[4]}, mode, ctx.nomes);
        }
        SampleBatch batch;
        batch.attempts = 1;
        batch.sets.push_back(ps);
        return batch;
    }
    SampleRequest req = shape ? *shape : SampleRequest{};
    req.mode = mode;
    req.n = n;
    req.nomes = ctx.nomes;
    req.seed = cfg.seed;
    req.count = cfg.count;
    req.box = cfg.box;
    req.t = cfg.t;
    return sample_parameters(req, accept);
}

inline void stamp_rejections(std::vector<ScenarioReport> &reps, std::size_t from, int rejected)
{
    for (std::size_t j = from; j < reps.size(); ++j) {
        reps[j].rejected = rejected;
    }
}

/// Explicit parameters that fail a predicate still produce a (failed) report.
inline std::optional<std::string> check_explicit(const RunConfig &cfg, const SamplePredicate &accept,
                                                 const ParameterSet &ps)
{
    if (!cfg.a || !accept) {
        return std::nullopt;
    }
    try {
        accept(ps);
    } catch (const error &e) {
        return std::string("sample rejected: ") + e.what();
    }
    return std::nullopt;
}

} // namespace detail

/// Runs one named scenario at rank n for every parameter set of the batch.
inline std::vector<ScenarioReport> run_scenario(const std::string &name, int n, const RunConfig &cfg,
                                                const std::string &label_prefix = "")
{
    const ScenarioDefaults defaults = scenario_defaults(name, n);
    ScenarioContext ctx = detail::make_context(name, n, cfg);
    std::vector<ScenarioReport> reps;
    auto prefix = [&](std::vector<ScenarioReport> &rs, std::size_t from) {
        if (label_prefix.empty()) {
            return;
        }
        for (std::size_t j = from; j < rs.size(); ++j) {
            rs[j].label = rs[j].label.empty() ? label_prefix : label_prefix + "," + rs[j].label;
        }
    };

    if (name == "dixon_anderson") {
        std::vector<std::vector<cplx>> sets;
        int rejected = 0;
        if (cfg.a) {
            if (static_cast<int>(cfg.a->size()) != 2 * n + 3) {
                throw config_error("dixon_anderson with --a expects 2n+3 values");
            }
            std::vector<cplx> a = *cfg.a;
            a.push_back(cfg.a6 ? *cfg.a6 : dixon_anderson_solve(a, ctx.nomes, cfg.da_exponent));
            sets.push_back(std::move(a));
        } else {
            const DixonAndersonBatch batch =
                sample_dixon_anderson(n, ctx.nomes, cfg.da_exponent, cfg.seed, cfg.count, cfg.box);
            sets = batch.sets;
            rejected = batch.rejected;
        }
        for (std::size_t s = 0; s < sets.size(); ++s) {
            reps.push_back(scenario_dixon_anderson(n, sets[s], ctx, cfg.da_exponent, static_cast<int>(s)));
        }
        detail::stamp_rejections(reps, 0, rejected);
        prefix(reps, 0);
        return reps;
    }

    const Balancing mode = detail::resolve_balancing(name, cfg, defaults.balancing);
    const QSeries qs(ctx.nomes, ctx.policy);
    SamplePredicate accept;
    SampleRequest shape;
    const SampleRequest *shape_ptr = nullptr;
    if (name == "eval_formula") {
        accept = cfg.a ? SamplePredicate{} : accept_eval_formula(cfg.box);
    } else if (name == "qde") {
        accept = accept_qde(cfg.box, ctx.nomes);
    } else if (name == "recurrence" || name == "nabla") {
        accept = accept_expectation(cfg.box, qs);
    } else if (name == "pinch") {
        // a_1 just outside the unit circle; the remaining parameters, the
        // solved a_6 and the pinched a_6 stay inside the safe box.
        const double upper = std::min(1.2, 0.95 / std::sqrt(std::abs(ctx.nomes.q)));
        shape.modulus_override[0] = std::make_pair(1.05, std::max(1.05, upper));
        shape_ptr = &shape;
        const SafeBox box = cfg.box;
        const Nomes nomes = ctx.nomes;
        accept = [box, nomes](const ParameterSet &ps) {
            for (int m = 2; m <= 6; ++m) {
                detail::require_modulus(ps[m], box.max_modulus, "a_" + std::to_string(m));
            }
            const ParameterSet lim = ParameterSet::balanced(1, ps.t, {ps[1], 1.0 / ps[1], ps[3], ps[4], ps[5]},
                                                            Balancing::PQ, nomes);
            detail::require_modulus(lim[6], box.max_modulus, "pinched a_6");
        };
        // Quadrature near |a_1| = 1 needs a fine grid and a tight tolerance.
        ctx.quad.tol = std::min(ctx.quad.tol, 1e-12);
        if (cfg.grid == 0) {
            ctx.quad.budget = 4096;
        }
    } else {
        throw config_error("unknown scenario '" + name + "'");
    }

    const SampleBatch batch = detail::parameter_sets(cfg, name == "pinch" ? 1 : n, mode, ctx, accept, shape_ptr);
    for (std::size_t s = 0; s < batch.sets.size(); ++s) {
        const ParameterSet &ps = batch.sets[s];
        const int sample = static_cast<int>(s);
        const std::size_t from = reps.size();
        if (const auto why = detail::check_explicit(cfg, accept, ps)) {
            ScenarioReport rep = detail::blank_report(ctx, "", sample);
            detail::echo(rep, ps);
            mark_failed(rep, *why);
            reps.push_back(rep);
            continue;
        }
        if (name == "eval_formula") {
            reps.push_back(scenario_eval_formula(ps, ctx, sample));
        } else if (name == "qde") {
            std::vector<int> ks;
            if (cfg.k) {
                ks = {*cfg.k};
            } else if (n == 1) {
                ks = {1, 2, 3, 4, 5};
            } else {
                ks = {1, 3};
            }
            auto rs = scenario_qde(ps, ks, ctx, sample);
            reps.insert(reps.end(), rs.begin(), rs.end());
        } else if (name == "recurrence") {
            auto rs = scenario_recurrence(ps, ctx, sample);
            reps.insert(reps.end(), rs.begin(), rs.end());
        } else if (name == "nabla") {
            for (int r = 1; r <= n; ++r) {
                for (int i = 1; i <= n; ++i) {
                    if ((cfg.r && *cfg.r != r) || (cfg.i && *cfg.i != i)) {
                        continue;
                    }
                    reps.push_back(scenario_nabla(ps, r, i, ctx, sample));
                }
            }
        } else if (name == "pinch") {
            PinchOptions opt;
            if (n > 2) {
                opt.lemma_ranks.push_back(n);
            }
            auto rs = scenario_pinch(ps, ctx, opt, sample);
            reps.insert(reps.end(), rs.begin(), rs.end());
        }
        prefix(reps, from);
    }
    detail::stamp_rejections(reps, 0, batch.rejected);
    return reps;
}

/// The named scenario, or the default suite (all scenarios, n <= 2) for "all".
inline std::vector<ScenarioReport> run(const RunConfig &cfg)
{
    if (cfg.scenario != "all") {
        return run_scenario(cfg.scenario, cfg.n.value_or(1), cfg);
    }
    if (cfg.a) {
        throw config_error("explicit parameters need a single --scenario");
    }
    std::vector<ScenarioReport> reps;
    auto append = [&reps](std::vector<ScenarioReport> rs) { reps.insert(reps.end(), rs.begin(), rs.end()); };
    const std::vector<int> ranks = cfg.n ? std::vector<int>{*cfg.n} : std::vector<int>{1, 2};
    for (const auto &name : scenario_names()) {
        if (name == "pinch") {
            continue;
        }
        for (int n : ranks) {
            RunConfig c = cfg;
            c.balancing.reset();
            append(run_scenario(name, n, c));
            if (name == "eval_formula" && n == 1 && !cfg.p) {
                RunConfig c0 = c;
                c0.p = cplx(0.0, 0.0);
                append(run_scenario(name, n, c0, "p=0"));
            }
            if (name == "qde" && n == 1) {
                RunConfig cp = c;
                cp.balancing = Balancing::P;
                append(run_scenario(name, n, cp));
            }
        }
    }
    RunConfig c = cfg;
    c.balancing.reset();
    append(run_scenario("pinch", 1, c));
    return reps;
}

inline bool all_pass(const std::vector<ScenarioReport> &reps)
{
    return std::all_of(reps.begin(), reps.end(), [](const ScenarioReport &r) { return r.pass; });
}

} // namespace ellsel

#endif
