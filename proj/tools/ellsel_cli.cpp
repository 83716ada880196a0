// ellsel: scenario verification and single-value evaluation.
//
//   ellsel verify [--scenario NAME] [--n N] [--p C] [--q C] [--t C] [--a C,C,C,C,C]
//                 [--a6 C] [--balancing pq|p|one] [--grid N] [--tol X] [--seed S]
//                 [--count K] [--report PATH] [--format json|csv] [--config PATH]
//   ellsel eval {gamma|theta|psi|E|C|J|c_n} [options]
//
// verify exits 0 iff every report passes, 1 if some report fails, 2 on
// configuration errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ellsel/ellsel.hpp>

namespace
{

using ellsel::cplx;

struct VerifyArgs {
    std::string scenario, n, p, q, t, a, a6, balancing, grid, tol, seed, count, k, r, i, offset, da_exponent;
    std::string report, format, config;
    bool timing = false;
};

struct EvalArgs {
    std::string function;
    std::string u, z, p = "0", q = "0", t, a, a6, balancing = "pq";
    int n = 1;
    int r = 1;
    std::string format = "text";
};

/// Config file first, then every command-line value that was given.
ellsel::RunConfig build_config(const VerifyArgs &v, std::string &format)
{
    ellsel::RunConfig cfg;
    if (!v.config.empty()) {
        const std::string f = ellsel::load_config_file(cfg, v.config);
        if (!f.empty()) {
            format = f;
        }
    }
    std::map<std::string, std::string> cli;
    auto put = [&cli](const char *key, const std::string &value) {
        if (!value.empty()) {
            cli[key] = value;
        }
    };
    put("scenario", v.scenario);
    put("n", v.n);
    put("p", v.p);
    put("q", v.q);
    put("t", v.t);
    put("a", v.a);
    put("a6", v.a6);
    put("balancing", v.balancing);
    put("grid", v.grid);
    put("tol", v.tol);
    put("seed", v.seed);
    put("count", v.count);
    put("k", v.k);
    put("r", v.r);
    put("i", v.i);
    put("offset", v.offset);
    put("da_exponent", v.da_exponent);
    ellsel::apply_config(cfg, cli);
    if (!v.format.empty()) {
        format = v.format;
    }
    cfg.timing = v.timing;
    if (cfg.scenario != "all") {
        const auto &names = ellsel::scenario_names();
        if (std::find(names.begin(), names.end(), cfg.scenario) == names.end()) {
            throw ellsel::config_error("unknown scenario '" + cfg.scenario + "'");
        }
    }
    return cfg;
}

int run_verify(const VerifyArgs &v)
{
    std::string format = "json";
    const ellsel::RunConfig cfg = build_config(v, format);
    const std::vector<ellsel::ScenarioReport> reps = ellsel::run(cfg);
    const std::string text = ellsel::serialize_reports(reps, format);
    if (v.report.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(v.report, std::ios::binary);
        if (!out) {
            throw ellsel::config_error("cannot write report '" + v.report + "'");
        }
        out << text;
    }
    std::size_t failed = 0;
    for (const auto &r : reps) {
        if (!r.pass) {
            ++failed;
            std::cerr << "FAIL " << r.scenario << " [" << r.label << "] sample " << r.sample
                      << " rel_err=" << ellsel::format_double(r.rel_err)
                      << (r.reason.empty() ? "" : " (" + r.reason + ")") << "\n";
        }
    }
    std::cerr << reps.size() << " reports, " << failed << " failed\n";
    return failed == 0 ? 0 : 1;
}

ellsel::ParameterSet eval_parameters(const EvalArgs &e, const ellsel::Nomes &nomes)
{
    const std::vector<cplx> a = ellsel::parse_complex_list(e.a);
    if (a.size() != 5) {
        throw ellsel::config_error("--a expects five values a_1..a_5");
    }
    const cplx t = e.t.empty() ? cplx(0.0, 0.0) : ellsel::parse_complex(e.t);
    const ellsel::Balancing mode = ellsel::balancing_from_string(e.balancing);
    if (!e.a6.empty()) {
        ellsel::ParameterSet ps =
            ellsel::ParameterSet::free_set(e.n, t, {a[0], a[1], a[2], a[3], a[4], ellsel::parse_complex(e.a6)});
        ps.balancing = mode;
        return ps;
    }
    return ellsel::ParameterSet::balanced(e.n, t, {a[0], a[1], a[2], a[3], a[4]}, mode, nomes);
}

int run_eval(const EvalArgs &e)
{
    const ellsel::Nomes nomes{ellsel::parse_complex(e.p), ellsel::parse_complex(e.q)};
    nomes.validate();
    const ellsel::QSeries qs(nomes);
    auto need = [](const std::string &value, const char *flag) {
        if (value.empty()) {
            throw ellsel::config_error(std::string("eval needs ") + flag);
        }
        return value;
    };
    cplx value;
    if (e.function == "gamma") {
        value = qs.gamma(ellsel::parse_complex(need(e.u, "--u")));
    } else if (e.function == "theta") {
        value = qs.theta_p(ellsel::parse_complex(need(e.u, "--u")));
    } else if (e.function == "psi") {
        const std::vector<cplx> z = ellsel::parse_complex_list(need(e.z, "--z"));
        EvalArgs sized = e;
        sized.n = static_cast<int>(z.size());
        value = ellsel::psi(z, eval_parameters(sized, nomes), qs);
    } else if (e.function == "E") {
        const std::vector<cplx> ab = ellsel::parse_complex_list(need(e.a, "--a a,b"));
        if (ab.size() != 2) {
            throw ellsel::config_error("eval E expects --a a,b");
        }
        const std::vector<cplx> z = ellsel::parse_complex_list(need(e.z, "--z"));
        value = ellsel::fundamental_invariant(e.r, ab[0], ab[1], z, ellsel::parse_complex(need(e.t, "--t")), qs);
    } else if (e.function == "C") {
        EvalArgs one = e;
        one.balancing = "one";
        value = ellsel::coefficient_C(e.r, eval_parameters(one, nomes), qs);
    } else if (e.function == "J") {
        value = ellsel::j_closed(eval_parameters(e, nomes), qs);
    } else if (e.function == "c_n") {
        value = ellsel::c_constant(e.n, ellsel::parse_complex(need(e.t, "--t")), qs);
    } else {
        throw ellsel::config_error("unknown eval function '" + e.function + "'");
    }
    if (e.format == "json") {
        nlohmann::ordered_json j;
        j["function"] = e.function;
        j["value"] = nlohmann::ordered_json::array({value.real(), value.imag()});
        std::cout << j.dump() << "\n";
    } else {
        std::cout << ellsel::format_complex(value) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Elliptic Selberg integral verification"};
    app.require_subcommand(1);

    VerifyArgs v;
    CLI::App *verify = app.add_subcommand("verify", "Run verification scenarios and write reports");
    verify->add_option("--scenario", v.scenario, "eval_formula|qde|recurrence|nabla|dixon_anderson|pinch|all");
    verify->add_option("--n", v.n, "Rank");
    verify->add_option("--p", v.p, "Nome p (complex literal)");
    verify->add_option("--q", v.q, "Nome q (complex literal)");
    verify->add_option("--t", v.t, "Coupling t");
    verify->add_option("--a", v.a, "a_1..a_5 (comma separated; 2n+3 values for dixon_anderson)");
    verify->add_option("--a6", v.a6, "a_6 instead of solving the balancing condition");
    verify->add_option("--balancing", v.balancing, "pq|p|one");
    verify->add_option("--grid", v.grid, "Quadrature budget (max points per axis)");
    verify->add_option("--tol", v.tol, "Pass tolerance");
    verify->add_option("--seed", v.seed, "Sampler seed");
    verify->add_option("--count", v.count, "Number of sampled parameter sets");
    verify->add_option("--k", v.k, "qde: shifted index");
    verify->add_option("--r", v.r, "nabla: r");
    verify->add_option("--i", v.i, "nabla: i");
    verify->add_option("--offset", v.offset, "Grid offset");
    verify->add_option("--da-exponent", v.da_exponent, "Dixon-Anderson constraint exponent e in prod a = (pq)^e");
    verify->add_option("--report", v.report, "Report path (default stdout)");
    verify->add_option("--format", v.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    verify->add_option("--config", v.config, "Config file of 'key = value' lines");
    verify->add_flag("--timing", v.timing, "Record wall-clock runtime_ms (otherwise 0)");

    EvalArgs e;
    CLI::App *eval = app.add_subcommand("eval", "Evaluate a single value");
    eval->add_option("function", e.function, "gamma|theta|psi|E|C|J|c_n")
        ->required()
        ->check(CLI::IsMember({"gamma", "theta", "psi", "E", "C", "J", "c_n"}));
    eval->add_option("--u", e.u, "Argument of gamma / theta");
    eval->add_option("--z", e.z, "Torus point z_1,..,z_n");
    eval->add_option("--p", e.p, "Nome p");
    eval->add_option("--q", e.q, "Nome q");
    eval->add_option("--t", e.t, "Coupling t");
    eval->add_option("--a", e.a, "a_1..a_5 (or a,b for E)");
    eval->add_option("--a6", e.a6, "a_6 instead of solving the balancing condition");
    eval->add_option("--balancing", e.balancing, "pq|p|one");
    eval->add_option("--n", e.n, "Rank");
    eval->add_option("--r", e.r, "Index r of E_r / C_r");
    eval->add_option("--format", e.format, "text|json")->check(CLI::IsMember({"text", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            return run_verify(v);
        }
        return run_eval(e);
    } catch (const ellsel::error &ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
