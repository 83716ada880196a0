// Complex literals, config files and report serialization (JSON / CSV).
//
// Complex literal grammar (whitespace not allowed inside a literal):
//   literal := real | imag | real sign unsigned 'i'
//   imag    := [sign] [unsigned] 'i'        ("i", "-i", "2.5i")
//   real    := [sign] unsigned
//   unsigned:= decimal float, optional exponent ("0.3", "1e-3", ".5")
// Examples: "0.3", "-0.2", "0.3-0.12i", "1e-3+2e-4i", "0.9i".

#ifndef ELLSEL_REPORT_HPP
#define ELLSEL_REPORT_HPP

#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "params.hpp"
#include "qseries.hpp"
#include "verify.hpp"

namespace ellsel
{

namespace detail
{

/// Length of the longest prefix of s that is a decimal float (with sign).
inline std::size_t scan_float(std::string_view s, std::size_t pos, bool allow_sign)
{
    std::size_t k = pos;
    if (allow_sign && k < s.size() && (s[k] == '+' || s[k] == '-')) {
        ++k;
    }
    std::size_t digits = 0;
    while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
        ++k;
        ++digits;
    }
    if (k < s.size() && s[k] == '.') {
        ++k;
        while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
            ++k;
            ++digits;
        }
    }
    if (digits == 0) {
        return 0;
    }
    if (k < s.size() && (s[k] == 'e' || s[k] == 'E')) {
        std::size_t e = k + 1;
        if (e < s.size() && (s[e] == '+' || s[e] == '-')) {
            ++e;
        }
        std::size_t ed = 0;
        while (e < s.size() && std::isdigit(static_cast<unsigned char>(s[e]))) {
            ++e;
            ++ed;
        }
        if (ed > 0) {
            k = e;
        }
    }
    return k - pos;
}

inline double to_double(std::string_view s)
{
    const std::string buf(s);
    return std::strtod(buf.c_str(), nullptr);
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace detail

inline cplx parse_complex(std::string_view text)
{
    const std::string_view s = detail::trim(text);
    auto bad = [&]() { return config_error("malformed complex literal '" + std::string(text) + "'"); };
    if (s.empty()) {
        throw bad();
    }
    if (s.back() != 'i') {
        const std::size_t len = detail::scan_float(s, 0, true);
        if (len == 0 || len != s.size()) {
            throw bad();
        }
        return {detail::to_double(s), 0.0};
    }
    const std::string_view body = s.substr(0, s.size() - 1);
    // Pure imaginary: optional sign, optional magnitude.
    if (body.empty() || body == "+" || body == "-") {
        return {0.0, body == "-" ? -1.0 : 1.0};
    }
    const std::size_t first = detail::scan_float(body, 0, true);
    if (first == body.size()) {
        return {0.0, detail::to_double(body)};
    }
    if (first == 0 || (body[first] != '+' && body[first] != '-')) {
        throw bad();
    }
    const double re = detail::to_double(body.substr(0, first));
    const std::string_view im = body.substr(first);
    if (im == "+" || im == "-") {
        return {re, im == "-" ? -1.0 : 1.0};
    }
    const std::size_t second = detail::scan_float(im, 0, true);
    if (second != im.size()) {
        throw bad();
    }
    return {re, detail::to_double(im)};
}

inline std::vector<cplx> parse_complex_list(std::string_view text)
{
    std::vector<cplx> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        out.push_back(parse_complex(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

/// Round-trip text of a double ("%.17g"; non-finite as nan/inf).
inline std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Literal accepted by parse_complex; parse_complex(format_complex(z)) == z.
inline std::string format_complex(cplx z)
{
    std::string out = format_double(z.real());
    if (z.imag() == 0.0 && !std::signbit(z.imag())) {
        return out;
    }
    const double im = z.imag();
    out += std::signbit(im) ? "-" : "+";
    out += format_double(std::abs(im));
    out += "i";
    return out;
}

// ---- config files ----------------------------------------------------------

/// `key = value` lines; '#' starts a comment; blank lines ignored.
inline std::map<std::string, std::string> parse_config_text(std::istream &in)
{
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        std::string_view view = detail::trim(std::string_view(line).substr(0, hash));
        if (view.empty()) {
            continue;
        }
        const std::size_t eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key(detail::trim(view.substr(0, eq)));
        const std::string value(detail::trim(view.substr(eq + 1)));
        if (key.empty()) {
            throw config_error("config line " + std::to_string(lineno) + ": empty key");
        }
        out[key] = value;
    }
    return out;
}

namespace detail
{

inline double config_double(const std::string &key, const std::string &v)
{
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw config_error("config key '" + key + "': expected a real number, got '" + v + "'");
    }
    return x;
}

inline long long config_int(const std::string &key, const std::string &v)
{
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw config_error("config key '" + key + "': expected an integer, got '" + v + "'");
    }
    return x;
}

} // namespace detail

/// Applies config entries to cfg. Returns the report format if one is set.
inline std::string apply_config(RunConfig &cfg, const std::map<std::string, std::string> &entries)
{
    std::string format;
    for (const auto &[key, v] : entries) {
        if (key == "scenario") cfg.scenario = v;
        else if (key == "n") cfg.n = static_cast<int>(detail::config_int(key, v));
        else if (key == "p") cfg.p = parse_complex(v);
        else if (key == "q") cfg.q = parse_complex(v);
        else if (key == "t") cfg.t = parse_complex(v);
        else if (key == "a") cfg.a = parse_complex_list(v);
        else if (key == "a6") cfg.a6 = parse_complex(v);
        else if (key == "balancing") cfg.balancing = balancing_from_string(v);
        else if (key == "grid") cfg.grid = static_cast<int>(detail::config_int(key, v));
        else if (key == "tol") cfg.tol = detail::config_double(key, v);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::config_int(key, v));
        else if (key == "count") cfg.count = static_cast<int>(detail::config_int(key, v));
        else if (key == "k") cfg.k = static_cast<int>(detail::config_int(key, v));
        else if (key == "r") cfg.r = static_cast<int>(detail::config_int(key, v));
        else if (key == "i") cfg.i = static_cast<int>(detail::config_int(key, v));
        else if (key == "offset") cfg.offset = detail::config_double(key, v);
        else if (key == "quad_tol_factor") cfg.quad_tol_factor = detail::config_double(key, v);
        else if (key == "da_exponent") cfg.da_exponent = detail::config_double(key, v);
        else if (key == "tail_tol") cfg.truncation.tail_tol = detail::config_double(key, v);
        else if (key == "max_terms") cfg.truncation.max_terms = static_cast<int>(detail::config_int(key, v));
        else if (key == "box.a_min") cfg.box.a_min = detail::config_double(key, v);
        else if (key == "box.a_max") cfg.box.a_max = detail::config_double(key, v);
        else if (key == "box.t_min") cfg.box.t_min = detail::config_double(key, v);
        else if (key == "box.t_max") cfg.box.t_max = detail::config_double(key, v);
        else if (key == "box.max_modulus") cfg.box.max_modulus = detail::config_double(key, v);
        else if (key == "box.nome_max") cfg.box.nome_max = detail::config_double(key, v);
        else if (key == "box.theta_floor") cfg.box.theta_floor = detail::config_double(key, v);
        else if (key == "box.max_attempts") cfg.box.max_attempts = static_cast<int>(detail::config_int(key, v));
        else if (key == "format") format = v;
        else throw config_error("unknown config key '" + key + "'");
    }
    return format;
}

inline std::string load_config_file(RunConfig &cfg, const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open config file '" + path + "'");
    }
    return apply_config(cfg, parse_config_text(in));
}

// ---- reports ---------------------------------------------------------------

/// Field order of serialized reports (JSON keys and CSV columns before
/// complex values are split into _re/_im).
inline const std::vector<std::string> &report_fields()
{
    static const std::vector<std::string> fields{
        "scenario", "label", "sample", "seed", "n",    "balancing", "p",      "q",        "t",          "a",
        "N_used",   "lhs",   "rhs",    "abs_err", "rel_err", "tol", "pass", "reason", "rejected", "runtime_ms",
        "truncation"};
    return fields;
}

namespace detail
{

/// Non-finite doubles become null (JSON has no NaN).
inline nlohmann::ordered_json json_real(double x)
{
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return x;
}

inline nlohmann::ordered_json json_complex(cplx z)
{
    return nlohmann::ordered_json::array({json_real(z.real()), json_real(z.imag())});
}

} // namespace detail

inline nlohmann::ordered_json to_json(const ScenarioReport &r)
{
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["label"] = r.label;
    j["sample"] = r.sample;
    j["seed"] = r.seed;
    j["n"] = r.n;
    j["balancing"] = r.balancing;
    j["p"] = detail::json_complex(r.p);
    j["q"] = detail::json_complex(r.q);
    j["t"] = detail::json_complex(r.t);
    auto a = nlohmann::ordered_json::array();
    for (const auto &x : r.a) {
        a.push_back(detail::json_complex(x));
    }
    j["a"] = a;
    j["N_used"] = r.N_used;
    j["lhs"] = detail::json_complex(r.lhs);
    j["rhs"] = detail::json_complex(r.rhs);
    j["abs_err"] = detail::json_real(r.abs_err);
    j["rel_err"] = detail::json_real(r.rel_err);
    j["tol"] = detail::json_real(r.tol);
    j["pass"] = r.pass;
    j["reason"] = r.reason;
    j["rejected"] = r.rejected;
    j["runtime_ms"] = r.runtime_ms;
    nlohmann::ordered_json tr;
    tr["tail_tol"] = r.tail_tol;
    tr["max_terms"] = r.max_terms;
    j["truncation"] = tr;
    return j;
}

inline std::string reports_to_json(const std::vector<ScenarioReport> &reps)
{
    // One report object per line; doubles use the shortest round-trip form.
    std::string out = "[";
    for (std::size_t k = 0; k < reps.size(); ++k) {
        out += (k ? ",\n  " : "\n  ") + to_json(reps[k]).dump();
    }
    return out + "\n]\n";
}

namespace detail
{

inline std::string csv_escape(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

} // namespace detail

inline std::string csv_header()
{
    return "scenario,label,sample,seed,n,balancing,p_re,p_im,q_re,q_im,t_re,t_im,a,N_used,lhs_re,lhs_im,rhs_re,rhs_im,"
           "abs_err,rel_err,tol,pass,reason,rejected,runtime_ms,tail_tol,max_terms\n";
}

inline std::string to_csv_row(const ScenarioReport &r)
{
    using detail::csv_escape;
    std::string a;
    for (std::size_t k = 0; k < r.a.size(); ++k) {
        a += (k ? ";" : "") + format_complex(r.a[k]);
    }
    std::ostringstream os;
    os << csv_escape(r.scenario) << ',' << csv_escape(r.label) << ',' << r.sample << ',' << r.seed << ',' << r.n << ','
       << csv_escape(r.balancing) << ',' << format_double(r.p.real()) << ',' << format_double(r.p.imag()) << ','
       << format_double(r.q.real()) << ',' << format_double(r.q.imag()) << ',' << format_double(r.t.real()) << ','
       << format_double(r.t.imag()) << ',' << a << ',' << r.N_used << ',' << format_double(r.lhs.real()) << ','
       << format_double(r.lhs.imag()) << ',' << format_double(r.rhs.real()) << ',' << format_double(r.rhs.imag())
       << ',' << format_double(r.abs_err) << ',' << format_double(r.rel_err) << ',' << format_double(r.tol) << ','
       << (r.pass ? "true" : "false") << ',' << csv_escape(r.reason) << ',' << r.rejected << ',' << r.runtime_ms
       << ',' << format_double(r.tail_tol) << ',' << r.max_terms << '\n';
    return os.str();
}

inline std::string reports_to_csv(const std::vector<ScenarioReport> &reps)
{
    std::string out = csv_header();
    for (const auto &r : reps) {
        out += to_csv_row(r);
    }
    return out;
}

inline std::string serialize_reports(const std::vector<ScenarioReport> &reps, const std::string &format)
{
    if (format == "json") {
        return reports_to_json(reps);
    }
    if (format == "csv") {
        return reports_to_csv(reps);
    }
    throw config_error("unknown report format '" + format + "' (json|csv)");
}

} // namespace ellsel

#endif
