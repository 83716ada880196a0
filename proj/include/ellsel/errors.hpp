#ifndef ELLSEL_ERRORS_HPP
#define ELLSEL_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace ellsel
{

/// Base class of every exception thrown by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (zero argument, bad rank, ...).
class domain_error : public error
{
public:
    using error::error;
};

/// A truncated product could not reach its tail bound within max_terms.
class truncation_error : public error
{
public:
    truncation_error(const std::string &what, double achieved_bound)
        : error(what), m_bound(achieved_bound)
    {
    }
    double achieved_bound() const noexcept
    {
        return m_bound;
    }

private:
    double m_bound;
};

/// The argument of an elliptic gamma function sits on (or numerically at) a
/// pole p^{-mu} q^{-nu}.
class pole_error : public error
{
public:
    pole_error(const std::string &what, int mu, int nu) : error(what), m_mu(mu), m_nu(nu) {}
    int mu() const noexcept
    {
        return m_mu;
    }
    int nu() const noexcept
    {
        return m_nu;
    }

private:
    int m_mu;
    int m_nu;
};

/// A theta function in a denominator vanishes for the given parameters or point.
class degenerate_error : public error
{
public:
    degenerate_error(const std::string &what, std::string factor) : error(what), m_factor(std::move(factor)) {}
    const std::string &factor() const noexcept
    {
        return m_factor;
    }

private:
    std::string m_factor;
};

/// Grid refinement ran out of budget; carries the last two estimates.
class nonconvergence_error : public error
{
public:
    nonconvergence_error(const std::string &what, std::complex<double> previous, std::complex<double> last)
        : error(what), m_prev(previous), m_last(last)
    {
    }
    std::complex<double> previous() const noexcept
    {
        return m_prev;
    }
    std::complex<double> last() const noexcept
    {
        return m_last;
    }

private:
    std::complex<double> m_prev;
    std::complex<double> m_last;
};

/// A parameter sample violates the constraints of a scenario.
class sample_rejected : public error
{
public:
    using error::error;
};

/// Invalid or infeasible configuration (safe box, CLI arguments, config file).
class config_error : public error
{
public:
    using error::error;
};

} // namespace ellsel

#endif
