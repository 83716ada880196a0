// Umbrella header.

#ifndef ELLSEL_ELLSEL_HPP
#define ELLSEL_ELLSEL_HPP

#include "bc_invariants.hpp"
#include "errors.hpp"
#include "integrand.hpp"
#include "params.hpp"
#include "qseries.hpp"
#include "report.hpp"
#include "residue_limits.hpp"
#include "torus_quadrature.hpp"
#include "verify.hpp"

#endif
