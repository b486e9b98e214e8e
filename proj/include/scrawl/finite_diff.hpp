#pragma once

#include <functional>
#include <vector>

#include "scrawl/params.hpp"

namespace scrawl::num {

// |a - g| / max(|a|, |g|, 1e-8)
double relative_error(double a, double g);

// Centered-difference gradient of f with respect to every entry of every
// parameter, perturbing in place. Independent of the tape: the standard
// oracle the reverse-mode path is checked against.
std::vector<Matrix> finite_difference(const std::function<double()>& f,
                                      const ParamSet& params, double h = 1e-5);

// Worst relative error between an analytic gradient set and its
// finite-difference counterpart (same ParamSet ordering).
double max_relative_error(const std::vector<Matrix>& analytic,
                          const std::vector<Matrix>& numeric);

} // namespace scrawl::num
