#pragma once

#include <functional>
#include <string>
#include <vector>

#include "arsjoint/autodiff.hpp"

namespace arsjoint {

// f maps a fresh tape and the input variable to a 1x1 output.
using InputFunction = std::function<Var(Tape&, const Var&)>;
using ParameterFunction = std::function<Var(Tape&)>;

// Max over coordinates of |g_analytic - g_central| / max(1, |g_central|).
// Requires h in [1e-6, 1e-3] and finite f(x).
double grad_check(const InputFunction& f, const Matrix& x, double h);

// Same measure over every scalar of the listed parameters (all of them when
// `paths` is empty). Parameter values are restored afterwards.
double grad_check_parameters(const ParameterFunction& f, ParameterMap& params, double h,
                             const std::vector<std::string>& paths = {});

}  // namespace arsjoint
