#include "arsjoint/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "arsjoint/errors.hpp"

namespace arsjoint {

namespace {

void check_step(double h) { require(h >= 1e-6 && h <= 1e-3, "grad_check: h must lie in [1e-6, 1e-3]"); }

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

double evaluate(const InputFunction& f, const Matrix& x) {
  Tape tape(false);
  const auto in = tape.variable(x);
  return f(tape, in).scalar();
}

}  // namespace

double grad_check(const InputFunction& f, const Matrix& x, double h) {
  check_step(h);
  Tape tape;
  const auto in = tape.variable(x);
  const auto out = f(tape, in);
  require(out.rows() == 1 && out.cols() == 1, "grad_check: function must be scalar-valued");
  require(std::isfinite(out.scalar()), "grad_check: f(x) is not finite");
  tape.backward(out);
  const Matrix analytic = tape.grad(in);

  double worst = 0.0;
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = probe.data()[i];
    probe.data()[i] = saved + h;
    const double up = evaluate(f, probe);
    probe.data()[i] = saved - h;
    const double down = evaluate(f, probe);
    probe.data()[i] = saved;
    worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

double grad_check_parameters(const ParameterFunction& f, ParameterMap& params, double h,
                             const std::vector<std::string>& paths) {
  check_step(h);
  std::vector<Parameter*> targets;
  if (paths.empty()) {
    for (auto& [path, p] : params) targets.push_back(&p);
  } else {
    for (const auto& path : paths) targets.push_back(&params.at(path));
  }

  params.zero_grad();
  {
    Tape tape;
    const auto out = f(tape);
    require(out.rows() == 1 && out.cols() == 1, "grad_check: function must be scalar-valued");
    require(std::isfinite(out.scalar()), "grad_check: f(x) is not finite");
    tape.backward(out);
  }

  auto evaluate_now = [&] {
    Tape tape(false);
    return f(tape).scalar();
  };

  double worst = 0.0;
  for (auto* p : targets) {
    const Matrix analytic = p->grad;
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.data()[i];
      p->value.data()[i] = saved + h;
      const double up = evaluate_now();
      p->value.data()[i] = saved - h;
      const double down = evaluate_now();
      p->value.data()[i] = saved;
      worst = std::max(worst, relative_error(analytic.data()[i], (up - down) / (2.0 * h)));
    }
  }
  params.zero_grad();
  return worst;
}

}  // namespace arsjoint
