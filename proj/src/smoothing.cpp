#include "commute/smoothing.hpp"

#include <cmath>

#include "commute/errors.hpp"

namespace commute {

double sigmoid_rho(double t, double lambda_cap) {
  if (t <= 0.0)
    return 0.0;
  if (t >= 1.0)
    return 1.0;
  // e^{-L/t} / (e^{-L/t} + e^{-L/(1-t)}) = 1 / (1 + e^{L (1-2t) / (t (1-t))})
  const double exponent = lambda_cap * (1.0 - 2.0 * t) / (t * (1.0 - t));
  return 1.0 / (1.0 + std::exp(exponent));
}

double smooth_step(double r, double lo, double hi, double lambda_cap) {
  if (r <= lo)
    return 0.0;
  if (r >= hi)
    return 1.0;
  return sigmoid_rho((r - lo) / (hi - lo), lambda_cap);
}

namespace {
double flat_cutoff(double t, double lambda_cap) {
  return t >= kIdentityEdge ? 1.0 : sigmoid_rho(t / kIdentityEdge, lambda_cap);
}
} // namespace

double smoothstep_a(double t, double lambda_cap) {
  if (!(t >= 0.0 && t <= 1.0))
    throw UsageError("smoothstep argument must lie in [0,1]");
  if (!(lambda_cap > 0.0))
    throw UsageError("lambda_cap must be positive");
  if (t == 0.0)
    return 0.0;
  if (t == 1.0)
    return 1.0;
  return (t * flat_cutoff(t, lambda_cap) - 1.0) * flat_cutoff(1.0 - t, lambda_cap) + 1.0;
}

} // namespace commute
