#pragma once

namespace commute {

/// Default sharpness of the mollifier family used by the cube collapse.
inline constexpr double kDefaultLambdaCap = 30.0;

/// Half-width of the plateau where the smoothstep is exactly the identity:
/// a(t) = t for t in [kIdentityEdge, 1 - kIdentityEdge].
inline constexpr double kIdentityEdge = 1.0 / 3.0;

/// rho(t) = e^{-L/t} / (e^{-L/t} + e^{-L/(1-t)}) on (0,1), 0 for t <= 0 and
/// 1 for t >= 1. Flat to all orders at both ends and rho(t) + rho(1-t) = 1.
double sigmoid_rho(double t, double lambda_cap);

/// Smooth step from 0 (r <= lo) to 1 (r >= hi) built from sigmoid_rho.
double smooth_step(double r, double lo, double hi, double lambda_cap);

/// Smoothstep a: [0,1] -> [0,1], a(t) = (t*g(t) - 1)*g(1-t) + 1 where g is the
/// flat cutoff g(t) = rho(t / kIdentityEdge) below kIdentityEdge and 1 above.
/// Exactly the identity on the middle third, monotone, a(t) + a(1-t) = 1, and
/// all derivatives vanish at 0 and 1. Throws UsageError for t outside [0,1]
/// or a non-positive lambda_cap.
double smoothstep_a(double t, double lambda_cap = kDefaultLambdaCap);

} // namespace commute
