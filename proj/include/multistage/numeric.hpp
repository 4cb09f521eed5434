#pragma once

#include <functional>

namespace multistage {

/// Tolerances and budget for adaptive quadrature.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int max_subdivisions = 2000;

    void validate() const;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// Requires a <= b; throws std::runtime_error if the error estimate cannot
/// be brought below max(abs_tol, rel_tol*|I|) within max_subdivisions.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec = {});

/// log Gamma(x) for x > 0 (Lanczos approximation, relative error ~1e-13).
double log_gamma(double x);

/// (e^x - 1) / x with the removable singularity at x = 0 handled.
double expm1_over_x(double x);

}  // namespace multistage
