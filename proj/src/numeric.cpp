#include "multistage/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace multistage {

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    if (max_subdivisions < 1)
        throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
}

namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Interval {
    double a, b, integral, error;
};

struct ByError {
    bool operator()(const Interval& x, const Interval& y) const {
        return x.error < y.error;
    }
};

Interval gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];

    for (int j = 0; j < 3; ++j) {
        const int idx = 2 * j + 1;
        const double dx = half * kXgk[idx];
        const double fsum = f(center - dx) + f(center + dx);
        resg += kWg[j] * fsum;
        resk += kWgk[idx] * fsum;
    }
    for (int j = 0; j < 4; ++j) {
        const int idx = 2 * j;
        const double dx = half * kXgk[idx];
        const double fsum = f(center - dx) + f(center + dx);
        resk += kWgk[idx] * fsum;
    }

    return {a, b, resk * half, std::abs((resk - resg) * half)};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& spec) {
    spec.validate();
    if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
    if (a == b) return 0.0;

    std::priority_queue<Interval, std::vector<Interval>, ByError> queue;
    Interval whole = gk15(f, a, b);
    double total = whole.integral;
    double total_err = whole.error;
    queue.push(whole);

    int subdivisions = 1;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (!std::isfinite(total) || !std::isfinite(total_err))
            throw std::runtime_error("integrate: non-finite integrand values encountered");
        if (subdivisions >= spec.max_subdivisions)
            throw std::runtime_error(
                "integrate: failed to converge after " + std::to_string(subdivisions) +
                " subdivisions (error estimate " + std::to_string(total_err) + ")");

        Interval worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw std::runtime_error("integrate: interval too small to subdivide further");

        Interval lhs = gk15(f, worst.a, mid);
        Interval rhs = gk15(f, mid, worst.b);
        total += lhs.integral + rhs.integral - worst.integral;
        total_err += lhs.error + rhs.error - worst.error;
        queue.push(lhs);
        queue.push(rhs);
        ++subdivisions;
    }

    if (!std::isfinite(total))
        throw std::runtime_error("integrate: non-finite result");
    return total;
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");

    // Lanczos, g = 7, n = 9.
    static constexpr double kCoef[9] = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7};
    static const double kHalfLogTwoPi = 0.9189385332046727417803297364056;

    if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);

    const double z = x - 1.0;
    double sum = kCoef[0];
    for (int i = 1; i < 9; ++i) sum += kCoef[i] / (z + i);
    const double base = z + 7.5;
    return kHalfLogTwoPi + (z + 0.5) * std::log(base) - base + std::log(sum);
}

double expm1_over_x(double x) {
    if (x == 0.0) return 1.0;
    return std::expm1(x) / x;
}

}  // namespace multistage
