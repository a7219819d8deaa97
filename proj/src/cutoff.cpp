#include "sbr/cutoff.hpp"

#include <cmath>

namespace sbr {

namespace {

// C-infinity step on [0,1]: s(0)=0, s(1)=1, all derivatives vanish at the ends.
double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double a = std::exp(-1.0 / x);
    double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double chi_poly_smooth(double t) {
    if (t <= 0.75) return 1.0;
    if (t >= 1.0) return 0.0;
    double u = (t - 0.75) / 0.25;
    return std::sqrt(1.0 - smooth_step(u));
}

double chi_exp_bump(double t) {
    if (t <= 0.75) return 1.0;
    if (t >= 1.0) return 0.0;
    double u = (t - 0.75) / 0.25;
    return std::exp(-u * u / (1.0 - u * u));
}

double sup_abs_derivative(const std::function<double(double)>& f) {
    // dense sampling plus local ternary refinement around the maximum
    const int samples = 100000;
    const double lo = 0.74, hi = 1.01, h = 1e-7;
    auto deriv = [&](double t) { return std::abs(f(t + h) - f(t - h)) / (2.0 * h); };
    double best = 0, best_t = lo;
    for (int i = 0; i <= samples; ++i) {
        double t = lo + (hi - lo) * i / samples;
        double d = deriv(t);
        if (d > best) {
            best = d;
            best_t = t;
        }
    }
    double a = best_t - (hi - lo) / samples, b = best_t + (hi - lo) / samples;
    for (int it = 0; it < 200; ++it) {
        double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (deriv(m1) < deriv(m2))
            a = m1;
        else
            b = m2;
    }
    return std::max(best, deriv((a + b) / 2.0));
}

}  // namespace

SmoothCutoff make_cutoff(CutoffKind kind) {
    SmoothCutoff c;
    c.kind = kind;
    std::function<double(double)> chi =
        kind == CutoffKind::poly_smooth ? std::function<double(double)>(chi_poly_smooth)
                                        : std::function<double(double)>(chi_exp_bump);
    c.chi = chi;
    // chibar := sqrt(1 - chi^2) makes property (ii) exact by construction
    c.chibar = [chi](double t) {
        double v = chi(t);
        return std::sqrt(std::max(0.0, 1.0 - v * v));
    };
    c.chi_prime_sup = sup_abs_derivative(chi);
    return c;
}

BoundConstants bound_constants(const SmoothCutoff& cutoff) {
    BoundConstants b;
    b.c_f = 10.0 * cutoff.chi_prime_sup + 20.0;
    b.c_f_hat = 20.0;
    b.c_chi = 20.0 * std::sqrt(2.0);
    b.c_chi_hat = 20.0;
    return b;
}

}  // namespace sbr
