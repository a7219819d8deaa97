#pragma once

#include "sbr/types.hpp"

namespace sbr {

enum class CutoffKind { poly_smooth, exp_bump };

// Smooth cutoff pair: chi(t)=1 for t<=3/4, chi(t)=0 for t>=1, and
// chibar = sqrt(1-chi^2) so that chi^2+chibar^2=1 holds exactly.
struct SmoothCutoff {
    std::function<double(double)> chi;
    std::function<double(double)> chibar;
    double chi_prime_sup = 0;  // ||chi'||_inf
    CutoffKind kind = CutoffKind::poly_smooth;

    double chi_sq(double t) const {
        double c = chi(t);
        return c * c;
    }
    double chibar_sq(double t) const {
        double c = chi(t);
        return 1.0 - c * c;
    }
};

SmoothCutoff make_cutoff(CutoffKind kind = CutoffKind::poly_smooth);

// Constants entering the flow estimates; fixed by ||chi'||_inf.
struct BoundConstants {
    double c_f = 0;            // C_F = 10 ||chi'|| + 20
    double c_f_hat = 20.0;     // hat C_F
    double c_chi = 0;          // C_chi = 20 sqrt(2)
    double c_chi_hat = 20.0;   // hat C_chi
};

BoundConstants bound_constants(const SmoothCutoff& cutoff);

}  // namespace sbr
