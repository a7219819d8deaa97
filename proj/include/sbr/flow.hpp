#pragma once

#include "sbr/feshbach.hpp"
#include "sbr/kernels.hpp"
#include "sbr/wick.hpp"

namespace sbr {

struct FlowParameters {
    double rho0 = 0.15;
    double rho1 = 0;  // rho0^{1+2 epsilon + alpha} when scheduled
    double epsilon = 0;
    double alpha = 0;
    double delta0 = 0;
    double xi = 0.25;
    int L_max = 4;
    int MN_max = 2;
};

struct ConeAnnulus {
    double g_lower = 0;
    double g_upper = 0;
    double delta0 = 0;
    double c_delta0 = 0;
    bool nonempty = false;
    std::string binding;  // which upper bound is active
};

// c_{delta0} = inf over the cone of |d_at + g^{-2}|.
double c_delta0(double delta0, double d_at);

// rho1 = rho0^{1+2e+a}; annulus bounds g_-(rho0), g_+(rho0).
std::pair<FlowParameters, ConeAnnulus> parameter_schedule(double rho0, double epsilon,
                                                          double alpha, double delta0,
                                                          double xi, double norm_z,
                                                          double c_f, double norm_g_mu,
                                                          double d_at = 1.0);

// Everything the first Feshbach step produces, in both normalizations.
// "pre" kernels live at field energies [0, rho0] (no rescaling); "scaled"
// is s_{rho0}(pre) + the affine base part, matching the rescaled operator.
struct FirstStepResult {
    KernelFamily pre;     // d0 x d0, includes (0,0)
    KernelFamily scaled;  // post-dilation normalization
    double tail_bound = 0;         // mu,xi-norm bound on the omitted L > L_max terms
    PolydiscRadii fitted;          // computed norms (alpha, beta, gamma) of scaled family
    PolydiscRadii paper_radii;     // series-evaluated right-hand sides
    bool polydisc_ok = false;
    PairCriterion1 criterion;
    double c0_bound = 0;           // the series-convergence coupling bound
    bool series_ok = false;
};

FirstStepResult first_step_kernels(const AtomicSystem& sys, const CouplingFunction& g,
                                   const ModeGrid& grid, const SmoothCutoff& cutoff,
                                   cplx gc, double rho0, cplx z, const FlowParameters& p,
                                   const CouplingNorms& norms);

// Per-(L, m,p,n,q) computed ||V||_mu^# next to the analytic bound.
struct FirstStepBoundRow {
    int L = 0;
    std::vector<int> m, p, n, q;
    double computed = 0;
    double bound = 0;
    bool holds = false;
};
struct FirstStepBoundReport {
    std::vector<FirstStepBoundRow> rows;
    bool all_bounds_hold = true;
    int l1_term_count = 0;          // multi-indices contributing at L = 1
    double resolvent_factor = 0;    // || B^{1/2} F B^{1/2} || over the basis
    double resolvent_bound = 20.0;  // hat C_F
    bool resolvent_holds = false;
};
FirstStepBoundReport first_step_bound_report(const AtomicSystem& sys, const CouplingFunction& g,
                                             const ModeGrid& grid, const FockBasis& basis,
                                             const SmoothCutoff& cutoff, cplx gc, double rho0,
                                             cplx z, const FlowParameters& p);

// sup_r || rho0^{-1}(eps_at - z + rho0 r + chi^2(r) g^2 Z_at) - w00^{(1,rho0)}(r) ||.
double free_approximation_error(const FirstStepResult& first, const AtomicSystem& sys,
                                const SecondOrderData& second, const SmoothCutoff& cutoff,
                                cplx gc, double rho0, cplx z);

struct SecondInvertibility {
    bool ok = false;
    bool hyp1 = false, hyp2 = false;  // the two hypothesis inequalities
    double inverse_norm = 0;
    double bound = 0;  // 4 / rho1
    bool bound_holds = false;
};
SecondInvertibility second_step_invertibility(const AtomicSystem& sys,
                                              const SecondOrderData& second,
                                              const SmoothCutoff& cutoff, cplx gc, double rho0,
                                              double rho1, cplx z, const FockBasis& basis,
                                              const ModeGrid& grid, double delta0);

// Exact block split of the post-dilation first-step family.
struct SecondStepDecomposition {
    MatFn t;             // d0 x d0 block-diagonal part of w00 (function of r)
    MatFn t_deriv;
    KernelFamily w_int;  // off-diagonal (0,0) block plus all m+n >= 1 kernels
    MatFn t_free;        // rho0^{-1}(eps_at - z + rho0 r + chi^2(r) g^2 Z_at)
    double tau0 = 0;     // ||t'||_inf
    double tau1 = 0;     // ||P2 t' P2 - 1||
    double offdiag_norm = 0;
    Mat p2;              // within d0
};
SecondStepDecomposition second_step_decompose(const FirstStepResult& first,
                                              const AtomicSystem& sys,
                                              const SecondOrderData& second,
                                              const SmoothCutoff& cutoff, cplx gc, double rho0,
                                              cplx z);

struct SecondFeshbachResult {
    KernelFamily kernels2;  // scalar (d = 1) post-dilation kernels
    PolydiscRadii radii;    // Thm-formula radii (alpha1, beta1, gamma1)
    PolydiscCheck membership;
    bool cond_i = false, cond_ii = false;
    double inverse_norm = 0;             // restricted inverse of H00(t)
    double hw_norm = 0;                  // || H(w_int) ||
    double oracle_rel_error = 0;         // reconstruction vs direct Feshbach matrix
    double gamma = 0, tau0 = 0, tau1 = 0;
};

// Abstract second step: works for any (t, w) pair of the required shape.
SecondFeshbachResult second_feshbach(const SecondStepDecomposition& decomp,
                                     const SmoothCutoff& cutoff, double rho1,
                                     const FockBasis& basis, const ModeGrid& grid,
                                     const FlowParameters& p);

// End-to-end eigenvector reconstruction through both auxiliary operators,
// run at z = E_g in the unrescaled normalization.
struct IsospectralityReport {
    double residual_rel = 0;  // ||(H_g - E_g) Q0 Q1 v|| / (||H_g|| ||v||)
    double f2_smallest_sv = 0;
    bool ok = false;
};
IsospectralityReport isospectrality_chain(const AtomicSystem& sys, const CouplingFunction& g,
                                          const ModeGrid& grid, const FockBasis& basis,
                                          const SmoothCutoff& cutoff, cplx gc, double rho0,
                                          double rho1, cplx e_g, const FlowParameters& p,
                                          const SecondOrderData& second, double tol = 1e-6);

}  // namespace sbr
