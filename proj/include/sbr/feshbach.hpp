#pragma once

#include "sbr/cutoff.hpp"
#include "sbr/fock.hpp"
#include "sbr/model.hpp"

namespace sbr {

// Generalized projections chi_rho = P (x) chi(H_f/rho),
// chibar_rho = Pbar (x) 1 + P (x) chibar(H_f/rho) on the product basis.
struct SmoothedProjectionPair {
    int step = 1;
    double rho = 0;
    OperatorMatrix chi_op;
    OperatorMatrix chibar_op;
};

// step 1: atomic_proj = P_at; step 2: atomic_proj = lifted P_at^(2).
SmoothedProjectionPair smoothed_projections(int step, const Mat& atomic_proj,
                                            const SmoothCutoff& cutoff, double rho,
                                            const FockBasis& basis, const ModeGrid& grid);

struct FeshbachResult {
    OperatorMatrix f_op;  // F_chi(H,T), full-space matrix supported on Ran chi
    OperatorMatrix q_op;  // Q_chi
    double inverse_norm = 0;  // || (H_chibar restricted)^{-1} ||
    std::vector<double> neumann_orders;  // per-order term 2-norms, L = 1..cap
    double direct_vs_neumann = 0;        // ||F_direct - F_neumann|| / ||F_direct||
    double first_omitted_bound = 0;      // geometric bound on the L = cap+1 term
    double smallest_sv_on_ran_chi = 0;   // of f_op compressed to Ran chi
};

// F_chi(H,T) = H_chi - chi W chibar H_chibar^{-1} chibar W chi with W = H - T,
// computed by direct block inversion and by the Neumann expansion.
FeshbachResult feshbach_operator(const OperatorMatrix& h, const OperatorMatrix& t,
                                 const SmoothedProjectionPair& pair, int order_cap = 12,
                                 double sv_floor_rel = 1e-12);

struct PairCriterion1 {
    bool ok = false;
    double margin = 0;  // |g| / bound
    bool rho_ok = false, z_ok = false, g_ok = false;
};

// Thm-level gate: 0 < rho <= 1/4, z in D_{rho/2}(eps_at),
// |g| < sqrt(rho) / (10 ||omega^{-1} G||).
PairCriterion1 feshbach_pair_criterion_1(const AtomicSystem& sys, const CouplingNorms& norms,
                                         cplx g, double rho, cplx z);

struct ResolventBoundsReport {
    double plain_norm = 0;         // ||(H0-z)^{-1}|Ran chibar||
    double plain_bound = 0;        // 4/rho
    bool plain_holds = false;
    struct Weighted {
        double tau = 0;
        double norm = 0;
        double bound = 0;  // 1 + 4 tau / rho
        bool holds = false;
    };
    std::vector<Weighted> weighted;  // tau in {0, rho, 1}
};

ResolventBoundsReport resolvent_bounds_check(const AtomicSystem& sys, const SmoothCutoff& cutoff,
                                             double rho, cplx z, const FockBasis& basis,
                                             const ModeGrid& grid);

// Orthonormal basis of the column space of a Hermitian PSD operator
// (eigenvectors above the floor).
Mat range_basis(const Mat& psd, double floor = 1e-10);

}  // namespace sbr
