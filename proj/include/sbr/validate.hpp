#pragma once

#include <random>

#include "sbr/feshbach.hpp"
#include "sbr/kernels.hpp"
#include "sbr/model.hpp"

namespace sbr {

struct SpectralResult {
    cplx g;
    cplx ground_energy;
    Vec ground_vector;
    double gap_to_next = 0;
    double residual = 0;  // ||(H - E) v||
};

// Dense eigensolve; Hermitian path for real g, general path otherwise.
// For complex g the eigenvalue closest to `target` is selected when given.
SpectralResult exact_ground_state(const OperatorMatrix& h, cplx g,
                                  std::optional<cplx> target = std::nullopt);

// Independent refinement of the smallest eigenpair by shifted inverse iteration.
double inverse_iteration_ground(const Mat& h, double shift, int iters = 200);

struct ExpansionFit {
    std::vector<double> g_samples;
    std::vector<double> energies;
    double fitted_eps2 = 0;
    double eps2_rel_error = 0;
    std::vector<double> remainders;  // (E_g - eps_at - g^2 eps2)/g^2
    bool remainder_monotone = false;
    double parity_max_diff = 0;  // max |E_g - E_{-g}|
};

ExpansionFit expansion_check(const AtomicSystem& sys, const CouplingFunction& g,
                             const ModeGrid& grid, const FockBasis& basis,
                             const SecondOrderData& second, double g_lo, int points = 6,
                             double ratio = 5.0);

// Window start per the residual-floor and separation rules.
double choose_g_lo(const SecondOrderData& second, double floor = 1e-13,
                   double min_gap = 1e-8);

struct InequalityRecord {
    std::string name;
    int draws = 0;
    int violations = 0;
    double min_slack = 0;   // bound - value, minimum over draws
    double mean_slack = 0;
};

struct InequalityReport {
    std::vector<InequalityRecord> records;
    bool all_hold = true;
};

// Randomized instantiation of the lemma-level inequalities
// (interaction sandwich bound, free-resolvent bounds, creation estimates,
// kernel operator-norm bounds, sharp-norm bound).
InequalityReport inequality_suite(const AtomicSystem& sys, const ModeGrid& grid,
                                  const FockBasis& basis, const SmoothCutoff& cutoff,
                                  std::uint64_t seed, int draws = 20);

// Random couplings / kernels used by the suite and by tests.
CouplingFunction random_coupling(int dim, std::mt19937_64& rng, double mu = 0.75);
IntegralKernel random_kernel(int m, int n, int d, const std::vector<double>& r_grid,
                             const std::vector<Mode>& nodes, const SmoothCutoff& cutoff,
                             std::mt19937_64& rng);

}  // namespace sbr
