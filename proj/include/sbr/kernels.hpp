#pragma once

#include <map>
#include <optional>

#include "sbr/cutoff.hpp"
#include "sbr/fock.hpp"
#include "sbr/types.hpp"

namespace sbr {

// One momentum leg of a kernel argument. Folded grids carry lambda = 1.
struct Leg {
    double omega = 0;
    int lambda = 1;
};

// w_{m,n}(r, k^{(m)}, ktilde^{(n)}) -> d x d matrix.
using KernelEval =
    std::function<Mat(double, const std::vector<Leg>&, const std::vector<Leg>&)>;

// Discretized matrix-valued integral kernel. Values are sampled on
// r_grid x (k_nodes)^{m+n}; an evaluator, when present, is the exact source
// of those samples and is used for rescaling and off-grid evaluation.
struct IntegralKernel {
    int m = 0, n = 0, d = 1;
    double mu = 0.5;  // infrared index entering the kernel norm
    std::vector<double> r_grid;
    std::vector<Mode> k_nodes;
    std::vector<Mat> values;        // index = ((r_i * N^m+n) + node tuple), row-major tuples
    std::vector<Mat> deriv_values;  // d/dr, same layout; empty if absent
    bool symmetric = true;
    KernelEval eval;  // optional

    int nodes() const { return static_cast<int>(k_nodes.size()); }
    long tuple_count() const;
    long value_index(int r_idx, const std::vector<int>& tuple) const;
    const Mat& at(int r_idx, const std::vector<int>& tuple) const;
    bool has_deriv() const { return !deriv_values.empty(); }
};

// Samples an evaluator on the grids; derivative by centered differences
// unless an analytic derivative is supplied.
IntegralKernel sample_kernel(int m, int n, int d, const std::vector<double>& r_grid,
                             const std::vector<Mode>& k_nodes, const KernelEval& eval,
                             const KernelEval& deriv = nullptr, double mu = 0.5);

std::vector<double> uniform_r_grid(int points = 65);

struct KernelFamily {
    std::map<std::pair<int, int>, IntegralKernel> kernels;
    double mu = 0.5;
    double xi = 0.25;
    int d = 1;

    const IntegralKernel* find(int m, int n) const {
        auto it = kernels.find({m, n});
        return it == kernels.end() ? nullptr : &it->second;
    }
    IntegralKernel* find(int m, int n) {
        auto it = kernels.find({m, n});
        return it == kernels.end() ? nullptr : &it->second;
    }
};

// Polydisc radii around the free field energy (Eq-level data).
struct PolydiscRadii {
    double alpha = 0, beta = 0, gamma = 0;
};

// || w_{m,n} ||_mu ; for m = n = 0 this is the sup norm over r_grid.
double norm_mu(const IntegralKernel& k);
// || w ||_mu^# = || w ||_mu + || d_r w ||_mu; (0,0) gives the C^1 norm.
double norm_mu_sharp(const IntegralKernel& k);
// || w ||_{mu,xi}^# = ||w_00||_C1 + sum_{m+n>=1} xi^{-(m+n)} ||w_mn||_mu^#.
struct FamilyNorm {
    double total = 0;
    std::map<std::pair<int, int>, double> contributions;
};
FamilyNorm norm_family(const KernelFamily& fam);
double norm_family_interacting(const KernelFamily& fam);  // m+n >= 1 part only

// H(w) = sum_{m,n} H_{m,n}(w_{m,n}) sandwiched by 1_{[0,window]}(H_f),
// assembled on the d * dim(F) product basis. Every integrated leg carries
// the discrete factor sqrt(weight/omega).
OperatorMatrix kernel_to_operator(const KernelFamily& fam, const FockBasis& basis,
                                  const ModeGrid& grid, double window = 1.0);
OperatorMatrix kernel_to_operator_one(const IntegralKernel& k, const FockBasis& basis,
                                      const ModeGrid& grid, double window = 1.0,
                                      bool project = true);

// s_rho(w)[r,K] = rho^{(m+n)-1} w[rho r, rho K]. Exact when the kernel has an
// evaluator; otherwise linear interpolation in r (and node-snapping in K,
// exact only on dyadic grids).
KernelFamily scale_kernel(const KernelFamily& fam, double rho);
IntegralKernel scale_kernel_one(const IntegralKernel& k, double rho);

// Dilation Gamma_rho on the truncated basis (mode frequency omega -> omega/rho,
// truncated), and S_rho(A) = rho^{-1} Gamma A Gamma^*.
struct DilationOps {
    OperatorMatrix gamma;           // on the Fock basis alone
    std::function<Mat(const Mat&)> s_rho_fock;  // Fock-space conjugation
    std::vector<int> mode_map;      // source mode -> image mode (omega/rho), -1 if truncated
    std::vector<int> kept_states;   // states whose occupied modes all map
};
DilationOps dilation_ops(const FockBasis& basis, const ModeGrid& grid, double rho);

// Appendix-level sharp norm ||w||_# and the bound ||H_mn(w)|| <= ||w||_#
// (operator assembled without the reduced-space projection).
struct SharpBoundReport {
    double sharp_norm = 0;
    double op_norm = 0;
    bool holds = false;
    double slack = 0;
};
SharpBoundReport sharp_norm_bound_check(const IntegralKernel& k, const FockBasis& basis,
                                        const ModeGrid& grid);

struct PolydiscCheck {
    bool member = false;
    double slack_alpha = 0, slack_beta = 0, slack_gamma = 0;
    double val_alpha = 0, val_beta = 0, val_gamma = 0;
};
PolydiscCheck polydisc_check(const KernelFamily& fam, const PolydiscRadii& radii);

// Average over permutations of the m and of the n arguments.
IntegralKernel symmetrize(const IntegralKernel& k);

}  // namespace sbr
