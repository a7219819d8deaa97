#pragma once

#include "sbr/kernels.hpp"

namespace sbr {

// Matrix-valued function of a scalar argument.
using MatFn = std::function<Mat(double)>;

// One normal-ordered factor in a product chain: m external creation legs,
// p contracted creation slots, n external annihilation legs, q contracted
// annihilation slots. eval receives the field-energy argument of the kernel
// and the four leg groups (externals first).
struct WickBlock {
    int m = 0, p = 0, n = 0, q = 0;
    std::function<Mat(double, const std::vector<Leg>&, const std::vector<Leg>&,
                      const std::vector<Leg>&, const std::vector<Leg>&)>
        eval;
    double combinatorial = 1.0;  // binom(m+p, p) * binom(n+q, q)
};

// Product F_0 W F_1 W ... W F_L to be brought to normal order. Gap factors
// are evaluated at (in-flight field energy + r + rtilde_l); reduced-space
// window indicators, when active, use the same argument.
struct WickProductSpec {
    int L = 1;
    int d = 1;
    std::vector<WickBlock> candidates;  // admissible blocks, same at every position
    std::vector<MatFn> gaps;            // F_0 .. F_L
    bool windowed = false;              // 1_{[0,window]}(H_f) at block boundaries
    double window = 1.0;
    const ModeGrid* grid = nullptr;     // contraction quadrature
    int p_cap = 4, q_cap = 4;
};

// Unsymmetrized output kernel w~_{M,N}(r, K) of the normal-ordered product.
// Dispatches to an explicit operator product on a small truncated Fock space
// for L <= 2 and to symbolic contraction enumeration for L >= 3.
Mat wick_eval(const WickProductSpec& spec, int M, int N, double r,
              const std::vector<Leg>& km, const std::vector<Leg>& kn);

Mat wick_eval_symbolic(const WickProductSpec& spec, int M, int N, double r,
                       const std::vector<Leg>& km, const std::vector<Leg>& kn);
Mat wick_eval_matrix(const WickProductSpec& spec, int M, int N, double r,
                     const std::vector<Leg>& km, const std::vector<Leg>& kn);

// Number of admissible multi-index terms for (M,N) at order L
// (the index-set cardinality the flow estimates sum over).
long wick_term_count(const WickProductSpec& spec, int M, int N);

// Symmetrized kernels for all M + N <= MN_max, sampled on r_grid x nodes.
KernelFamily wick_normal_order(const WickProductSpec& spec, int MN_max,
                               const std::vector<double>& r_grid,
                               const std::vector<Mode>& k_nodes, double mu, double xi);

// Chain evaluators for the two concrete steps live in flow.cpp; the helpers
// below build blocks from a stored kernel family (second-step shape).
std::vector<WickBlock> family_blocks(const KernelFamily& fam, int p_cap, int q_cap);

}  // namespace sbr
