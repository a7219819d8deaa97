#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "sbr/types.hpp"

namespace sbr {

// One discretized boson mode: a radial shell (times polarization) of the
// one-particle momentum space. The quadrature weight carries the angular
// factor 4*pi*|k|^2 and, on folded grids, the polarization sum.
struct Mode {
    int shell_index = 0;
    int polarization = 1;  // 1 or 2; folded grids use 1
    double frequency = 0;  // omega(k) = |k|
    double weight = 0;     // quadrature weight for the dk integral
};

enum class QuadScheme { midpoint, gauss_legendre, dyadic };

struct ModeGrid {
    std::vector<Mode> modes;
    double radius_max = 1.0;
    QuadScheme scheme = QuadScheme::gauss_legendre;
    int shells = 0;
    bool folded = true;  // polarization sum folded into weights
    std::string id;      // basis-tag component

    int size() const { return static_cast<int>(modes.size()); }
};

// Radial quadrature of sum_lambda int_{|k|<=R} f(|k|,lambda) d^3k.
// Folded grids require lambda-independent integrands and are evaluated at lambda=1.
ModeGrid make_grid(int shells, QuadScheme scheme, double radius_max = 1.0, bool folded = true);

double grid_integral(const ModeGrid& grid, const std::function<double(double, int)>& f);

// Occupation-number basis over the grid modes, truncated at total boson
// number n_max. States are in lexicographic order; state 0 is the vacuum.
struct FockBasis {
    int mode_count = 0;
    int max_total_bosons = 0;
    std::vector<std::vector<int>> states;
    std::map<std::vector<int>, int> index;
    std::string tag;

    int size() const { return static_cast<int>(states.size()); }
    int index_of(const std::vector<int>& occ) const {
        auto it = index.find(occ);
        return it == index.end() ? -1 : it->second;
    }
};

inline constexpr int kDefaultDimensionCap = 20000;

// Dimension cap: env SBR_DIM_CAP overrides the default.
int dimension_cap();

FockBasis build_basis(const ModeGrid& grid, int n_max);

// Total field energy of an occupation vector.
double state_energy(const FockBasis& basis, const ModeGrid& grid, int state);

std::string product_tag(int atomic_dim, const FockBasis& basis);

// Truncated a_q^dagger / a_q on the Fock basis alone.
OperatorMatrix creation_op(const FockBasis& basis, int mode_index);
OperatorMatrix annihilation_op(const FockBasis& basis, int mode_index);

// Diagonal H_f.
OperatorMatrix field_energy_op(const FockBasis& basis, const ModeGrid& grid);

// (-1)^N.
OperatorMatrix parity_op(const FockBasis& basis);

struct CouplingFunction;  // model.hpp

// a(G) = sum_q sqrt(w_q) G(k_q)^* (x) a_q on the product space C^d (x) F,
// and its adjoint a^*(G). Returned as (a(G), a^*(G)).
std::pair<OperatorMatrix, OperatorMatrix> smeared_ops(const FockBasis& basis,
                                                      const ModeGrid& grid,
                                                      const CouplingFunction& g, int d);

// W = a^*(omega^{-1/2} G) + a(omega^{-1/2} G).
OperatorMatrix interaction_op(const FockBasis& basis, const ModeGrid& grid,
                              const CouplingFunction& g, int d);

// Lift a Fock-space operator or an atomic operator to the product space.
OperatorMatrix lift_fock(const Mat& atomic_identity_dim, const OperatorMatrix& fock_op);
Mat lift_fock_mat(int d, const FockBasis& basis, const Mat& fock_op);
Mat lift_atomic_mat(const Mat& atomic, const FockBasis& basis);

// Max |entry| of f(H_f) a_q^dagger - a_q^dagger f(H_f + omega_q), restricted
// to source states with total bosons <= n_max - 1 where truncation is invisible.
double pull_through_check(const FockBasis& basis, const ModeGrid& grid,
                          const std::function<double(double)>& f, int mode_index);

}  // namespace sbr
