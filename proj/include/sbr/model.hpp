#pragma once

#include <map>

#include "sbr/fock.hpp"
#include "sbr/types.hpp"

namespace sbr {

// Finite-dimensional atomic system with its degenerate ground-eigenspace data.
struct AtomicSystem {
    Mat h;               // Hermitian d x d
    double eps_at = 0;   // lowest eigenvalue
    Mat p_at;            // orthogonal projection onto the eps_at eigenspace
    Mat u_ground;        // d x d0 orthonormal basis of Ran p_at (deterministic)
    int d0 = 0;          // degeneracy
    double gap = 0;      // distance from eps_at to the rest of the spectrum
    double scale = 1.0;  // factor applied by normalize_gap

    int dim() const { return static_cast<int>(h.rows()); }
};

AtomicSystem make_atomic(const Mat& h, double cluster_tol = 1e-9);

// Rescales so that the spectral gap equals one; records the factor.
AtomicSystem normalize_gap(const AtomicSystem& sys);

// Matrix-valued coupling G(|k|, lambda) with its infrared index mu.
struct CouplingFunction {
    std::function<Mat(double, int)> eval;
    double mu = 0.5;
    int dim = 1;
    std::string family;  // "power_law" | "zero" | "custom"
    std::map<std::string, std::string> params;
    bool ir_flagged = false;  // set when the mu-norm refinement diverges

    Mat operator()(double k, int lambda = 1) const { return eval(k, lambda); }
};

// G(k) = amp * |k|^sigma * A for |k| <= radius, zero outside.
CouplingFunction power_law_coupling(const Mat& a, double amp, double sigma, double mu,
                                    double radius = 1.0);
CouplingFunction zero_coupling(int dim, double mu);

struct CouplingNorms {
    // Eq-literal mu-quantity (no square root) and its square root. The square
    // root variant is the one used wherever the quantity multiplies other
    // norms in criteria; both are always reported.
    double mu_literal = 0;
    double mu_sqrt = 0;
    double ominv = 0;      // || G/omega ||_{L2}
    double ominvhalf = 0;  // || G/sqrt(omega) ||_{L2}
    double refine_rel_change = 0;
    bool converged = true;
};

CouplingNorms coupling_norms(const CouplingFunction& g, const ModeGrid& grid,
                             double refine_tol = 5e-2);

// Z_at restricted to Ran P_at, in the orthonormal basis sys.u_ground.
struct SecondOrderData {
    Mat z_at;           // d0 x d0 Hermitian
    double eps2 = 0;    // smallest eigenvalue of z_at
    Mat p2;             // d0 x d0 projection onto its eigenspace
    Vec p2_vector;      // unit eigenvector (simple case)
    bool simple = true;
    double norm_z = 0;
    double quad_rel_change = 0;
};

SecondOrderData compute_z_at(const AtomicSystem& sys, const CouplingFunction& g,
                             const ModeGrid& grid, double simple_rel_tol = 1e-6,
                             double quad_tol = 5e-2);

// H_g = H_at (x) 1 + 1 (x) H_f + g W on the product basis.
OperatorMatrix assemble_hamiltonian(const AtomicSystem& sys, const CouplingFunction& g,
                                    const FockBasis& basis, const ModeGrid& grid, cplx gc);

// --- model definition file -------------------------------------------------

struct ModelDefinition {
    Mat h_at;
    std::string coupling_family;  // "power_law"
    Mat coupling_matrix;
    double amp = 0;
    double sigma = 0;
    double mu = 0;
    double radius = 1.0;
    int shells = 6;
    QuadScheme scheme = QuadScheme::gauss_legendre;
    double radius_max = 1.0;
    bool folded = true;
    int n_max = 3;

    AtomicSystem atomic() const { return make_atomic(h_at); }
    CouplingFunction coupling() const {
        return power_law_coupling(coupling_matrix, amp, sigma, mu, radius);
    }
    ModeGrid grid() const { return make_grid(shells, scheme, radius_max, folded); }
};

ModelDefinition parse_model(const std::string& text);
std::string serialize_model(const ModelDefinition& m);
ModelDefinition load_model_file(const std::string& path);

// The bundled reference model: d=3 atomic space with a two-fold degenerate
// ground state, power-law coupling mixing the degenerate pair asymmetrically.
ModelDefinition demo_model();

}  // namespace sbr
