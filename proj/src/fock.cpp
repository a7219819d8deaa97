#include "sbr/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "sbr/model.hpp"

namespace sbr {

namespace {

// Nodes/weights of n-point Gauss-Legendre on [-1,1] by Newton on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p0 = 0, p1 = 0;
        for (int it = 0; it < 100; ++it) {
            p0 = 1.0;
            p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
            }
            double dp = n * (t * p0 - p1) / (t * t - 1.0);
            double dt = -p0 / dp;
            t += dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p1d = 0;
        {
            double a = 1.0, b = 0.0;
            for (int j = 0; j < n; ++j) {
                double c = b;
                b = a;
                a = ((2.0 * j + 1.0) * t * b - j * c) / (j + 1.0);
            }
            p1d = n * (t * a - b) / (t * t - 1.0);
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        double wi = 2.0 / ((1.0 - t * t) * p1d * p1d);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
}

void enumerate_states(int modes, int n_max, std::vector<int>& cur, int used,
                      std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == modes) {
        out.push_back(cur);
        return;
    }
    for (int n = 0; n <= n_max - used; ++n) {
        cur.push_back(n);
        enumerate_states(modes, n_max, cur, used + n, out);
        cur.pop_back();
    }
}

}  // namespace

int dimension_cap() {
    if (const char* env = std::getenv("SBR_DIM_CAP")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return kDefaultDimensionCap;
}

ModeGrid make_grid(int shells, QuadScheme scheme, double radius_max, bool folded) {
    if (shells <= 0) throw config_error("grid needs at least one shell");
    ModeGrid grid;
    grid.scheme = scheme;
    grid.radius_max = radius_max;
    grid.shells = shells;
    grid.folded = folded;

    std::vector<double> r(shells), dr(shells);
    switch (scheme) {
        case QuadScheme::midpoint:
            for (int i = 0; i < shells; ++i) {
                dr[i] = radius_max / shells;
                r[i] = (i + 0.5) * dr[i];
            }
            break;
        case QuadScheme::gauss_legendre: {
            std::vector<double> x, w;
            gauss_legendre(shells, x, w);
            for (int i = 0; i < shells; ++i) {
                r[i] = 0.5 * radius_max * (x[i] + 1.0);
                dr[i] = 0.5 * radius_max * w[i];
            }
            break;
        }
        case QuadScheme::dyadic:
            // geometric shells with ratio 2: cell (R 2^{-i-1}, R 2^{-i}],
            // midpoint node; rho = 2^{-j} maps nodes onto nodes.
            for (int i = 0; i < shells; ++i) {
                double hi = radius_max * std::pow(2.0, -i);
                double lo = 0.5 * hi;
                r[i] = 0.75 * hi;
                dr[i] = hi - lo;
            }
            break;
    }

    double angular = 4.0 * std::numbers::pi;
    int pols = folded ? 1 : 2;
    double polw = folded ? 2.0 : 1.0;
    for (int i = 0; i < shells; ++i) {
        for (int lam = 1; lam <= pols; ++lam) {
            Mode m;
            m.shell_index = i;
            m.polarization = lam;
            m.frequency = r[i];
            m.weight = polw * angular * r[i] * r[i] * dr[i];
            grid.modes.push_back(m);
        }
    }
    std::sort(grid.modes.begin(), grid.modes.end(), [](const Mode& a, const Mode& b) {
        return a.polarization != b.polarization ? a.polarization < b.polarization
                                                : a.frequency < b.frequency;
    });

    std::ostringstream id;
    id << "g" << shells << "s" << static_cast<int>(scheme) << "r" << radius_max
       << (folded ? "f" : "u");
    grid.id = id.str();
    return grid;
}

double grid_integral(const ModeGrid& grid, const std::function<double(double, int)>& f) {
    double acc = 0;
    for (const auto& m : grid.modes) acc += m.weight * f(m.frequency, m.polarization);
    return acc;
}

FockBasis build_basis(const ModeGrid& grid, int n_max) {
    if (n_max < 0) throw precondition_error("n_max must be >= 0");
    if (grid.modes.empty()) throw precondition_error("empty grid");
    FockBasis b;
    b.mode_count = grid.size();
    b.max_total_bosons = n_max;
    std::vector<int> cur;
    enumerate_states(b.mode_count, n_max, cur, 0, b.states);
    std::sort(b.states.begin(), b.states.end());
    if (static_cast<long>(b.states.size()) > dimension_cap())
        throw resource_error("Fock dimension " + std::to_string(b.states.size()) +
                             " exceeds cap " + std::to_string(dimension_cap()));
    for (int i = 0; i < b.size(); ++i) b.index[b.states[i]] = i;
    b.tag = "F[" + grid.id + ",n" + std::to_string(n_max) + "]";
    return b;
}

double state_energy(const FockBasis& basis, const ModeGrid& grid, int state) {
    const auto& occ = basis.states[state];
    double e = 0;
    for (int q = 0; q < basis.mode_count; ++q) e += occ[q] * grid.modes[q].frequency;
    return e;
}

std::string product_tag(int atomic_dim, const FockBasis& basis) {
    return "C" + std::to_string(atomic_dim) + "x" + basis.tag;
}

OperatorMatrix creation_op(const FockBasis& basis, int mode_index) {
    if (mode_index < 0 || mode_index >= basis.mode_count)
        throw std::out_of_range("mode index");
    Mat m = Mat::Zero(basis.size(), basis.size());
    for (int s = 0; s < basis.size(); ++s) {
        std::vector<int> occ = basis.states[s];
        occ[mode_index] += 1;
        int t = basis.index_of(occ);
        if (t >= 0) m(t, s) = std::sqrt(static_cast<double>(occ[mode_index]));
    }
    return {std::move(m), basis.tag};
}

OperatorMatrix annihilation_op(const FockBasis& basis, int mode_index) {
    OperatorMatrix c = creation_op(basis, mode_index);
    return {c.mat.adjoint(), basis.tag};
}

OperatorMatrix field_energy_op(const FockBasis& basis, const ModeGrid& grid) {
    Mat m = Mat::Zero(basis.size(), basis.size());
    for (int s = 0; s < basis.size(); ++s) m(s, s) = state_energy(basis, grid, s);
    return {std::move(m), basis.tag};
}

OperatorMatrix parity_op(const FockBasis& basis) {
    Mat m = Mat::Zero(basis.size(), basis.size());
    for (int s = 0; s < basis.size(); ++s) {
        int total = 0;
        for (int v : basis.states[s]) total += v;
        m(s, s) = (total % 2 == 0) ? 1.0 : -1.0;
    }
    return {std::move(m), basis.tag};
}

std::pair<OperatorMatrix, OperatorMatrix> smeared_ops(const FockBasis& basis,
                                                      const ModeGrid& grid,
                                                      const CouplingFunction& g, int d) {
    const int nf = basis.size();
    Mat a = Mat::Zero(static_cast<Eigen::Index>(d) * nf, static_cast<Eigen::Index>(d) * nf);
    for (int q = 0; q < grid.size(); ++q) {
        const Mode& mode = grid.modes[q];
        Mat gk = g(mode.frequency, mode.polarization);
        if (!gk.allFinite())
            throw numerical_error("coupling not finite at grid mode " + std::to_string(q));
        if (gk.rows() != d || gk.cols() != d)
            throw std::invalid_argument("coupling dimension mismatch");
        Mat aq = annihilation_op(basis, q).mat;
        a += std::sqrt(mode.weight) * kron(gk.adjoint(), aq);
    }
    std::string tag = product_tag(d, basis);
    return {OperatorMatrix{a, tag}, OperatorMatrix{a.adjoint(), tag}};
}

OperatorMatrix interaction_op(const FockBasis& basis, const ModeGrid& grid,
                              const CouplingFunction& g, int d) {
    CouplingFunction scaled = g;
    auto base = g.eval;
    scaled.eval = [base](double k, int lam) -> Mat { return base(k, lam) / std::sqrt(k); };
    auto [a, astar] = smeared_ops(basis, grid, scaled, d);
    return {a.mat + astar.mat, a.basis_tag};
}

Mat lift_fock_mat(int d, const FockBasis&, const Mat& fock_op) {
    return kron(Mat::Identity(d, d), fock_op);
}

Mat lift_atomic_mat(const Mat& atomic, const FockBasis& basis) {
    return kron(atomic, Mat::Identity(basis.size(), basis.size()));
}

double pull_through_check(const FockBasis& basis, const ModeGrid& grid,
                          const std::function<double(double)>& f, int mode_index) {
    const double omega = grid.modes[mode_index].frequency;
    Mat adag = creation_op(basis, mode_index).mat;
    Mat lhs = Mat::Zero(basis.size(), basis.size());
    Mat rhs = Mat::Zero(basis.size(), basis.size());
    for (int s = 0; s < basis.size(); ++s) {
        double es = state_energy(basis, grid, s);
        for (int t = 0; t < basis.size(); ++t) {
            if (adag(t, s) == cplx(0)) continue;
            double et = state_energy(basis, grid, t);
            lhs(t, s) = f(et) * adag(t, s);
            rhs(t, s) = adag(t, s) * f(es + omega);
        }
    }
    double worst = 0;
    for (int s = 0; s < basis.size(); ++s) {
        int total = 0;
        for (int v : basis.states[s]) total += v;
        if (total > basis.max_total_bosons - 1) continue;  // truncation visible here
        for (int t = 0; t < basis.size(); ++t)
            worst = std::max(worst, std::abs(lhs(t, s) - rhs(t, s)));
    }
    return worst;
}

}  // namespace sbr
