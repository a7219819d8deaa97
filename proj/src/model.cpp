#include "sbr/model.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sbr {

AtomicSystem make_atomic(const Mat& h, double cluster_tol) {
    if (h.rows() != h.cols()) throw std::invalid_argument("atomic matrix not square");
    if ((h - h.adjoint()).norm() > 1e-12 * std::max(1.0, h.norm()))
        throw precondition_error("atomic Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const auto& ev = es.eigenvalues();
    AtomicSystem sys;
    sys.h = (h + h.adjoint()) / 2.0;
    sys.eps_at = ev(0);
    double scale = std::max(1.0, std::abs(ev(ev.size() - 1) - ev(0)));
    int d0 = 0;
    while (d0 < ev.size() && ev(d0) - ev(0) <= cluster_tol * scale) ++d0;
    sys.d0 = d0;
    sys.gap = d0 < ev.size() ? ev(d0) - ev(0) : 0.0;
    Mat p = Mat::Zero(h.rows(), h.cols());
    for (int i = 0; i < d0; ++i) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    sys.p_at = p;
    // deterministic orthonormal basis of Ran p_at
    Eigen::ColPivHouseholderQR<Mat> qr(p);
    Mat q = qr.householderQ();
    sys.u_ground = q.leftCols(d0);
    // align to the projection exactly
    sys.u_ground = p * sys.u_ground;
    Eigen::HouseholderQR<Mat> qr2(sys.u_ground);
    Mat q2 = qr2.householderQ();
    sys.u_ground = q2.leftCols(d0);
    return sys;
}

AtomicSystem normalize_gap(const AtomicSystem& sys) {
    if (sys.gap <= 0) throw precondition_error("degenerate spectrum: gap is zero");
    double s = 1.0 / sys.gap;
    AtomicSystem out = make_atomic(sys.h * s);
    out.scale = sys.scale * s;
    return out;
}

CouplingFunction power_law_coupling(const Mat& a, double amp, double sigma, double mu,
                                    double radius) {
    CouplingFunction g;
    g.dim = static_cast<int>(a.rows());
    g.mu = mu;
    g.family = "power_law";
    Mat ac = a;
    g.eval = [ac, amp, sigma, radius](double k, int) -> Mat {
        if (k <= 0 || k > radius) return Mat::Zero(ac.rows(), ac.cols());
        return amp * std::pow(k, sigma) * ac;
    };
    std::ostringstream amps, sigmas, rads;
    amps << std::setprecision(17) << amp;
    sigmas << std::setprecision(17) << sigma;
    rads << std::setprecision(17) << radius;
    g.params = {{"amp", amps.str()}, {"sigma", sigmas.str()}, {"radius", rads.str()}};
    return g;
}

CouplingFunction zero_coupling(int dim, double mu) {
    CouplingFunction g;
    g.dim = dim;
    g.mu = mu;
    g.family = "zero";
    g.eval = [dim](double, int) { return Mat::Zero(dim, dim); };
    return g;
}

CouplingNorms coupling_norms(const CouplingFunction& g, const ModeGrid& grid,
                             double refine_tol) {
    auto compute = [&](const ModeGrid& gr) {
        double mu_lit = 0, ominv2 = 0, ominvhalf2 = 0;
        for (const auto& m : gr.modes) {
            double n2 = op_norm(g(m.frequency, m.polarization));
            n2 *= n2;
            double om = m.frequency;
            mu_lit += m.weight * (std::pow(om, -3.0 - 2.0 * g.mu) + 1.0) * n2;
            ominv2 += m.weight * n2 / (om * om);
            ominvhalf2 += m.weight * n2 / om;
        }
        return std::array<double, 3>{mu_lit, ominv2, ominvhalf2};
    };
    auto coarse = compute(grid);
    ModeGrid fine = make_grid(2 * grid.shells, grid.scheme, grid.radius_max, grid.folded);
    auto refined = compute(fine);

    CouplingNorms out;
    out.mu_literal = refined[0];
    out.mu_sqrt = std::sqrt(refined[0]);
    out.ominv = std::sqrt(refined[1]);
    out.ominvhalf = std::sqrt(refined[2]);
    double den = std::max(1e-300, std::abs(refined[0]));
    out.refine_rel_change = std::abs(refined[0] - coarse[0]) / den;
    out.converged = out.refine_rel_change <= refine_tol;
    return out;
}

SecondOrderData compute_z_at(const AtomicSystem& sys, const CouplingFunction& g,
                             const ModeGrid& grid, double simple_rel_tol, double quad_tol) {
    const Mat pbar = Mat::Identity(sys.dim(), sys.dim()) - sys.p_at;
    auto z_on = [&](const ModeGrid& gr) {
        Mat acc = Mat::Zero(sys.dim(), sys.dim());
        Mat shifted_inv(sys.dim(), sys.dim());
        for (const auto& m : gr.modes) {
            Mat gk = g(m.frequency, m.polarization);
            double om = m.frequency;
            // (H_at - eps + |k|)^{-1} restricted to Ran Pbar, spectral split
            Mat mid = sys.p_at / om +
                      pbar * (sys.h - sys.eps_at * Mat::Identity(sys.dim(), sys.dim()) +
                              om * Mat::Identity(sys.dim(), sys.dim()))
                                 .inverse() *
                          pbar;
            acc -= (m.weight / om) * sys.p_at * gk.adjoint() * mid * gk * sys.p_at;
        }
        return Mat(sys.u_ground.adjoint() * acc * sys.u_ground);
    };
    Mat coarse = z_on(grid);
    ModeGrid fine = make_grid(2 * grid.shells, grid.scheme, grid.radius_max, grid.folded);
    Mat refined = z_on(fine);

    SecondOrderData out;
    out.z_at = (refined + refined.adjoint()) / 2.0;
    out.quad_rel_change =
        (refined - coarse).norm() / std::max(1e-300, refined.norm());
    if (out.quad_rel_change > quad_tol && refined.norm() > 0)
        throw numerical_error("Z_at quadrature did not converge under refinement");

    Eigen::SelfAdjointEigenSolver<Mat> es(out.z_at);
    out.eps2 = es.eigenvalues()(0);
    out.norm_z = op_norm(out.z_at);
    out.p2_vector = es.eigenvectors().col(0);
    out.p2 = out.p2_vector * out.p2_vector.adjoint();
    if (es.eigenvalues().size() > 1) {
        double gap2 = es.eigenvalues()(1) - es.eigenvalues()(0);
        out.simple = gap2 > simple_rel_tol * std::max(out.norm_z, 1e-300);
    } else {
        out.simple = true;
    }
    return out;
}

OperatorMatrix assemble_hamiltonian(const AtomicSystem& sys, const CouplingFunction& g,
                                    const FockBasis& basis, const ModeGrid& grid, cplx gc) {
    OperatorMatrix w = interaction_op(basis, grid, g, sys.dim());
    Mat h = lift_atomic_mat(sys.h, basis) +
            lift_fock_mat(sys.dim(), basis, field_energy_op(basis, grid).mat) + gc * w.mat;
    return {std::move(h), w.basis_tag};
}

// --- model file --------------------------------------------------------------

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_mat(const Mat& m) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i || j) os << " ";
            os << m(i, j).real() << " " << m(i, j).imag();
        }
    return os.str();
}

Mat parse_mat(const std::string& body, int dim, const std::string& what) {
    std::istringstream is(body);
    Mat m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double re, im;
            if (!(is >> re >> im))
                throw config_error("model file: short matrix body for " + what);
            m(i, j) = cplx(re, im);
        }
    double extra;
    if (is >> extra) throw config_error("model file: trailing entries in " + what);
    return m;
}

}  // namespace

ModelDefinition parse_model(const std::string& text) {
    ModelDefinition m;
    std::istringstream is(text);
    std::string line, section;
    std::map<std::string, std::string> kv;
    auto flush_check = [&]() {};
    int atomic_dim = -1;
    std::string atomic_body, coupling_body;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto notspace = line.find_first_not_of(" \t\r");
        if (notspace == std::string::npos) continue;
        line = line.substr(notspace, line.find_last_not_of(" \t\r") - notspace + 1);
        if (line.front() == '[') {
            section = line;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("model file: expected key = value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        key = section + trim(key);
        val = trim(val);

        if (key == "[atomic]dim")
            atomic_dim = std::stoi(val);
        else if (key == "[atomic]h")
            atomic_body = val;
        else if (key == "[coupling]family")
            m.coupling_family = val;
        else if (key == "[coupling]sigma")
            m.sigma = std::stod(val);
        else if (key == "[coupling]amp")
            m.amp = std::stod(val);
        else if (key == "[coupling]mu")
            m.mu = std::stod(val);
        else if (key == "[coupling]radius")
            m.radius = std::stod(val);
        else if (key == "[coupling]a")
            coupling_body = val;
        else if (key == "[grid]shells")
            m.shells = std::stoi(val);
        else if (key == "[grid]scheme") {
            if (val == "midpoint")
                m.scheme = QuadScheme::midpoint;
            else if (val == "gauss_legendre")
                m.scheme = QuadScheme::gauss_legendre;
            else if (val == "dyadic")
                m.scheme = QuadScheme::dyadic;
            else
                throw config_error("model file: unknown scheme '" + val + "'");
        } else if (key == "[grid]radius_max")
            m.radius_max = std::stod(val);
        else if (key == "[grid]fold_polarizations")
            m.folded = (val == "true" || val == "1");
        else if (key == "[fock]n_max")
            m.n_max = std::stoi(val);
        else
            throw config_error("model file: rejected key '" + key + "'");
    }
    flush_check();
    if (atomic_dim <= 0) throw config_error("model file: missing [atomic] dim");
    if (m.coupling_family != "power_law" && m.coupling_family != "zero")
        throw config_error("model file: unknown coupling family '" + m.coupling_family + "'");
    m.h_at = parse_mat(atomic_body, atomic_dim, "[atomic] h");
    m.coupling_matrix = coupling_body.empty() ? Mat::Zero(atomic_dim, atomic_dim)
                                              : parse_mat(coupling_body, atomic_dim, "[coupling] a");
    return m;
}

std::string serialize_model(const ModelDefinition& m) {
    std::ostringstream os;
    os << "[atomic]\n";
    os << "dim = " << m.h_at.rows() << "\n";
    os << "h = " << fmt_mat(m.h_at) << "\n";
    os << "[coupling]\n";
    os << "family = " << m.coupling_family << "\n";
    os << "sigma = " << fmt(m.sigma) << "\n";
    os << "amp = " << fmt(m.amp) << "\n";
    os << "mu = " << fmt(m.mu) << "\n";
    os << "radius = " << fmt(m.radius) << "\n";
    os << "a = " << fmt_mat(m.coupling_matrix) << "\n";
    os << "[grid]\n";
    os << "shells = " << m.shells << "\n";
    os << "scheme = "
       << (m.scheme == QuadScheme::midpoint
               ? "midpoint"
               : m.scheme == QuadScheme::gauss_legendre ? "gauss_legendre" : "dyadic")
       << "\n";
    os << "radius_max = " << fmt(m.radius_max) << "\n";
    os << "fold_polarizations = " << (m.folded ? "true" : "false") << "\n";
    os << "[fock]\n";
    os << "n_max = " << m.n_max << "\n";
    return os.str();
}

ModelDefinition load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

ModelDefinition demo_model() {
    ModelDefinition m;
    m.h_at = Mat::Zero(3, 3);
    m.h_at(2, 2) = 1.0;
    m.coupling_family = "power_law";
    m.coupling_matrix = Mat(3, 3);
    m.coupling_matrix << cplx(0.3, 0.0), cplx(0.7, 0.1), cplx(0.5, 0.0),  //
        cplx(0.7, -0.1), cplx(-0.4, 0.0), cplx(0.2, 0.0),                  //
        cplx(0.5, 0.0), cplx(0.2, 0.0), cplx(0.6, 0.0);
    m.amp = 1.5e-4;
    m.sigma = 1.5;  // |k|^{1/2 + mu'} with mu' = 1 > mu
    m.mu = 0.75;
    m.radius = 1.0;
    m.shells = 6;
    m.scheme = QuadScheme::gauss_legendre;
    m.radius_max = 1.0;
    m.folded = true;
    m.n_max = 3;
    return m;
}

}  // namespace sbr
