#include "sbr/feshbach.hpp"

#include <cmath>

namespace sbr {

Mat range_basis(const Mat& psd, double floor) {
    Eigen::SelfAdjointEigenSolver<Mat> es(psd);
    int keep = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > floor) ++keep;
    Mat v(psd.rows(), keep);
    int c = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > floor) v.col(c++) = es.eigenvectors().col(i);
    return v;
}

SmoothedProjectionPair smoothed_projections(int step, const Mat& atomic_proj,
                                            const SmoothCutoff& cutoff, double rho,
                                            const FockBasis& basis, const ModeGrid& grid) {
    if (rho <= 0 || rho > 1.0) throw precondition_error("rho must lie in (0, 1]");
    const int d = static_cast<int>(atomic_proj.rows());
    const int nf = basis.size();
    Mat chi_f = Mat::Zero(nf, nf);
    Mat chibar_f = Mat::Zero(nf, nf);
    for (int s = 0; s < nf; ++s) {
        double r = state_energy(basis, grid, s);
        chi_f(s, s) = cutoff.chi(r / rho);
        chibar_f(s, s) = cutoff.chibar(r / rho);
    }
    Mat pbar = Mat::Identity(d, d) - atomic_proj;
    SmoothedProjectionPair pair;
    pair.step = step;
    pair.rho = rho;
    std::string tag = product_tag(d, basis);
    pair.chi_op = {kron(atomic_proj, chi_f), tag};
    pair.chibar_op = {kron(pbar, Mat::Identity(nf, nf)) + kron(atomic_proj, chibar_f), tag};
    return pair;
}

PairCriterion1 feshbach_pair_criterion_1(const AtomicSystem& sys, const CouplingNorms& norms,
                                         cplx g, double rho, cplx z) {
    PairCriterion1 c;
    c.rho_ok = rho > 0 && rho <= 0.25;
    c.z_ok = std::abs(z - cplx(sys.eps_at)) < rho / 2.0;
    double bound = norms.ominv > 0 ? std::sqrt(rho) / (10.0 * norms.ominv)
                                   : std::numeric_limits<double>::infinity();
    c.margin = std::abs(g) / bound;
    c.g_ok = std::abs(g) < bound;  // strict
    c.ok = c.rho_ok && c.z_ok && c.g_ok;
    return c;
}

FeshbachResult feshbach_operator(const OperatorMatrix& h, const OperatorMatrix& t,
                                 const SmoothedProjectionPair& pair, int order_cap,
                                 double sv_floor_rel) {
    h.require_same_basis(t);
    h.require_same_basis(pair.chi_op);
    const Mat& chi = pair.chi_op.mat;
    const Mat& chibar = pair.chibar_op.mat;
    Mat w = h.mat - t.mat;

    Mat v = range_basis(chibar * chibar);
    Mat h_chibar = t.mat + chibar * w * chibar;
    Mat c = v.adjoint() * h_chibar * v;

    double scale = op_norm(c);
    double smin = smallest_singular_value(c);
    if (smin <= sv_floor_rel * std::max(scale, 1e-300))
        throw numerical_error("H_chibar is numerically singular on Ran chibar");

    FeshbachResult res;
    res.inverse_norm = op_norm(Mat(c.inverse()));

    Mat cinv = c.inverse();
    Mat f = t.mat + chi * w * chi - (chi * w * chibar * v) * cinv * (v.adjoint() * chibar * w * chi);
    res.f_op = {f, h.basis_tag};
    res.q_op = {chi - chibar * v * cinv * (v.adjoint() * chibar * w * chi), h.basis_tag};

    // Neumann route: F = T + sum_L (-1)^{L-1} chi W (chibar^2 T^{-1} W)^{L-1} chi
    Mat tinv_ran = v * (v.adjoint() * t.mat * v).inverse() * v.adjoint();
    Mat step = chibar * chibar * tinv_ran * w;
    Mat f_neumann = t.mat;
    Mat term_core = Mat::Identity(h.rows(), h.cols());
    double sign = 1.0;
    for (int order = 1; order <= order_cap; ++order) {
        Mat term = chi * w * term_core * chi;
        res.neumann_orders.push_back(op_norm(term));
        f_neumann += sign * term;
        term_core = term_core * step;
        sign = -sign;
    }
    double fd = op_norm(f);
    res.direct_vs_neumann = op_norm(Mat(f - f_neumann)) / std::max(fd, 1e-300);
    // geometric bound on the first omitted term
    if (res.neumann_orders.size() >= 2) {
        double last = res.neumann_orders.back();
        double prev = res.neumann_orders[res.neumann_orders.size() - 2];
        double ratio = prev > 0 ? last / prev : 0.0;
        res.first_omitted_bound = last * ratio;
    }

    Mat vchi = range_basis(chi * chi);
    if (vchi.cols() > 0)
        res.smallest_sv_on_ran_chi = smallest_singular_value(Mat(vchi.adjoint() * f * vchi));
    return res;
}

ResolventBoundsReport resolvent_bounds_check(const AtomicSystem& sys, const SmoothCutoff& cutoff,
                                             double rho, cplx z, const FockBasis& basis,
                                             const ModeGrid& grid) {
    SmoothedProjectionPair pair = smoothed_projections(1, sys.p_at, cutoff, rho, basis, grid);
    Mat h0 = lift_atomic_mat(sys.h, basis) +
             lift_fock_mat(sys.dim(), basis, field_energy_op(basis, grid).mat);
    Mat hf = lift_fock_mat(sys.dim(), basis, field_energy_op(basis, grid).mat);
    Mat shifted = h0 - z * Mat::Identity(h0.rows(), h0.cols());
    Mat v = range_basis(pair.chibar_op.mat * pair.chibar_op.mat);
    Mat c = v.adjoint() * shifted * v;
    Mat cinv = c.inverse();

    ResolventBoundsReport rep;
    rep.plain_norm = op_norm(cinv);
    rep.plain_bound = 4.0 / rho;
    rep.plain_holds = rep.plain_norm <= rep.plain_bound;

    for (double tau : {0.0, rho, 1.0}) {
        Mat wsqrt = hf;
        for (Eigen::Index i = 0; i < wsqrt.rows(); ++i)
            wsqrt(i, i) = std::sqrt(hf(i, i).real() + tau);
        Mat weighted = v.adjoint() * wsqrt * v * cinv * v.adjoint() * wsqrt * v;
        ResolventBoundsReport::Weighted rec;
        rec.tau = tau;
        rec.norm = op_norm(weighted);
        rec.bound = 1.0 + 4.0 * tau / rho;
        rec.holds = rec.norm <= rec.bound;
        rep.weighted.push_back(rec);
    }
    return rep;
}

}  // namespace sbr
