#include "sbr/kernels.hpp"

#include <cmath>

namespace sbr {

namespace {

long ipow(long b, int e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

std::vector<int> unflatten(long idx, int len, int base) {
    std::vector<int> t(len);
    for (int i = len - 1; i >= 0; --i) {
        t[i] = static_cast<int>(idx % base);
        idx /= base;
    }
    return t;
}

std::vector<Leg> legs_of(const std::vector<Mode>& nodes, const std::vector<int>& tuple,
                         int from, int count) {
    std::vector<Leg> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = {nodes[tuple[from + i]].frequency, nodes[tuple[from + i]].polarization};
    return out;
}

// measure factor prod weight_q / omega_q^{3+2mu} over a node tuple
double mu_measure(const std::vector<Mode>& nodes, const std::vector<int>& tuple, double mu) {
    double f = 1.0;
    for (int q : tuple) f *= nodes[q].weight / std::pow(nodes[q].frequency, 3.0 + 2.0 * mu);
    return f;
}

}  // namespace

long IntegralKernel::tuple_count() const { return ipow(nodes(), m + n); }

long IntegralKernel::value_index(int r_idx, const std::vector<int>& tuple) const {
    long idx = r_idx;
    for (int t : tuple) idx = idx * nodes() + t;
    return idx;
}

const Mat& IntegralKernel::at(int r_idx, const std::vector<int>& tuple) const {
    return values[value_index(r_idx, tuple)];
}

std::vector<double> uniform_r_grid(int points) {
    std::vector<double> r(points);
    for (int i = 0; i < points; ++i) r[i] = static_cast<double>(i) / (points - 1);
    return r;
}

IntegralKernel sample_kernel(int m, int n, int d, const std::vector<double>& r_grid,
                             const std::vector<Mode>& k_nodes, const KernelEval& eval,
                             const KernelEval& deriv, double mu) {
    IntegralKernel k;
    k.m = m;
    k.n = n;
    k.d = d;
    k.mu = mu;
    k.r_grid = r_grid;
    k.k_nodes = k_nodes;
    k.eval = eval;
    const long tuples = k.tuple_count();
    k.values.resize(r_grid.size() * tuples);
    if (deriv) k.deriv_values.resize(r_grid.size() * tuples);
    for (size_t ri = 0; ri < r_grid.size(); ++ri) {
        for (long t = 0; t < tuples; ++t) {
            auto tuple = unflatten(t, m + n, std::max(1, k.nodes()));
            auto km = legs_of(k_nodes, tuple, 0, m);
            auto kn = legs_of(k_nodes, tuple, m, n);
            k.values[ri * tuples + t] = eval(r_grid[ri], km, kn);
            if (deriv) k.deriv_values[ri * tuples + t] = deriv(r_grid[ri], km, kn);
        }
    }
    if (!deriv && r_grid.size() >= 3) {
        // centered differences in r, one-sided at the ends
        k.deriv_values.resize(r_grid.size() * tuples);
        for (long t = 0; t < tuples; ++t) {
            for (size_t ri = 0; ri < r_grid.size(); ++ri) {
                size_t lo = ri == 0 ? 0 : ri - 1;
                size_t hi = ri + 1 == r_grid.size() ? ri : ri + 1;
                double dr = r_grid[hi] - r_grid[lo];
                k.deriv_values[ri * tuples + t] =
                    (k.values[hi * tuples + t] - k.values[lo * tuples + t]) / dr;
            }
        }
    }
    return k;
}

namespace {

double norm_mu_values(const IntegralKernel& k, const std::vector<Mat>& vals, double mu) {
    if (vals.empty()) return 0.0;
    const long tuples = k.tuple_count();
    if (k.m + k.n == 0) {
        double sup = 0;
        for (const auto& v : vals) sup = std::max(sup, op_norm(v));
        return sup;
    }
    double acc = 0;
    for (long t = 0; t < tuples; ++t) {
        auto tuple = unflatten(t, k.m + k.n, k.nodes());
        double sup = 0;
        for (size_t ri = 0; ri < k.r_grid.size(); ++ri)
            sup = std::max(sup, op_norm(vals[ri * tuples + t]));
        acc += mu_measure(k.k_nodes, tuple, mu) * sup * sup;
    }
    return std::sqrt(acc);
}

}  // namespace

double norm_mu(const IntegralKernel& k) { return norm_mu_values(k, k.values, k.mu); }

double norm_mu_sharp(const IntegralKernel& k) {
    if (k.deriv_values.empty()) throw precondition_error("kernel lacks derivative data");
    return norm_mu_values(k, k.values, k.mu) + norm_mu_values(k, k.deriv_values, k.mu);
}

FamilyNorm norm_family(const KernelFamily& fam) {
    FamilyNorm out;
    for (const auto& [mn, k] : fam.kernels) {
        IntegralKernel kk = k;
        kk.mu = fam.mu;
        double contrib;
        if (mn.first + mn.second == 0)
            contrib = norm_mu_sharp(kk);  // C1 norm
        else
            contrib = std::pow(fam.xi, -(mn.first + mn.second)) * norm_mu_sharp(kk);
        out.contributions[mn] = contrib;
        out.total += contrib;
    }
    return out;
}

double norm_family_interacting(const KernelFamily& fam) {
    double acc = 0;
    for (const auto& [mn, k] : fam.kernels) {
        if (mn.first + mn.second == 0) continue;
        IntegralKernel kk = k;
        kk.mu = fam.mu;
        acc += std::pow(fam.xi, -(mn.first + mn.second)) * norm_mu_sharp(kk);
    }
    return acc;
}

OperatorMatrix kernel_to_operator_one(const IntegralKernel& k, const FockBasis& basis,
                                      const ModeGrid& grid, double window, bool project) {
    const int d = k.d;
    const int nf = basis.size();
    const long dim = static_cast<long>(d) * nf;
    Mat out = Mat::Zero(dim, dim);
    const int nm = grid.size();
    if (k.nodes() != 0 && k.nodes() != nm)
        throw std::invalid_argument("kernel nodes do not match the grid");

    std::vector<double> energy(nf);
    for (int s = 0; s < nf; ++s) energy[s] = state_energy(basis, grid, s);

    auto eval_kernel = [&](double r, const std::vector<int>& cre,
                           const std::vector<int>& ann) -> Mat {
        if (k.eval) {
            std::vector<Leg> km(cre.size()), kn(ann.size());
            for (size_t i = 0; i < cre.size(); ++i)
                km[i] = {grid.modes[cre[i]].frequency, grid.modes[cre[i]].polarization};
            for (size_t i = 0; i < ann.size(); ++i)
                kn[i] = {grid.modes[ann[i]].frequency, grid.modes[ann[i]].polarization};
            return k.eval(r, km, kn);
        }
        // nearest r-grid interpolation (linear)
        std::vector<int> tuple;
        tuple.insert(tuple.end(), cre.begin(), cre.end());
        tuple.insert(tuple.end(), ann.begin(), ann.end());
        auto it = std::lower_bound(k.r_grid.begin(), k.r_grid.end(), r);
        size_t hi = std::min<size_t>(k.r_grid.size() - 1, it - k.r_grid.begin());
        size_t lo = hi == 0 ? 0 : hi - 1;
        double denom = k.r_grid[hi] - k.r_grid[lo];
        double t = denom > 0 ? (r - k.r_grid[lo]) / denom : 0.0;
        const long tuples = k.tuple_count();
        return (1.0 - t) * k.values[lo * tuples + k.value_index(0, tuple)] +
               t * k.values[hi * tuples + k.value_index(0, tuple)];
    };

    const double wtol = 1e-12;
    // iterate: source state s --(annihilate tuple)--> mid --(create tuple)--> target
    for (int s = 0; s < nf; ++s) {
        if (project && energy[s] > window + wtol) continue;
        // enumerate ordered annihilation tuples
        std::vector<int> occ = basis.states[s];
        std::function<void(int, std::vector<int>&, double, std::vector<int>&)> loop_ann =
            [&](int depth, std::vector<int>& occ_cur, double amp, std::vector<int>& ann_t) {
                if (depth == k.n) {
                    int mid = basis.index_of(occ_cur);
                    if (mid < 0) return;  // cannot happen: annihilation stays in basis
                    double r_mid = 0;
                    for (int q = 0; q < basis.mode_count; ++q)
                        r_mid += occ_cur[q] * grid.modes[q].frequency;
                    // creation tuples
                    std::function<void(int, std::vector<int>&, double, std::vector<int>&)>
                        loop_cre2 = [&](int dc, std::vector<int>& oc, double amp2,
                                        std::vector<int>& cre_t) {
                            if (dc == k.m) {
                                int tgt = basis.index_of(oc);
                                if (tgt < 0) return;
                                if (project && energy[tgt] > window + wtol) return;
                                Mat kv = eval_kernel(r_mid, cre_t, ann_t);
                                for (int a = 0; a < d; ++a)
                                    for (int b = 0; b < d; ++b)
                                        out(static_cast<long>(a) * nf + tgt,
                                            static_cast<long>(b) * nf + s) += amp2 * kv(a, b);
                                return;
                            }
                            for (int q = 0; q < basis.mode_count; ++q) {
                                oc[q] += 1;
                                double fac = std::sqrt(grid.modes[q].weight /
                                                       grid.modes[q].frequency) *
                                             std::sqrt(static_cast<double>(oc[q]));
                                cre_t.push_back(q);
                                loop_cre2(dc + 1, oc, amp2 * fac, cre_t);
                                cre_t.pop_back();
                                oc[q] -= 1;
                            }
                        };
                    std::vector<int> oc = occ_cur;
                    std::vector<int> cre_t;
                    loop_cre2(0, oc, amp, cre_t);
                    return;
                }
                for (int q = 0; q < basis.mode_count; ++q) {
                    if (occ_cur[q] == 0) continue;
                    double fac = std::sqrt(grid.modes[q].weight / grid.modes[q].frequency) *
                                 std::sqrt(static_cast<double>(occ_cur[q]));
                    occ_cur[q] -= 1;
                    ann_t.push_back(q);
                    loop_ann(depth + 1, occ_cur, amp * fac, ann_t);
                    ann_t.pop_back();
                    occ_cur[q] += 1;
                }
            };
        std::vector<int> ann_t;
        loop_ann(0, occ, 1.0, ann_t);
    }
    return {std::move(out), product_tag(d, basis)};
}

OperatorMatrix kernel_to_operator(const KernelFamily& fam, const FockBasis& basis,
                                  const ModeGrid& grid, double window) {
    const long dim = static_cast<long>(fam.d) * basis.size();
    Mat acc = Mat::Zero(dim, dim);
    std::string tag = product_tag(fam.d, basis);
    for (const auto& [mn, k] : fam.kernels)
        acc += kernel_to_operator_one(k, basis, grid, window, true).mat;
    return {std::move(acc), tag};
}

IntegralKernel scale_kernel_one(const IntegralKernel& k, double rho) {
    if (rho <= 0 || rho > 1) throw precondition_error("rho must lie in (0,1]");
    IntegralKernel out;
    out.m = k.m;
    out.n = k.n;
    out.d = k.d;
    out.mu = k.mu;
    out.r_grid = k.r_grid;
    out.k_nodes = k.k_nodes;
    out.symmetric = k.symmetric;
    double pref = std::pow(rho, k.m + k.n - 1);
    if (k.eval) {
        KernelEval base = k.eval;
        out.eval = [base, rho, pref](double r, const std::vector<Leg>& km,
                                     const std::vector<Leg>& kn) -> Mat {
            std::vector<Leg> km2 = km, kn2 = kn;
            for (auto& l : km2) l.omega *= rho;
            for (auto& l : kn2) l.omega *= rho;
            return pref * base(rho * r, km2, kn2);
        };
        return sample_kernel(out.m, out.n, out.d, out.r_grid, out.k_nodes, out.eval, nullptr,
                             k.mu);
    }
    // table-only route: linear interpolation in r, node snapping in K
    const long tuples = k.tuple_count();
    out.values.resize(k.values.size());
    auto interp_r = [&](double r, long t_src) -> Mat {
        auto it = std::lower_bound(k.r_grid.begin(), k.r_grid.end(), r);
        size_t hi = std::min<size_t>(k.r_grid.size() - 1, it - k.r_grid.begin());
        size_t lo = hi == 0 ? 0 : hi - 1;
        double denom = k.r_grid[hi] - k.r_grid[lo];
        double t = denom > 0 ? (r - k.r_grid[lo]) / denom : 0.0;
        return (1.0 - t) * k.values[lo * tuples + t_src] + t * k.values[hi * tuples + t_src];
    };
    // map each node omega to the node closest to rho * omega (exact on dyadic)
    std::vector<int> node_map(k.nodes());
    for (int q = 0; q < k.nodes(); ++q) {
        double target = rho * k.k_nodes[q].frequency;
        int best = 0;
        double bd = std::abs(k.k_nodes[0].frequency - target);
        for (int p = 1; p < k.nodes(); ++p) {
            double dd = std::abs(k.k_nodes[p].frequency - target);
            if (dd < bd) {
                bd = dd;
                best = p;
            }
        }
        node_map[q] = best;
    }
    for (size_t ri = 0; ri < k.r_grid.size(); ++ri) {
        for (long t = 0; t < tuples; ++t) {
            auto tuple = unflatten(t, k.m + k.n, std::max(1, k.nodes()));
            for (auto& q : tuple) q = node_map[q];
            long src = 0;
            for (int q : tuple) src = src * k.nodes() + q;
            out.values[ri * tuples + t] = pref * interp_r(rho * k.r_grid[ri], src);
        }
    }
    // derivative of r -> pref * w(rho r): chain rule
    if (!k.deriv_values.empty()) {
        out.deriv_values.resize(k.values.size());
        for (size_t ri = 0; ri < k.r_grid.size(); ++ri)
            for (long t = 0; t < tuples; ++t) {
                auto tuple = unflatten(t, k.m + k.n, std::max(1, k.nodes()));
                for (auto& q : tuple) q = node_map[q];
                long src = 0;
                for (int q : tuple) src = src * k.nodes() + q;
                auto it = std::lower_bound(k.r_grid.begin(), k.r_grid.end(), rho * k.r_grid[ri]);
                size_t hi = std::min<size_t>(k.r_grid.size() - 1, it - k.r_grid.begin());
                size_t lo = hi == 0 ? 0 : hi - 1;
                double denom = k.r_grid[hi] - k.r_grid[lo];
                double tt = denom > 0 ? (rho * k.r_grid[ri] - k.r_grid[lo]) / denom : 0.0;
                out.deriv_values[ri * tuples + t] =
                    pref * rho *
                    ((1.0 - tt) * k.deriv_values[lo * tuples + src] +
                     tt * k.deriv_values[hi * tuples + src]);
            }
    }
    return out;
}

KernelFamily scale_kernel(const KernelFamily& fam, double rho) {
    KernelFamily out;
    out.mu = fam.mu;
    out.xi = fam.xi;
    out.d = fam.d;
    for (const auto& [mn, k] : fam.kernels) out.kernels[mn] = scale_kernel_one(k, rho);
    return out;
}

DilationOps dilation_ops(const FockBasis& basis, const ModeGrid& grid, double rho) {
    DilationOps ops;
    const int nm = grid.size();
    ops.mode_map.assign(nm, -1);
    const double tol = 1e-9;
    for (int q = 0; q < nm; ++q) {
        double target = grid.modes[q].frequency / rho;
        for (int p = 0; p < nm; ++p) {
            if (grid.modes[p].polarization != grid.modes[q].polarization) continue;
            if (std::abs(grid.modes[p].frequency - target) <= tol * target) {
                ops.mode_map[q] = p;
                break;
            }
        }
    }
    bool any = false;
    for (int q = 0; q < nm; ++q) any = any || ops.mode_map[q] >= 0;
    if (!any) throw precondition_error("grid is not dilation-compatible for this rho");

    Mat gamma = Mat::Zero(basis.size(), basis.size());
    for (int s = 0; s < basis.size(); ++s) {
        const auto& occ = basis.states[s];
        std::vector<int> img(basis.mode_count, 0);
        bool ok = true;
        for (int q = 0; q < basis.mode_count && ok; ++q) {
            if (occ[q] == 0) continue;
            if (ops.mode_map[q] < 0)
                ok = false;
            else
                img[ops.mode_map[q]] += occ[q];
        }
        if (!ok) continue;
        int t = basis.index_of(img);
        if (t < 0) continue;
        gamma(t, s) = 1.0;
        ops.kept_states.push_back(s);
    }
    ops.gamma = {gamma, basis.tag};
    Mat g = gamma;
    ops.s_rho_fock = [g, rho](const Mat& a) -> Mat { return (g * a * g.adjoint()) / rho; };
    return ops;
}

SharpBoundReport sharp_norm_bound_check(const IntegralKernel& k, const FockBasis& basis,
                                        const ModeGrid& grid) {
    if (k.m + k.n < 1) throw precondition_error("sharp bound needs m+n >= 1");
    const long tuples = k.tuple_count();
    double acc = 0;
    for (long t = 0; t < tuples; ++t) {
        auto tuple = unflatten(t, k.m + k.n, k.nodes());
        // measure prod w_q / omega_q^2
        double meas = 1.0;
        for (int q : tuple)
            meas *= k.k_nodes[q].weight / (k.k_nodes[q].frequency * k.k_nodes[q].frequency);
        double best = 0;
        for (size_t ri = 0; ri < k.r_grid.size(); ++ri) {
            double r = k.r_grid[ri];
            double prod = 1.0;
            double part = 0;
            for (int i = 0; i < k.m; ++i) {
                part += k.k_nodes[tuple[i]].frequency;
                prod *= r + part;
            }
            part = 0;
            for (int i = 0; i < k.n; ++i) {
                part += k.k_nodes[tuple[k.m + i]].frequency;
                prod *= r + part;
            }
            double nv = op_norm(k.values[ri * tuples + t]);
            best = std::max(best, nv * nv * prod);
        }
        acc += meas * best;
    }
    SharpBoundReport rep;
    rep.sharp_norm = std::sqrt(acc);
    rep.op_norm = op_norm(kernel_to_operator_one(k, basis, grid, 0.0, false).mat);
    rep.holds = rep.op_norm <= rep.sharp_norm * (1.0 + 1e-9);
    rep.slack = rep.sharp_norm - rep.op_norm;
    return rep;
}

PolydiscCheck polydisc_check(const KernelFamily& fam, const PolydiscRadii& radii) {
    PolydiscCheck c;
    const IntegralKernel* w00 = fam.find(0, 0);
    if (!w00 || w00->deriv_values.empty())
        throw precondition_error("polydisc check needs w_00 with derivative data");
    c.val_alpha = op_norm(w00->values.front());
    double beta = 0;
    for (const auto& dv : w00->deriv_values)
        beta = std::max(beta, op_norm(Mat(dv - Mat::Identity(dv.rows(), dv.cols()))));
    c.val_beta = beta;
    c.val_gamma = norm_family_interacting(fam);
    c.slack_alpha = radii.alpha - c.val_alpha;
    c.slack_beta = radii.beta - c.val_beta;
    c.slack_gamma = radii.gamma - c.val_gamma;
    c.member = c.slack_alpha >= -1e-12 && c.slack_beta >= -1e-12 && c.slack_gamma >= -1e-12;
    return c;
}

IntegralKernel symmetrize(const IntegralKernel& k) {
    IntegralKernel out = k;
    if (k.m <= 1 && k.n <= 1) return out;
    const long tuples = k.tuple_count();
    std::vector<int> perm_m(k.m), perm_n(k.n);
    for (size_t ri = 0; ri < k.r_grid.size(); ++ri) {
        std::vector<Mat> fresh(tuples);
        for (long t = 0; t < tuples; ++t) {
            auto tuple = unflatten(t, k.m + k.n, k.nodes());
            std::vector<int> ms(tuple.begin(), tuple.begin() + k.m);
            std::vector<int> ns(tuple.begin() + k.m, tuple.end());
            std::sort(ms.begin(), ms.end());
            std::sort(ns.begin(), ns.end());
            Mat acc = Mat::Zero(k.d, k.d);
            int count = 0;
            do {
                std::vector<int> ns2 = ns;
                do {
                    std::vector<int> full = ms;
                    full.insert(full.end(), ns2.begin(), ns2.end());
                    acc += k.values[ri * tuples + k.value_index(0, full)];
                    ++count;
                } while (std::next_permutation(ns2.begin(), ns2.end()));
            } while (std::next_permutation(ms.begin(), ms.end()));
            fresh[t] = acc / static_cast<double>(count);
        }
        for (long t = 0; t < tuples; ++t) out.values[ri * tuples + t] = fresh[t];
    }
    out.symmetric = true;
    return out;
}

}  // namespace sbr
