#include "sbr/wick.hpp"

#include <memory>

#include <cmath>

namespace sbr {

namespace {

constexpr double kWindowTol = 1e-12;

struct TermPlan {
    std::vector<int> cand;  // candidate index per position, size L
    double comb = 1.0;
    // each matching: (ann position, crea position) per contracted pair, 1-based
    std::vector<std::vector<std::pair<int, int>>> matchings;
};

struct PlanSet {
    std::vector<TermPlan> plans;
    long assignments = 0;  // index-set cardinality before vacuum filtering
};

// All bijections between annihilation slots and creation slots with
// crea position strictly to the right of the ann position.
void enumerate_matchings(const std::vector<int>& ann_pos, std::vector<int>& crea_pos_left,
                         std::vector<std::pair<int, int>>& cur,
                         std::vector<std::vector<std::pair<int, int>>>& out) {
    size_t idx = cur.size();
    if (idx == ann_pos.size()) {
        out.push_back(cur);
        return;
    }
    for (size_t c = 0; c < crea_pos_left.size(); ++c) {
        if (crea_pos_left[c] < 0) continue;
        if (crea_pos_left[c] <= ann_pos[idx]) continue;
        int saved = crea_pos_left[c];
        crea_pos_left[c] = -1;
        cur.emplace_back(ann_pos[idx], saved);
        enumerate_matchings(ann_pos, crea_pos_left, cur, out);
        cur.pop_back();
        crea_pos_left[c] = saved;
    }
}

PlanSet build_plans(const WickProductSpec& spec, int M, int N) {
    PlanSet set;
    std::vector<int> cand(spec.L, 0);
    std::function<void(int, int, int, int, int)> rec = [&](int pos, int m_acc, int n_acc,
                                                           int p_acc, int q_acc) {
        if (pos == spec.L) {
            if (m_acc != M || n_acc != N) return;
            ++set.assignments;
            if (p_acc != q_acc) return;  // vacuum expectation vanishes
            TermPlan plan;
            plan.cand = cand;
            for (int l = 0; l < spec.L; ++l) plan.comb *= spec.candidates[cand[l]].combinatorial;
            std::vector<int> ann_pos, crea_pos;
            for (int l = 0; l < spec.L; ++l) {
                const auto& b = spec.candidates[cand[l]];
                for (int i = 0; i < b.q; ++i) ann_pos.push_back(l + 1);
                for (int i = 0; i < b.p; ++i) crea_pos.push_back(l + 1);
            }
            if (ann_pos.empty()) {
                plan.matchings.push_back({});
                set.plans.push_back(std::move(plan));
                return;
            }
            std::vector<std::pair<int, int>> cur;
            enumerate_matchings(ann_pos, crea_pos, cur, plan.matchings);
            if (!plan.matchings.empty()) set.plans.push_back(std::move(plan));
            return;
        }
        for (size_t c = 0; c < spec.candidates.size(); ++c) {
            const auto& b = spec.candidates[c];
            if (m_acc + b.m > M || n_acc + b.n > N) continue;
            if (b.p > spec.p_cap || b.q > spec.q_cap) continue;
            cand[pos] = static_cast<int>(c);
            rec(pos + 1, m_acc + b.m, n_acc + b.n, p_acc + b.p, q_acc + b.q);
        }
    };
    rec(0, 0, 0, 0, 0);
    return set;
}

// External in-flight shifts: rtilde_l for gaps l = 0..L, r_l for blocks l = 1..L.
void external_shifts(const WickProductSpec& spec, const TermPlan& plan,
                     const std::vector<Leg>& km, const std::vector<Leg>& kn,
                     std::vector<double>& rtilde, std::vector<double>& rblock,
                     std::vector<std::vector<Leg>>& ext_cre, std::vector<std::vector<Leg>>& ext_ann) {
    const int L = spec.L;
    ext_cre.assign(L, {});
    ext_ann.assign(L, {});
    size_t im = 0, in = 0;
    for (int l = 0; l < L; ++l) {
        const auto& b = spec.candidates[plan.cand[l]];
        for (int i = 0; i < b.m; ++i) ext_cre[l].push_back(km[im++]);
        for (int i = 0; i < b.n; ++i) ext_ann[l].push_back(kn[in++]);
    }
    rtilde.assign(L + 1, 0.0);
    rblock.assign(L + 1, 0.0);
    for (int gap = 0; gap <= L; ++gap) {
        double acc = 0;
        for (int l = 1; l <= gap; ++l)
            for (const auto& leg : ext_ann[l - 1]) acc += leg.omega;
        for (int l = gap + 1; l <= L; ++l)
            for (const auto& leg : ext_cre[l - 1]) acc += leg.omega;
        rtilde[gap] = acc;
    }
    for (int l = 1; l <= L; ++l) {
        double acc = 0;
        for (int j = 1; j <= l - 1; ++j)
            for (const auto& leg : ext_ann[j - 1]) acc += leg.omega;
        for (int j = l + 1; j <= L; ++j)
            for (const auto& leg : ext_cre[j - 1]) acc += leg.omega;
        rblock[l] = acc;
    }
}

Mat eval_plan_symbolic(const WickProductSpec& spec, const TermPlan& plan, double r,
                       const std::vector<Leg>& km, const std::vector<Leg>& kn) {
    const int L = spec.L;
    const auto& modes = spec.grid->modes;
    std::vector<double> rtilde, rblock;
    std::vector<std::vector<Leg>> ext_cre, ext_ann;
    external_shifts(spec, plan, km, kn, rtilde, rblock, ext_cre, ext_ann);

    Mat acc = Mat::Zero(spec.d, spec.d);
    for (const auto& matching : plan.matchings) {
        const int npairs = static_cast<int>(matching.size());
        std::vector<int> mode_idx(npairs, 0);
        while (true) {
            // crossing field energies
            std::vector<double> cross_gap(L + 1, 0.0), cross_block(L + 1, 0.0);
            double weight = 1.0;
            for (int p = 0; p < npairs; ++p) {
                const auto& mode = modes[mode_idx[p]];
                weight *= mode.weight / mode.frequency;
                int ai = matching[p].first, cj = matching[p].second;
                for (int gap = ai; gap < cj; ++gap) cross_gap[gap] += mode.frequency;
                for (int l = ai + 1; l < cj; ++l) cross_block[l] += mode.frequency;
            }
            // assemble contracted legs per block
            std::vector<std::vector<Leg>> con_cre(L), con_ann(L);
            for (int p = 0; p < npairs; ++p) {
                const auto& mode = modes[mode_idx[p]];
                Leg leg{mode.frequency, mode.polarization};
                con_ann[matching[p].first - 1].push_back(leg);
                con_cre[matching[p].second - 1].push_back(leg);
            }
            bool alive = true;
            double v0 = cross_gap[0] + r + rtilde[0];
            if (spec.windowed && v0 > spec.window + kWindowTol) alive = false;
            Mat chain;
            if (alive) {
                chain = spec.gaps[0](v0);
                for (int l = 1; l <= L && alive; ++l) {
                    const auto& b = spec.candidates[plan.cand[l - 1]];
                    double rb = cross_block[l] + r + rblock[l];
                    chain = chain * b.eval(rb, ext_cre[l - 1], con_cre[l - 1], ext_ann[l - 1],
                                           con_ann[l - 1]);
                    double vl = cross_gap[l] + r + rtilde[l];
                    if (spec.windowed && vl > spec.window + kWindowTol) {
                        alive = false;
                        break;
                    }
                    chain = chain * spec.gaps[l](vl);
                }
            }
            if (alive) acc += weight * chain;
            // advance multi-index over modes
            int d = npairs - 1;
            while (d >= 0) {
                if (++mode_idx[d] < static_cast<int>(modes.size())) break;
                mode_idx[d] = 0;
                --d;
            }
            if (d < 0) break;
        }
    }
    return plan.comb * acc;
}

}  // namespace

long wick_term_count(const WickProductSpec& spec, int M, int N) {
    return build_plans(spec, M, N).assignments;
}

Mat wick_eval_symbolic(const WickProductSpec& spec, int M, int N, double r,
                       const std::vector<Leg>& km, const std::vector<Leg>& kn) {
    PlanSet set = build_plans(spec, M, N);
    Mat acc = Mat::Zero(spec.d, spec.d);
    for (const auto& plan : set.plans) acc += eval_plan_symbolic(spec, plan, r, km, kn);
    return acc;
}

namespace {

struct MiniBasis {
    FockBasis basis;
    std::vector<double> energy;
};

const MiniBasis& mini_basis(const ModeGrid& grid, int n_max) {
    thread_local std::map<std::pair<std::string, int>, MiniBasis> cache;
    auto key = std::make_pair(grid.id, n_max);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    MiniBasis mb;
    mb.basis = build_basis(grid, n_max);
    mb.energy.resize(mb.basis.size());
    for (int s = 0; s < mb.basis.size(); ++s)
        mb.energy[s] = state_energy(mb.basis, grid, s);
    return cache.emplace(key, std::move(mb)).first->second;
}

Mat eval_plan_matrix(const WickProductSpec& spec, const TermPlan& plan, double r,
                     const std::vector<Leg>& km, const std::vector<Leg>& kn) {
    const int L = spec.L;
    const auto& grid = *spec.grid;
    std::vector<double> rtilde, rblock;
    std::vector<std::vector<Leg>> ext_cre, ext_ann;
    external_shifts(spec, plan, km, kn, rtilde, rblock, ext_cre, ext_ann);

    int total_p = 0;
    for (int l = 0; l < L; ++l) total_p += spec.candidates[plan.cand[l]].p;
    const MiniBasis& mb = mini_basis(grid, total_p);
    const int nf = mb.basis.size();
    const int d = spec.d;
    const long dim = static_cast<long>(d) * nf;

    auto gap_matrix = [&](int l) {
        Mat g = Mat::Zero(dim, dim);
        for (int s = 0; s < nf; ++s) {
            double v = mb.energy[s] + r + rtilde[l];
            if (spec.windowed && v > spec.window + kWindowTol) continue;
            Mat f = spec.gaps[l](v);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    g(static_cast<long>(a) * nf + s, static_cast<long>(b) * nf + s) = f(a, b);
        }
        return g;
    };

    auto block_matrix = [&](int l) {
        const auto& b = spec.candidates[plan.cand[l - 1]];
        Mat out = Mat::Zero(dim, dim);
        for (int s = 0; s < nf; ++s) {
            std::vector<int> occ = mb.basis.states[s];
            std::vector<Leg> ann_legs;
            std::function<void(int, double)> loop_ann = [&](int depth, double amp) {
                if (depth == b.q) {
                    double e_mid = 0;
                    for (int q = 0; q < mb.basis.mode_count; ++q)
                        e_mid += occ[q] * grid.modes[q].frequency;
                    std::vector<Leg> cre_legs;
                    std::function<void(int, double)> loop_cre = [&](int dc, double amp2) {
                        if (dc == b.p) {
                            int tgt = mb.basis.index_of(occ);
                            if (tgt < 0) return;
                            Mat kv = b.eval(e_mid + r + rblock[l], ext_cre[l - 1], cre_legs,
                                            ext_ann[l - 1], ann_legs);
                            for (int a = 0; a < d; ++a)
                                for (int bb = 0; bb < d; ++bb)
                                    out(static_cast<long>(a) * nf + tgt,
                                        static_cast<long>(bb) * nf + s) += amp2 * kv(a, bb);
                            return;
                        }
                        for (int q = 0; q < mb.basis.mode_count; ++q) {
                            occ[q] += 1;
                            double fac =
                                std::sqrt(grid.modes[q].weight / grid.modes[q].frequency) *
                                std::sqrt(static_cast<double>(occ[q]));
                            cre_legs.push_back({grid.modes[q].frequency,
                                                grid.modes[q].polarization});
                            loop_cre(dc + 1, amp2 * fac);
                            cre_legs.pop_back();
                            occ[q] -= 1;
                        }
                    };
                    loop_cre(0, amp);
                    return;
                }
                for (int q = 0; q < mb.basis.mode_count; ++q) {
                    if (occ[q] == 0) continue;
                    double fac = std::sqrt(grid.modes[q].weight / grid.modes[q].frequency) *
                                 std::sqrt(static_cast<double>(occ[q]));
                    occ[q] -= 1;
                    ann_legs.push_back({grid.modes[q].frequency, grid.modes[q].polarization});
                    loop_ann(depth + 1, amp * fac);
                    ann_legs.pop_back();
                    occ[q] += 1;
                }
            };
            loop_ann(0, 1.0);
        }
        return out;
    };

    Mat chain = gap_matrix(0);
    for (int l = 1; l <= L; ++l) chain = chain * block_matrix(l) * gap_matrix(l);

    int vac = mb.basis.index_of(std::vector<int>(mb.basis.mode_count, 0));
    Mat val(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            val(a, b) = chain(static_cast<long>(a) * nf + vac, static_cast<long>(b) * nf + vac);
    return plan.comb * val;
}

}  // namespace

Mat wick_eval_matrix(const WickProductSpec& spec, int M, int N, double r,
                     const std::vector<Leg>& km, const std::vector<Leg>& kn) {
    PlanSet set = build_plans(spec, M, N);
    Mat acc = Mat::Zero(spec.d, spec.d);
    for (const auto& plan : set.plans) acc += eval_plan_matrix(spec, plan, r, km, kn);
    return acc;
}

Mat wick_eval(const WickProductSpec& spec, int M, int N, double r,
              const std::vector<Leg>& km, const std::vector<Leg>& kn) {
    return spec.L <= 2 ? wick_eval_matrix(spec, M, N, r, km, kn)
                       : wick_eval_symbolic(spec, M, N, r, km, kn);
}

namespace {

// symmetrized evaluation: average over permutations of km and of kn
Mat wick_eval_sym(const WickProductSpec& spec, const PlanSet& set, bool matrix_route, int M,
                  int N, double r, const std::vector<Leg>& km, const std::vector<Leg>& kn) {
    std::vector<int> pm(M), pn(N);
    for (int i = 0; i < M; ++i) pm[i] = i;
    for (int i = 0; i < N; ++i) pn[i] = i;
    Mat acc = Mat::Zero(spec.d, spec.d);
    int count = 0;
    std::sort(pm.begin(), pm.end());
    do {
        std::vector<int> pn2 = pn;
        std::sort(pn2.begin(), pn2.end());
        do {
            std::vector<Leg> km2(M), kn2(N);
            for (int i = 0; i < M; ++i) km2[i] = km[pm[i]];
            for (int i = 0; i < N; ++i) kn2[i] = kn[pn2[i]];
            for (const auto& plan : set.plans)
                acc += matrix_route ? eval_plan_matrix(spec, plan, r, km2, kn2)
                                    : eval_plan_symbolic(spec, plan, r, km2, kn2);
            ++count;
        } while (std::next_permutation(pn2.begin(), pn2.end()));
    } while (std::next_permutation(pm.begin(), pm.end()));
    return acc / static_cast<double>(count);
}

}  // namespace

KernelFamily wick_normal_order(const WickProductSpec& spec, int MN_max,
                               const std::vector<double>& r_grid,
                               const std::vector<Mode>& k_nodes, double mu, double xi) {
    KernelFamily fam;
    fam.mu = mu;
    fam.xi = xi;
    fam.d = spec.d;
    for (int M = 0; M <= MN_max; ++M) {
        for (int N = 0; N + M <= MN_max; ++N) {
            PlanSet set = build_plans(spec, M, N);
            if (set.plans.empty()) continue;
            bool matrix_route = spec.L <= 2;
            // shared_ptr so the sampled kernel's evaluator stays valid
            auto spec_copy = std::make_shared<WickProductSpec>(spec);
            auto set_copy = std::make_shared<PlanSet>(std::move(set));
            KernelEval eval = [spec_copy, set_copy, matrix_route, M, N](
                                  double r, const std::vector<Leg>& km,
                                  const std::vector<Leg>& kn) -> Mat {
                return wick_eval_sym(*spec_copy, *set_copy, matrix_route, M, N, r, km, kn);
            };
            fam.kernels[{M, N}] = sample_kernel(M, N, spec.d, r_grid, k_nodes, eval, nullptr, mu);
        }
    }
    return fam;
}

std::vector<WickBlock> family_blocks(const KernelFamily& fam, int p_cap, int q_cap) {
    std::vector<WickBlock> blocks;
    for (const auto& [mn, kernel] : fam.kernels) {
        int tm = mn.first, tn = mn.second;
        // split total legs (tm, tn) into external (m,n) and contracted (p,q)
        for (int p = 0; p <= std::min(tm, p_cap); ++p) {
            for (int q = 0; q <= std::min(tn, q_cap); ++q) {
                WickBlock b;
                b.m = tm - p;
                b.p = p;
                b.n = tn - q;
                b.q = q;
                double cmp = 1.0, cnq = 1.0;
                for (int i = 0; i < p; ++i) cmp = cmp * (tm - i) / (i + 1);
                for (int i = 0; i < q; ++i) cnq = cnq * (tn - i) / (i + 1);
                b.combinatorial = cmp * cnq;
                KernelEval ke = kernel.eval;
                if (!ke) throw precondition_error("family blocks need evaluator-backed kernels");
                b.eval = [ke](double r, const std::vector<Leg>& em, const std::vector<Leg>& cm,
                              const std::vector<Leg>& en, const std::vector<Leg>& cn) -> Mat {
                    std::vector<Leg> all_m = em;
                    all_m.insert(all_m.end(), cm.begin(), cm.end());
                    std::vector<Leg> all_n = en;
                    all_n.insert(all_n.end(), cn.begin(), cn.end());
                    return ke(r, all_m, all_n);
                };
                blocks.push_back(std::move(b));
            }
        }
    }
    return blocks;
}

}  // namespace sbr
