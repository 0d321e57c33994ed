#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "wulfflab/cheeger.hpp"
#include "wulfflab/config.hpp"
#include "wulfflab/errors.hpp"
#include "wulfflab/grid.hpp"
#include "wulfflab/gridfun.hpp"
#include "wulfflab/norms.hpp"
#include "wulfflab/partition.hpp"

namespace wulfflab {

struct EigenResult {
    double p = 2.0;
    double lambda = 0.0;
    GridFunction eigenfunction;
    double residual = 0.0;
    double eps_final = 0.0;
    double eps_bias_bound = 0.0;
    std::optional<SubsetPair> nodal;
    int iterations = 0;
};

namespace detail {

/// F(g) * gradF(g), continuous through g = 0 (limit 0); closed per-kind forms
/// avoid the 0/0 in gradF alone.
inline void f_times_grad(const NormDescriptor& norm, double gx, double gy, double& ox,
                         double& oy) {
    switch (norm.kind) {
        case NormKind::euclidean:
            ox = gx;
            oy = gy;
            return;
        case NormKind::quadratic: {
            const SymMat& A = norm.A();
            ox = A.m[0][0] * gx + A.m[0][1] * gy;
            oy = A.m[1][0] * gx + A.m[1][1] * gy;
            return;
        }
        case NormKind::lq: {
            double F = norm.eval2(gx, gy);
            if (F == 0.0) {
                ox = oy = 0.0;
                return;
            }
            double q = norm.lq_exponent();
            const auto& w = norm.lq_weights();
            double s = std::pow(F, 2.0 - q);
            ox = s * w[0] * std::pow(std::fabs(gx), q - 1.0) * (gx < 0.0 ? -1.0 : 1.0);
            oy = s * w[1] * std::pow(std::fabs(gy), q - 1.0) * (gy < 0.0 ? -1.0 : 1.0);
            if (gx == 0.0) ox = 0.0;
            if (gy == 0.0) oy = 0.0;
            return;
        }
    }
}

/// Regularized Rayleigh quotient
///   R(u) = sum h^2 (F(Gu)^2 + eps^2)^{p/2} / sum h^2 |u|^p
/// and its analytic gradient on mask cells. The eigenvalue discretization
/// uses the plain forward-difference gradient (no smoothing passes): the
/// indicator-anisotropy correction in the TV stencil has no role for smooth
/// fields and a narrower stencil keeps the p=2 oracle sharp.
struct RayleighEval {
    const GridDomain* d;
    const NormDescriptor* norm;
    double p, eps;
    GradOp G;

    RayleighEval(const GridDomain& dom, const NormDescriptor& nrm, double p_, double eps_)
        : d(&dom), norm(&nrm), p(p_), eps(eps_), G(dom, 0) {}

    double value(const std::vector<double>& u) const {
        std::vector<double> gx, gy;
        G.apply(u, gx, gy);
        double num = 0.0, den = 0.0;
        for (size_t k = 0; k < u.size(); ++k) {
            double F = norm->eval2(gx[k], gy[k]);
            num += std::pow(F * F + eps * eps, 0.5 * p);
            if (d->mask[k]) den += std::pow(std::fabs(u[k]), p);
        }
        if (den == 0.0) throw NonConvergence("zero field in Rayleigh quotient");
        return num / den;
    }

    /// Returns R(u); fills grad (zero off mask).
    double value_and_grad(const std::vector<double>& u, std::vector<double>& grad) const {
        std::vector<double> gx, gy;
        G.apply(u, gx, gy);
        double num = 0.0, den = 0.0;
        std::vector<double> wx(u.size()), wy(u.size());
        for (size_t k = 0; k < u.size(); ++k) {
            double F = norm->eval2(gx[k], gy[k]);
            double base = F * F + eps * eps;
            num += std::pow(base, 0.5 * p);
            double w = (base > 0.0) ? p * std::pow(base, 0.5 * p - 1.0) : 0.0;
            double ax, ay;
            f_times_grad(*norm, gx[k], gy[k], ax, ay);
            wx[k] = w * ax;
            wy[k] = w * ay;
            if (d->mask[k]) den += std::pow(std::fabs(u[k]), p);
        }
        if (den == 0.0) throw NonConvergence("zero field in Rayleigh quotient");
        double R = num / den;
        std::vector<double> dnum;
        G.adjoint(wx, wy, dnum);
        grad.assign(u.size(), 0.0);
        for (size_t k = 0; k < u.size(); ++k) {
            if (!d->mask[k]) continue;
            double dden = p * std::pow(std::fabs(u[k]), p - 1.0) *
                          (u[k] < 0.0 ? -1.0 : (u[k] > 0.0 ? 1.0 : 0.0));
            grad[k] = (dnum[k] - R * dden) / den;
        }
        return R;
    }
};

inline void normalize_p(const GridDomain& d, double p, std::vector<double>& u) {
    double s = 0.0;
    for (size_t k = 0; k < u.size(); ++k)
        if (d.mask[k]) s += std::pow(std::fabs(u[k]), p);
    s *= d.h * d.h;
    if (s <= 0.0) throw NonConvergence("cannot normalize zero field");
    double c = std::pow(s, -1.0 / p);
    for (size_t k = 0; k < u.size(); ++k) u[k] = d.mask[k] ? u[k] * c : 0.0;
}

inline std::vector<double> smooth_random_init(const GridDomain& d, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> u(d.mask.size(), 0.0);
    for (size_t k = 0; k < u.size(); ++k)
        if (d.mask[k]) u[k] = rng.uniform(0.05, 1.0);
    GradOp lowpass(d, 40);
    lowpass.smooth(u);
    for (size_t k = 0; k < u.size(); ++k)
        if (!d.mask[k]) u[k] = 0.0;
    return u;
}

/// Barzilai-Borwein descent with backtracking for one eps stage; the iterate
/// is replaced by its absolute value each step (never increases R) and
/// renormalized for conditioning.
inline double bb_descent(const RayleighEval& ev, const SolverConfig& cfg, std::vector<double>& u,
                         int& iters_used) {
    const GridDomain& d = *ev.d;
    std::vector<double> g, gprev, uprev;
    normalize_p(d, ev.p, u);
    double R = ev.value_and_grad(u, g);
    double tau = d.h * d.h;
    int stall = 0;
    for (int it = 0; it < cfg.max_inner; ++it) {
        ++iters_used;
        if (!uprev.empty()) {
            double sy = 0.0, yy = 0.0;
            for (size_t k = 0; k < u.size(); ++k) {
                double s = u[k] - uprev[k], y = g[k] - gprev[k];
                sy += s * y;
                yy += y * y;
            }
            if (sy > 0.0 && yy > 0.0) tau = std::clamp(sy / yy, 1e-8, 1e6);
        }
        uprev = u;
        gprev = g;
        bool accepted = false;
        double t = tau;
        for (int bt = 0; bt < 40; ++bt) {
            std::vector<double> cand(u.size());
            for (size_t k = 0; k < u.size(); ++k)
                cand[k] = d.mask[k] ? std::fabs(u[k] - t * g[k]) : 0.0;
            double Rc;
            try {
                normalize_p(d, ev.p, cand);
                Rc = ev.value(cand);
            } catch (const NonConvergence&) {
                t *= 0.5;
                continue;
            }
            if (Rc <= R + 1e-14 * std::fabs(R)) {
                u = std::move(cand);
                double drop = R - Rc;
                R = Rc;
                stall = (drop < cfg.inner_tol * std::max(1.0, std::fabs(R))) ? stall + 1 : 0;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted || stall >= 5) break;
        R = ev.value_and_grad(u, g);
    }
    return R;
}

}  // namespace detail

/// First Dirichlet eigenvalue of the anisotropic p-Laplacian: minimizes the
/// regularized Rayleigh quotient with eps-continuation down to 1e-6 and
/// reports the unregularized quotient of the final iterate.
inline EigenResult solve_lambda1(const GridDomain& domain, const NormDescriptor& norm, double p,
                                 const SolverConfig& cfg,
                                 const std::vector<double>* warm_start = nullptr) {
    if (p <= 1.0 || p > 4.0) throw InvalidP("p must lie in (1, 4]");
    domain.validate();
    cfg.validate();
    std::vector<double> u =
        warm_start ? *warm_start : detail::smooth_random_init(domain, cfg.seed);
    for (size_t k = 0; k < u.size(); ++k)
        if (!domain.mask[k]) u[k] = 0.0;
    EigenResult res;
    res.p = p;
    res.iterations = 0;
    double Rlast = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        detail::RayleighEval ev(domain, norm, p, eps);
        Rlast = detail::bb_descent(ev, cfg, u, res.iterations);
        res.eps_final = eps;
    }
    detail::normalize_p(domain, p, u);
    detail::RayleighEval ev0(domain, norm, p, 0.0);
    res.lambda = ev0.value(u);
    res.residual = std::fabs(Rlast - res.lambda);
    res.eps_bias_bound = std::pow(res.eps_final, p) * domain.measure();
    res.eigenfunction = GridFunction::zeros(domain);
    res.eigenfunction.values = std::move(u);
    return res;
}

/// Second eigenvalue via the disjoint-pair characterization: the best
/// max{lambda1(A), lambda1(B)} over candidate pairs (the h2 couple plus
/// far-apart Voronoi splits), improved by transferring interface cells toward
/// the side with the larger eigenvalue while the max decreases.
inline EigenResult solve_lambda2(const GridDomain& domain, const NormDescriptor& norm, double p,
                                 const SolverConfig& cfg,
                                 const SubsetPair* warm_pair = nullptr) {
    if (p <= 1.0 || p > 4.0) throw InvalidP("p must lie in (1, 4]");
    domain.validate();
    cfg.validate();
    if (domain.mask_count() < 2) throw NoRoomForPair("domain cannot host a disjoint pair");

    std::vector<SubsetPair> candidates;
    if (warm_pair) {
        // a warm pair (from a previous p or a precomputed h2 couple) replaces
        // the candidate search; the interface-transfer rounds still refine it
        candidates.push_back(*warm_pair);
    } else {
        CoupledCheegerResult h2res = solve_h2(domain, norm, cfg);
        candidates.push_back(h2res.pair);
        auto seeds = farthest_seeds(domain, norm, 4);
        for (size_t a = 0; a < seeds.size(); ++a)
            for (size_t b = a + 1; b < seeds.size(); ++b)
                candidates.push_back(voronoi_pair(domain, norm, seeds[a], seeds[b]));
    }

    auto solve_side = [&](const GridSubset& s) -> std::pair<double, std::vector<double>> {
        GridDomain sub = domain;
        for (size_t k = 0; k < sub.mask.size(); ++k) sub.mask[k] = s.cells[k];
        if (sub.mask_count() == 0) throw NoRoomForPair("empty side");
        EigenResult r = solve_lambda1(sub, norm, p, cfg);
        return {r.lambda, r.eigenfunction.values};
    };

    double best = 1e300;
    SubsetPair best_pair;
    std::vector<double> bu1, bu2;
    double bl1 = 0.0, bl2 = 0.0;
    for (const SubsetPair& cand : candidates) {
        if (cand.first.count() == 0 || cand.second.count() == 0) continue;
        try {
            auto [l1, u1] = solve_side(cand.first);
            auto [l2, u2] = solve_side(cand.second);
            double v = std::max(l1, l2);
            if (v < best) {
                best = v;
                best_pair = cand;
                bu1 = u1;
                bu2 = u2;
                bl1 = l1;
                bl2 = l2;
            }
        } catch (const Error&) {
            continue;
        }
    }
    if (best >= 1e300) throw NonConvergence("no feasible pair for the second eigenvalue");

    for (int round = 0; round < 8; ++round) {
        GridSubset& lo = (bl1 <= bl2) ? best_pair.first : best_pair.second;
        GridSubset& hi = (bl1 <= bl2) ? best_pair.second : best_pair.first;
        // move the interface layer of the smaller-eigenvalue side to the other
        SubsetPair trial = best_pair;
        GridSubset& tlo = (bl1 <= bl2) ? trial.first : trial.second;
        GridSubset& thi = (bl1 <= bl2) ? trial.second : trial.first;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        int moved = 0;
        for (int j = 0; j < domain.ny; ++j)
            for (int i = 0; i < domain.nx; ++i) {
                if (!lo.has(i, j)) continue;
                for (int k = 0; k < 4; ++k) {
                    int a = i + di[k], b = j + dj[k];
                    if (a >= 0 && b >= 0 && a < domain.nx && b < domain.ny && hi.has(a, b)) {
                        tlo.cells[domain.idx(i, j)] = 0;
                        thi.cells[domain.idx(i, j)] = 1;
                        ++moved;
                        break;
                    }
                }
            }
        if (moved == 0 || tlo.count() == 0) break;
        try {
            auto [l1, u1] = solve_side(trial.first);
            auto [l2, u2] = solve_side(trial.second);
            double v = std::max(l1, l2);
            if (v < best) {
                best = v;
                best_pair = trial;
                bu1 = u1;
                bu2 = u2;
                bl1 = l1;
                bl2 = l2;
            } else {
                break;
            }
        } catch (const Error&) {
            break;
        }
    }

    EigenResult res;
    res.p = p;
    res.lambda = best;
    res.eigenfunction = GridFunction::zeros(domain);
    for (size_t k = 0; k < bu1.size(); ++k)
        res.eigenfunction.values[k] = bu1[k] - bu2[k];
    res.nodal = best_pair;
    res.eps_final = 1e-6;
    res.eps_bias_bound = std::pow(res.eps_final, p) * domain.measure();
    return res;
}

struct SweepRow {
    double p = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;
    double margin1 = 0.0, margin2 = 0.0;  // lambda_i - (h_i_bound / p)^p
    double gap1 = 0.0, gap2 = 0.0;        // |lambda_i - h_i|
    double lambda1_root = 0.0;            // lambda1^{1/p}
    double nodal_min_measure = 0.0;
    double nodal_bound = 0.0;  // kappa_n (n / (2 h2))^n
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double h1 = 0.0;
    double h2_upper = 0.0;
    double h2_lower = 0.0;
};

/// Warm-started sweep of lambda1, lambda2 over decreasing p with the Cheeger
/// inequality margins and the nodal-measure diagnostic attached.
inline SweepResult sweep_p(const GridDomain& domain, const NormDescriptor& norm,
                           const std::vector<double>& p_list, const SolverConfig& cfg) {
    if (p_list.empty()) throw ConfigError("empty p list");
    for (size_t i = 0; i + 1 < p_list.size(); ++i)
        if (p_list[i] <= p_list[i + 1]) throw ConfigError("p list must decrease toward 1");
    if (p_list.back() < 1.02) throw InvalidP("sweep requires p >= 1.02");

    SweepResult out;
    CheegerResult c1 = solve_h1(domain, norm, cfg);
    out.h1 = c1.h1;
    CoupledCheegerResult c2 = solve_h2(domain, norm, cfg);
    out.h2_upper = c2.h2;
    out.h2_lower = lower_bounds(domain, norm, c1.h1).best();

    std::vector<double> warm1;
    SubsetPair warm_pair = c2.pair;
    for (double p : p_list) {
        EigenResult r1 = solve_lambda1(domain, norm, p, cfg, warm1.empty() ? nullptr : &warm1);
        warm1 = r1.eigenfunction.values;
        EigenResult r2 = solve_lambda2(domain, norm, p, cfg, &warm_pair);
        if (r2.nodal) warm_pair = *r2.nodal;
        SweepRow row;
        row.p = p;
        row.lambda1 = r1.lambda;
        row.lambda2 = r2.lambda;
        row.margin1 = r1.lambda - std::pow(out.h1 / p, p);
        row.margin2 = r2.lambda - std::pow(out.h2_lower / p, p);
        row.gap1 = std::fabs(r1.lambda - out.h1);
        row.gap2 = std::fabs(r2.lambda - out.h2_upper);
        row.lambda1_root = std::pow(r1.lambda, 1.0 / p);
        if (r2.nodal) {
            row.nodal_min_measure =
                std::min(r2.nodal->first.measure(), r2.nodal->second.measure());
            double n = double(norm.n);
            row.nodal_bound =
                wulff_unit_measure(norm) * std::pow(n / (2.0 * out.h2_upper), n);
        }
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace wulfflab
