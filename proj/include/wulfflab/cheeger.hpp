#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "wulfflab/config.hpp"
#include "wulfflab/errors.hpp"
#include "wulfflab/grid.hpp"
#include "wulfflab/gridfun.hpp"
#include "wulfflab/norms.hpp"

namespace wulfflab {

/// Pointwise Euclidean projection onto the polar unit ball {F°(v) <= 1},
/// with closed forms per norm kind. The gauge_rescale mode divides by
/// max(1, F°(v)) instead; that is a feasible retraction, not the Euclidean
/// projection, and trades certificate sharpness for speed.
class PolarProjector {
  public:
    PolarProjector(const NormDescriptor& norm, ProjectionMode mode)
        : norm_(&norm), mode_(mode) {
        if (norm.kind == NormKind::quadratic) {
            const SymMat& M = norm.Ainv();
            double m00 = M.m[0][0], m01 = M.m[0][1], m11 = M.m[1][1];
            double th = 0.5 * std::atan2(2.0 * m01, m00 - m11);
            c_ = std::cos(th);
            s_ = std::sin(th);
            l1_ = c_ * c_ * m00 + 2.0 * c_ * s_ * m01 + s_ * s_ * m11;
            l2_ = s_ * s_ * m00 - 2.0 * c_ * s_ * m01 + c_ * c_ * m11;
        }
    }

    void project(double& x, double& y) const {
        if (mode_ == ProjectionMode::gauge_rescale) {
            double f = norm_->polar_eval2(x, y);
            if (f > 1.0) {
                x /= f;
                y /= f;
            }
            return;
        }
        switch (norm_->kind) {
            case NormKind::euclidean: {
                double r = std::hypot(x, y);
                if (r > 1.0) {
                    x /= r;
                    y /= r;
                }
                break;
            }
            case NormKind::quadratic:
                project_ellipse(x, y);
                break;
            case NormKind::lq:
                project_lq(x, y);
                break;
        }
    }

  private:
    const NormDescriptor* norm_;
    ProjectionMode mode_;
    double c_ = 1.0, s_ = 0.0, l1_ = 1.0, l2_ = 1.0;

    /// Projection onto {l1 z1^2 + l2 z2^2 <= 1} in the eigenbasis: the KKT
    /// multiplier solves a scalar equation phi(mu) = 1 with phi convex and
    /// decreasing, so Newton from 0 converges monotonically from the left.
    void project_ellipse(double& x, double& y) const {
        double z1 = c_ * x + s_ * y;
        double z2 = -s_ * x + c_ * y;
        double q = l1_ * z1 * z1 + l2_ * z2 * z2;
        if (q <= 1.0) return;
        double mu = 0.0;
        for (int it = 0; it < 60; ++it) {
            double d1 = 1.0 + mu * l1_, d2 = 1.0 + mu * l2_;
            double phi = l1_ * z1 * z1 / (d1 * d1) + l2_ * z2 * z2 / (d2 * d2);
            double dphi = -2.0 * (l1_ * l1_ * z1 * z1 / (d1 * d1 * d1) +
                                  l2_ * l2_ * z2 * z2 / (d2 * d2 * d2));
            double res = phi - 1.0;
            if (std::fabs(res) < 1e-13) break;
            mu -= res / dphi;
        }
        double y1 = z1 / (1.0 + mu * l1_);
        double y2 = z2 / (1.0 + mu * l2_);
        x = c_ * y1 - s_ * y2;
        y = s_ * y1 + c_ * y2;
    }

    /// Projection onto {sum c_i |v_i|^r <= 1}, r = conjugate exponent in
    /// (1,2]. Outer bisection on the multiplier; per-component safeguarded
    /// Newton for t + mu c_i r t^{r-1} = |sigma_i|.
    void project_lq(double& x, double& y) const {
        double r = norm_->lq_conjugate();
        const auto& cw = norm_->lq_polar_weights();
        double s0 = std::fabs(x), s1 = std::fabs(y);
        auto gval = [&](double t0, double t1) {
            return cw[0] * std::pow(t0, r) + cw[1] * std::pow(t1, r);
        };
        if (gval(s0, s1) <= 1.0) return;
        auto comp = [&](double sv, double ci, double mu) {
            if (sv == 0.0) return 0.0;
            double a = mu * ci * r;
            double lo = 0.0, hi = sv, t = sv;
            for (int it = 0; it < 50; ++it) {
                double f = t + a * std::pow(t, r - 1.0) - sv;
                if (std::fabs(f) < 1e-14 * std::max(1.0, sv)) break;
                double df = 1.0 + a * (r - 1.0) * std::pow(t, r - 2.0);
                if (f > 0.0)
                    hi = t;
                else
                    lo = t;
                double tn = t - f / df;
                t = (tn > lo && tn < hi) ? tn : 0.5 * (lo + hi);
            }
            return t;
        };
        double mu_lo = 0.0, mu_hi = 1.0;
        for (int it = 0; it < 200 && gval(comp(s0, cw[0], mu_hi), comp(s1, cw[1], mu_hi)) > 1.0;
             ++it)
            mu_hi *= 2.0;
        for (int it = 0; it < 70; ++it) {
            double mu = 0.5 * (mu_lo + mu_hi);
            if (gval(comp(s0, cw[0], mu), comp(s1, cw[1], mu)) > 1.0)
                mu_lo = mu;
            else
                mu_hi = mu;
        }
        double mu = 0.5 * (mu_lo + mu_hi);
        double t0 = comp(s0, cw[0], mu), t1 = comp(s1, cw[1], mu);
        x = (x < 0.0) ? -t0 : t0;
        y = (y < 0.0) ? -t1 : t1;
    }
};

struct HistoryRow {
    double hk = 0.0;
    double perimeter = 0.0;
    double volume = 0.0;
};

struct CheegerResult {
    double h1 = 0.0;
    GridSubset set;
    int iterations = 0;
    std::vector<HistoryRow> history;
    double dual_gap = 0.0;
};

namespace detail {

/// Primal-dual solve of min_{0<=u<=1, u=0 off mask} sum F(Gu) - hk sum u.
/// Returns the h^2-scaled duality gap at exit; u, sx, sy are warm-startable.
inline double prescribed_ratio_pd(const GridDomain& d, const NormDescriptor& norm,
                                  const GradOp& G, const PolarProjector& proj, double hk,
                                  const SolverConfig& cfg, std::vector<double>& u,
                                  std::vector<double>& sx, std::vector<double>& sy) {
    const size_t N = d.mask.size();
    const double h2 = d.h * d.h;
    const double step = d.h / std::sqrt(8.0);
    std::vector<double> uold = u, gx, gy, gts;
    double gap = 1e300;
    for (int it = 0; it < cfg.max_inner; ++it) {
        std::vector<double> ubar(N);
        for (size_t k = 0; k < N; ++k) ubar[k] = 2.0 * u[k] - uold[k];
        G.apply(ubar, gx, gy);
        for (size_t k = 0; k < N; ++k) {
            sx[k] += step * gx[k];
            sy[k] += step * gy[k];
            proj.project(sx[k], sy[k]);
        }
        G.adjoint(sx, sy, gts);
        uold = u;
        for (size_t k = 0; k < N; ++k) {
            if (!d.mask[k]) {
                u[k] = 0.0;
                continue;
            }
            u[k] = std::clamp(u[k] - step * (gts[k] - hk), 0.0, 1.0);
        }
        if ((it + 1) % 25 == 0 || it + 1 == cfg.max_inner) {
            G.apply(u, gx, gy);
            double primal = 0.0, mass = 0.0, dual = 0.0;
            for (size_t k = 0; k < N; ++k) {
                if (gx[k] != 0.0 || gy[k] != 0.0) primal += norm.eval2(gx[k], gy[k]);
                if (d.mask[k]) {
                    mass += u[k];
                    dual += std::min(0.0, gts[k] - hk);
                }
            }
            double J = h2 * (primal - hk * mass);
            double D = h2 * dual;
            gap = J - D;
            if (gap <= cfg.inner_tol * std::max(1.0, std::fabs(J))) break;
        }
    }
    return gap;
}

struct ThresholdPick {
    bool found = false;
    double ratio = 1e300;
    double perimeter = 0.0, volume = 0.0;
    GridSubset set;
};

/// Best ratio P_F({u>s}) / |{u>s}| over 64 levels in (0,1).
inline ThresholdPick threshold_best(const GridFunction& u, const NormDescriptor& norm,
                                    int passes) {
    ThresholdPick pick;
    const int levels = 64;
    int last_count = -1;
    for (int m = 0; m < levels; ++m) {
        double s = (double(m) + 0.5) / levels;
        GridSubset set = u.superlevel(s);
        int cnt = set.count();
        if (cnt == 0) continue;
        if (cnt == last_count) continue;
        last_count = cnt;
        double per = grid_set_perimeter_F(set, norm, passes);
        double vol = set.measure();
        double ratio = per / vol;
        if (ratio < pick.ratio) {
            pick.found = true;
            pick.ratio = ratio;
            pick.perimeter = per;
            pick.volume = vol;
            pick.set = std::move(set);
        }
    }
    return pick;
}

/// Exact anisotropic TV of indicator subsets of a short cell list, evaluated
/// on a local window just large enough to contain the stencil support.
/// Matches grid_set_perimeter_F up to summation order.
class SubsetPerimeter {
  public:
    SubsetPerimeter(const GridDomain& d, std::vector<std::pair<int, int>> cells,
                    const NormDescriptor& norm, int passes)
        : d_(&d), cells_(std::move(cells)), norm_(&norm), passes_(passes) {
        int margin = passes + 2;
        int i0 = d.nx, i1 = -1, j0 = d.ny, j1 = -1;
        for (auto [i, j] : cells_) {
            i0 = std::min(i0, i);
            i1 = std::max(i1, i);
            j0 = std::min(j0, j);
            j1 = std::max(j1, j);
        }
        i0_ = i0 - margin;
        j0_ = j0 - margin;
        wnx_ = (i1 - i0) + 2 * margin + 1;
        wny_ = (j1 - j0) + 2 * margin + 1;
        buf_.resize(size_t(wnx_) * size_t(wny_));
        tmp_.resize(buf_.size());
    }

    double eval(uint32_t bits) const {
        std::fill(buf_.begin(), buf_.end(), 0.0);
        for (size_t c = 0; c < cells_.size(); ++c)
            if (bits & (1u << c))
                buf_[widx(cells_[c].first - i0_, cells_[c].second - j0_)] = 1.0;
        for (int p = 0; p < passes_; ++p) {
            for (int j = 0; j < wny_; ++j)
                for (int i = 0; i < wnx_; ++i) {
                    double l = (i > 0) ? buf_[widx(i - 1, j)] : 0.0;
                    double r = (i < wnx_ - 1) ? buf_[widx(i + 1, j)] : 0.0;
                    tmp_[widx(i, j)] = 0.25 * (l + 2.0 * buf_[widx(i, j)] + r);
                }
            for (int j = 0; j < wny_; ++j)
                for (int i = 0; i < wnx_; ++i) {
                    double b = (j > 0) ? tmp_[widx(i, j - 1)] : 0.0;
                    double a = (j < wny_ - 1) ? tmp_[widx(i, j + 1)] : 0.0;
                    buf_[widx(i, j)] = 0.25 * (b + 2.0 * tmp_[widx(i, j)] + a);
                }
        }
        double ih = 1.0 / d_->h;
        double s = 0.0;
        for (int j = 0; j < wny_; ++j)
            for (int i = 0; i < wnx_; ++i) {
                double c = buf_[widx(i, j)];
                double r = (i < wnx_ - 1) ? buf_[widx(i + 1, j)] : 0.0;
                double a = (j < wny_ - 1) ? buf_[widx(i, j + 1)] : 0.0;
                double gx = (r - c) * ih, gy = (a - c) * ih;
                if (gx != 0.0 || gy != 0.0) s += norm_->eval2(gx, gy);
            }
        return s * d_->h * d_->h;
    }

    const std::vector<std::pair<int, int>>& cells() const { return cells_; }

  private:
    const GridDomain* d_;
    std::vector<std::pair<int, int>> cells_;
    const NormDescriptor* norm_;
    int passes_;
    int i0_ = 0, j0_ = 0, wnx_ = 0, wny_ = 0;
    mutable std::vector<double> buf_, tmp_;

    size_t widx(int i, int j) const { return size_t(j) * size_t(wnx_) + size_t(i); }
};

inline std::vector<std::pair<int, int>> mask_cell_list(const GridDomain& d) {
    std::vector<std::pair<int, int>> cells;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            if (d.mask[d.idx(i, j)]) cells.emplace_back(i, j);
    return cells;
}

inline GridSubset subset_from_bits(const GridDomain& d,
                                   const std::vector<std::pair<int, int>>& cells, uint32_t bits) {
    GridSubset s = GridSubset::empty(d);
    for (size_t c = 0; c < cells.size(); ++c)
        if (bits & (1u << c)) s.cells[d.idx(cells[c].first, cells[c].second)] = 1;
    return s;
}

}  // namespace detail

/// Exhaustive minimizer of P_F(E)/|E| over all nonempty subsets of the mask.
inline CheegerResult brute_force_h1(const GridDomain& domain, const NormDescriptor& norm,
                                    int passes = kDefaultSmoothingPasses) {
    domain.validate();
    auto cells = detail::mask_cell_list(domain);
    int N = int(cells.size());
    if (N > 20) throw TooLarge("brute_force_h1 limited to 20 cells");
    detail::SubsetPerimeter per(domain, cells, norm, passes);
    const double h2 = domain.h * domain.h;
    double best = 1e300;
    uint32_t best_bits = 0;
    for (uint32_t bits = 1; bits < (1u << N); ++bits) {
        double ratio = per.eval(bits) / (double(__builtin_popcount(bits)) * h2);
        if (ratio < best) {
            best = ratio;
            best_bits = bits;
        }
    }
    CheegerResult res;
    res.set = detail::subset_from_bits(domain, cells, best_bits);
    res.set.validate();
    res.h1 = grid_set_perimeter_F(res.set, norm, passes) / res.set.measure();
    res.iterations = int((1u << N) - 1);
    res.history.push_back({res.h1, res.h1 * res.set.measure(), res.set.measure()});
    return res;
}

/// First anisotropic Cheeger constant by the alternating scheme: a primal-dual
/// inner solve of the prescribed-ratio relaxation, ratio-optimal thresholding
/// over 64 levels, and a monotone best-so-far outer update. Masks of at most
/// 20 cells are additionally polished by exhaustive enumeration, which keeps
/// the discrete result exactly equal to the brute-force oracle.
inline CheegerResult solve_h1(const GridDomain& domain, const NormDescriptor& norm,
                              const SolverConfig& cfg) {
    domain.validate();
    cfg.validate();
    const size_t N = domain.mask.size();
    GradOp G(domain, cfg.passes);
    PolarProjector proj(norm, cfg.projection_mode);

    CheegerResult res;
    res.set = GridSubset::full(domain);
    res.set.validate();
    {
        double per = grid_set_perimeter_F(res.set, norm, cfg.passes);
        double vol = res.set.measure();
        res.h1 = per / vol;
        res.history.push_back({res.h1, per, vol});
    }

    std::vector<double> u(N, 0.0), sx(N, 0.0), sy(N, 0.0);
    for (size_t k = 0; k < N; ++k) u[k] = domain.mask[k] ? 1.0 : 0.0;

    bool converged = false;
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        res.iterations = outer + 1;
        res.dual_gap = detail::prescribed_ratio_pd(domain, norm, G, proj, res.h1, cfg, u, sx, sy);
        GridFunction uf = GridFunction::zeros(domain);
        uf.values = u;
        detail::ThresholdPick pick = detail::threshold_best(uf, norm, cfg.passes);
        if (!pick.found) throw EmptyLevelSet("all threshold levels yield empty sets");
        double prev = res.h1;
        if (pick.ratio < res.h1) {
            res.h1 = pick.ratio;
            res.set = std::move(pick.set);
            res.history.push_back({res.h1, pick.perimeter, pick.volume});
        } else {
            res.history.push_back({res.h1, res.history.back().perimeter,
                                   res.history.back().volume});
        }
        if (std::fabs(prev - res.h1) < cfg.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NonConvergence("outer Cheeger iteration did not settle");

    if (domain.mask_count() <= 20) {
        CheegerResult exact = brute_force_h1(domain, norm, cfg.passes);
        if (exact.h1 <= res.h1) {
            exact.iterations = res.iterations;
            exact.history = res.history;
            exact.history.push_back({exact.h1, exact.h1 * exact.set.measure(),
                                     exact.set.measure()});
            exact.dual_gap = res.dual_gap;
            return exact;
        }
    }
    return res;
}

/// True iff the computed set has a cell adjacent to a non-mask cell.
inline bool cheeger_touches_boundary(const CheegerResult& result) {
    const GridDomain& d = *result.set.parent;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            if (!result.set.has(i, j)) continue;
            for (int k = 0; k < 4; ++k)
                if (!d.inside(i + di[k], j + dj[k])) return true;
        }
    return false;
}

}  // namespace wulfflab
