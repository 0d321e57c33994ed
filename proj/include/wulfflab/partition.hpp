#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "wulfflab/cheeger.hpp"
#include "wulfflab/config.hpp"
#include "wulfflab/errors.hpp"
#include "wulfflab/geometry.hpp"
#include "wulfflab/grid.hpp"
#include "wulfflab/gridfun.hpp"
#include "wulfflab/norms.hpp"

namespace wulfflab {

struct SubsetPair {
    GridSubset first, second;

    void validate_disjoint() const {
        first.validate();
        second.validate();
        if (first.parent != second.parent) throw ConfigError("pair parents differ");
        for (size_t k = 0; k < first.cells.size(); ++k)
            if (first.cells[k] && second.cells[k]) throw NotDisjoint("pair sets overlap");
        if (first.count() == 0 || second.count() == 0)
            throw ConfigError("pair sets must be nonempty");
    }
};

struct CoupledCheegerResult {
    double h2 = 0.0;
    SubsetPair pair;
    double rho1 = 0.0, rho2 = 0.0;
    bool adjusted = false;
    bool connected1 = true, connected2 = true;
};

struct LowerBounds {
    double from_h1 = 0.0;          // h2 >= h1
    double from_volume = 0.0;      // n (2 kappa_n / |Omega|)^{1/n}
    double from_two_wulff = 0.0;   // h2 of two half-measure Wulff shapes (= from_volume)

    double best() const { return std::max(from_h1, from_volume); }
};

/// Connected components (4-neighborhood), largest first.
inline std::vector<GridSubset> subset_components(const GridSubset& s) {
    const GridDomain& d = *s.parent;
    std::vector<uint8_t> seen(s.cells.size(), 0);
    std::vector<GridSubset> comps;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int j0 = 0; j0 < d.ny; ++j0)
        for (int i0 = 0; i0 < d.nx; ++i0) {
            if (!s.has(i0, j0) || seen[d.idx(i0, j0)]) continue;
            GridSubset comp = GridSubset::empty(d);
            std::vector<std::pair<int, int>> stack{{i0, j0}};
            seen[d.idx(i0, j0)] = 1;
            while (!stack.empty()) {
                auto [i, j] = stack.back();
                stack.pop_back();
                comp.cells[d.idx(i, j)] = 1;
                for (int k = 0; k < 4; ++k) {
                    int a = i + di[k], b = j + dj[k];
                    if (a < 0 || b < 0 || a >= d.nx || b >= d.ny) continue;
                    if (s.has(a, b) && !seen[d.idx(a, b)]) {
                        seen[d.idx(a, b)] = 1;
                        stack.emplace_back(a, b);
                    }
                }
            }
            comps.push_back(std::move(comp));
        }
    std::sort(comps.begin(), comps.end(),
              [](const GridSubset& a, const GridSubset& b) { return a.count() > b.count(); });
    return comps;
}

inline bool subset_is_connected(const GridSubset& s) {
    int n = s.count();
    if (n == 0) return true;
    const GridDomain& d = *s.parent;
    std::vector<uint8_t> seen(s.cells.size(), 0);
    std::vector<std::pair<int, int>> stack;
    for (int j = 0; j < d.ny && stack.empty(); ++j)
        for (int i = 0; i < d.nx; ++i)
            if (s.has(i, j)) {
                stack.emplace_back(i, j);
                seen[d.idx(i, j)] = 1;
                break;
            }
    int reached = 0;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        ++reached;
        for (int k = 0; k < 4; ++k) {
            int a = i + di[k], b = j + dj[k];
            if (a < 0 || b < 0 || a >= d.nx || b >= d.ny) continue;
            if (s.has(a, b) && !seen[d.idx(a, b)]) {
                seen[d.idx(a, b)] = 1;
                stack.emplace_back(a, b);
            }
        }
    }
    return reached == n;
}

/// Copy of the domain with the given cells removed from the mask.
inline GridDomain restrict_domain(const GridDomain& domain, const GridSubset& removed) {
    GridDomain d = domain;
    for (size_t k = 0; k < d.mask.size(); ++k)
        if (removed.cells[k]) d.mask[k] = 0;
    if (d.mask_count() == 0) throw NoRoomForPair("nothing left after removing the set");
    return d;
}

namespace detail {

inline GridSubset reparent(const GridSubset& s, const GridDomain& parent) {
    GridSubset out;
    out.parent = &parent;
    out.cells = s.cells;
    return out;
}

inline double pair_ratio(const GridSubset& s, const NormDescriptor& norm, int passes) {
    return grid_set_perimeter_F(s, norm, passes) / s.measure();
}

}  // namespace detail

/// Alternately replaces each set by the Cheeger set of the domain minus the
/// other until the max ratio stops decreasing. The max ratio is nonincreasing
/// because each replacement minimizes over a family containing the old set.
inline CoupledCheegerResult adjust_couple(const GridDomain& domain, const SubsetPair& pair,
                                          const NormDescriptor& norm, const SolverConfig& cfg) {
    pair.validate_disjoint();
    cfg.validate();
    GridSubset e1 = pair.first, e2 = pair.second;
    double rho1 = detail::pair_ratio(e1, norm, cfg.passes);
    double rho2 = detail::pair_ratio(e2, norm, cfg.passes);
    bool adjusted = false;
    for (int it = 0; it < cfg.max_outer; ++it) {
        double before = std::max(rho1, rho2);
        GridDomain d2 = restrict_domain(domain, e1);
        CheegerResult c2 = solve_h1(d2, norm, cfg);
        if (c2.h1 <= rho2) {
            e2 = detail::reparent(c2.set, domain);
            rho2 = c2.h1;
        }
        GridDomain d1 = restrict_domain(domain, e2);
        CheegerResult c1 = solve_h1(d1, norm, cfg);
        if (c1.h1 <= rho1) {
            e1 = detail::reparent(c1.set, domain);
            rho1 = c1.h1;
        }
        if (before - std::max(rho1, rho2) < cfg.tol) {
            adjusted = true;
            break;
        }
    }
    if (!adjusted) throw NonConvergence("couple adjustment did not settle");
    CoupledCheegerResult res;
    res.pair.first = e1;
    res.pair.second = e2;
    res.rho1 = rho1;
    res.rho2 = rho2;
    res.h2 = std::max(rho1, rho2);
    res.adjusted = true;
    res.connected1 = subset_is_connected(e1);
    res.connected2 = subset_is_connected(e2);
    return res;
}

/// Exhaustive min-max over all disjoint nonempty pairs of mask cells.
inline CoupledCheegerResult brute_force_h2(const GridDomain& domain, const NormDescriptor& norm,
                                           int passes = kDefaultSmoothingPasses) {
    domain.validate();
    auto cells = detail::mask_cell_list(domain);
    int N = int(cells.size());
    if (N > 12) throw TooLarge("brute_force_h2 limited to 12 cells");
    if (N < 2) throw NoRoomForPair("need two cells for a pair");
    detail::SubsetPerimeter per(domain, cells, norm, passes);
    const double h2cell = domain.h * domain.h;
    uint32_t full = (1u << N) - 1;
    std::vector<double> ratio(full + 1, 0.0);
    for (uint32_t bits = 1; bits <= full; ++bits)
        ratio[bits] = per.eval(bits) / (double(__builtin_popcount(bits)) * h2cell);
    double best = 1e300;
    uint32_t bestA = 0, bestB = 0;
    for (uint32_t A = 1; A <= full; ++A) {
        uint32_t comp = full & ~A;
        for (uint32_t B = comp; B != 0; B = (B - 1) & comp) {
            if (B <= A) continue;
            double v = std::max(ratio[A], ratio[B]);
            if (v < best) {
                best = v;
                bestA = A;
                bestB = B;
            }
        }
    }
    CoupledCheegerResult res;
    res.pair.first = detail::subset_from_bits(domain, cells, bestA);
    res.pair.second = detail::subset_from_bits(domain, cells, bestB);
    res.rho1 = detail::pair_ratio(res.pair.first, norm, passes);
    res.rho2 = detail::pair_ratio(res.pair.second, norm, passes);
    res.h2 = std::max(res.rho1, res.rho2);
    res.connected1 = subset_is_connected(res.pair.first);
    res.connected2 = subset_is_connected(res.pair.second);
    // 1-adjusted iff each ratio equals the Cheeger constant of the domain
    // minus the other set
    try {
        double c1 = brute_force_h1(restrict_domain(domain, res.pair.second), norm, passes).h1;
        double c2 = brute_force_h1(restrict_domain(domain, res.pair.first), norm, passes).h1;
        res.adjusted = res.rho1 <= c1 + 1e-12 && res.rho2 <= c2 + 1e-12;
    } catch (const Error&) {
        res.adjusted = false;
    }
    return res;
}

/// Farthest-point sample of mask cell centers in the F° gauge, starting from
/// the cell deepest inside the domain.
inline std::vector<std::pair<int, int>> farthest_seeds(const GridDomain& domain,
                                                       const NormDescriptor& norm, int count) {
    GridFunction bd = boundary_distance(domain, norm);
    std::vector<std::pair<int, int>> cells = detail::mask_cell_list(domain);
    std::vector<std::pair<int, int>> seeds;
    double bestd = -1.0;
    std::pair<int, int> first{};
    for (auto [i, j] : cells)
        if (bd.at(i, j) > bestd) {
            bestd = bd.at(i, j);
            first = {i, j};
        }
    seeds.push_back(first);
    std::vector<double> mind(cells.size(), 1e300);
    while (int(seeds.size()) < count && seeds.size() < cells.size()) {
        auto [si, sj] = seeds.back();
        double sx = domain.cx(si), sy = domain.cy(sj);
        double far_d = -1.0;
        std::pair<int, int> far{};
        for (size_t k = 0; k < cells.size(); ++k) {
            auto [i, j] = cells[k];
            double d = norm.polar_eval(Vec(domain.cx(i) - sx, domain.cy(j) - sy));
            mind[k] = std::min(mind[k], d);
            if (mind[k] > far_d) {
                far_d = mind[k];
                far = cells[k];
            }
        }
        if (far_d <= 0.0) break;
        seeds.push_back(far);
    }
    return seeds;
}

/// Voronoi split of the mask between two seed cells in the F° gauge.
inline SubsetPair voronoi_pair(const GridDomain& domain, const NormDescriptor& norm,
                               std::pair<int, int> s1, std::pair<int, int> s2) {
    SubsetPair p;
    p.first = GridSubset::empty(domain);
    p.second = GridSubset::empty(domain);
    double x1 = domain.cx(s1.first), y1 = domain.cy(s1.second);
    double x2 = domain.cx(s2.first), y2 = domain.cy(s2.second);
    for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i) {
            if (!domain.inside(i, j)) continue;
            double d1 = norm.polar_eval(Vec(domain.cx(i) - x1, domain.cy(j) - y1));
            double d2 = norm.polar_eval(Vec(domain.cx(i) - x2, domain.cy(j) - y2));
            if (d1 <= d2)
                p.first.cells[domain.idx(i, j)] = 1;
            else
                p.second.cells[domain.idx(i, j)] = 1;
        }
    return p;
}

/// Second Cheeger constant: heuristic upper bound from (i) the Cheeger set
/// plus the Cheeger set of the remainder, adjusted to a fixed point, and
/// (ii) multi-seed restarts from far-apart Voronoi splits. Masks of at most
/// 12 cells are solved exactly by enumeration.
inline CoupledCheegerResult solve_h2(const GridDomain& domain, const NormDescriptor& norm,
                                     const SolverConfig& cfg) {
    domain.validate();
    cfg.validate();
    if (domain.mask_count() < 2) throw NoRoomForPair("domain cannot host a disjoint pair");
    if (domain.mask_count() <= 12) return brute_force_h2(domain, norm, cfg.passes);

    CoupledCheegerResult best;
    best.h2 = 1e300;
    auto consider = [&](const SubsetPair& init) {
        try {
            CoupledCheegerResult cand = adjust_couple(domain, init, norm, cfg);
            if (cand.h2 < best.h2) best = cand;
        } catch (const Error&) {
        }
    };

    CheegerResult c1 = solve_h1(domain, norm, cfg);
    // the discrete min-max over pairs is bounded below by the discrete h1, so
    // a couple whose max ratio reaches h1 is already optimal
    auto optimal = [&]() { return best.h2 <= c1.h1 + cfg.tol; };
    auto comps = subset_components(c1.set);
    if (comps.size() >= 2) {
        // a disconnected Cheeger set already carries a disjoint couple
        SubsetPair init;
        init.first = comps[0];
        init.second = comps[1];
        consider(init);
        if (optimal()) return best;
    }
    try {
        GridDomain rest = restrict_domain(domain, c1.set);
        CheegerResult c2 = solve_h1(rest, norm, cfg);
        SubsetPair init;
        init.first = c1.set;
        init.second = detail::reparent(c2.set, domain);
        consider(init);
    } catch (const Error&) {
    }

    auto seeds = farthest_seeds(domain, norm, std::max(2, cfg.seeds));
    int tried = 0;
    for (size_t a = 0; a < seeds.size() && tried < cfg.seeds; ++a)
        for (size_t b = a + 1; b < seeds.size() && tried < cfg.seeds; ++b) {
            ++tried;
            SubsetPair vp = voronoi_pair(domain, norm, seeds[a], seeds[b]);
            if (vp.first.count() == 0 || vp.second.count() == 0) continue;
            consider(vp);
        }
    if (best.h2 >= 1e300) throw NoRoomForPair("no feasible disjoint couple found");
    return best;
}

/// The provable lower bounds attached to every h2 report.
inline LowerBounds lower_bounds(const GridDomain& domain, const NormDescriptor& norm, double h1) {
    LowerBounds lb;
    lb.from_h1 = h1;
    double kappa = wulff_unit_measure(norm);
    double vol = domain.measure();
    double n = double(norm.n);
    lb.from_volume = n * std::pow(2.0 * kappa / vol, 1.0 / n);
    // two disjoint Wulff shapes of measure |Omega|/2 each: radius r with
    // kappa r^n = |Omega|/2, and their h2 equals n/r
    double r = std::pow(vol / (2.0 * kappa), 1.0 / n);
    lb.from_two_wulff = n / r;
    return lb;
}

struct KPartitionResult {
    double hk = 0.0;
    std::vector<GridSubset> sets;
    std::vector<double> ratios;
    double lower_bound = 0.0;  // n (k kappa_n / |Omega|)^{1/n}
};

/// Greedy k-set extension of the pair search plus adjustment sweeps.
inline KPartitionResult solve_hk(const GridDomain& domain, const NormDescriptor& norm, int k,
                                 const SolverConfig& cfg) {
    if (k < 2) throw ConfigError("solve_hk needs k >= 2");
    domain.validate();
    cfg.validate();
    CoupledCheegerResult pair = solve_h2(domain, norm, cfg);
    std::vector<GridSubset> sets{pair.pair.first, pair.pair.second};
    std::vector<double> ratios{pair.rho1, pair.rho2};
    while (int(sets.size()) < k) {
        GridDomain rest = domain;
        for (const GridSubset& s : sets)
            for (size_t c = 0; c < rest.mask.size(); ++c)
                if (s.cells[c]) rest.mask[c] = 0;
        if (rest.mask_count() == 0) {
            // the current sets tile the whole mask; if one of them is
            // disconnected, peel a component off into a set of its own
            // (adjustment sweeps below re-optimize both halves)
            bool split = false;
            for (size_t i = 0; i < sets.size() && !split; ++i) {
                std::vector<GridSubset> comps = subset_components(sets[i]);
                if (comps.size() < 2) continue;
                sets[i] = comps[0];
                ratios[i] = detail::pair_ratio(comps[0], norm, cfg.passes);
                sets.push_back(comps[1]);
                ratios.push_back(detail::pair_ratio(comps[1], norm, cfg.passes));
                split = true;
            }
            if (!split) throw NoRoomForPair("no room for another set");
            continue;
        }
        CheegerResult c = solve_h1(rest, norm, cfg);
        sets.push_back(detail::reparent(c.set, domain));
        ratios.push_back(c.h1);
    }
    for (int sweep = 0; sweep < 3; ++sweep) {
        double before = *std::max_element(ratios.begin(), ratios.end());
        for (size_t i = 0; i < sets.size(); ++i) {
            GridDomain rest = domain;
            for (size_t l = 0; l < sets.size(); ++l) {
                if (l == i) continue;
                for (size_t c = 0; c < rest.mask.size(); ++c)
                    if (sets[l].cells[c]) rest.mask[c] = 0;
            }
            if (rest.mask_count() == 0) continue;
            CheegerResult c = solve_h1(rest, norm, cfg);
            if (c.h1 <= ratios[i]) {
                sets[i] = detail::reparent(c.set, domain);
                ratios[i] = c.h1;
            }
        }
        if (before - *std::max_element(ratios.begin(), ratios.end()) < cfg.tol) break;
    }
    KPartitionResult res;
    res.sets = sets;
    res.ratios = ratios;
    res.hk = *std::max_element(ratios.begin(), ratios.end());
    double kappa = wulff_unit_measure(norm);
    double n = double(norm.n);
    res.lower_bound = n * std::pow(double(k) * kappa / domain.measure(), 1.0 / n);
    return res;
}

}  // namespace wulfflab
