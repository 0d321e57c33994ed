#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "wulfflab/errors.hpp"
#include "wulfflab/grid.hpp"
#include "wulfflab/gridfun.hpp"
#include "wulfflab/norms.hpp"

namespace wulfflab {

struct Point {
    double x = 0.0, y = 0.0;
};

/// Simple polygon, counterclockwise, positive area.
struct Polygon {
    std::vector<Point> vertices;
};

inline double polygon_measure(const Polygon& poly) {
    size_t m = poly.vertices.size();
    if (m < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");
    double a = 0.0;
    for (size_t k = 0; k < m; ++k) {
        const Point& p = poly.vertices[k];
        const Point& q = poly.vertices[(k + 1) % m];
        a += p.x * q.y - q.x * p.y;
    }
    a *= 0.5;
    if (a <= 0.0) throw DegeneratePolygon("polygon area must be positive (counterclockwise)");
    return a;
}

inline double polygon_euclidean_perimeter(const Polygon& poly) {
    size_t m = poly.vertices.size();
    if (m < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");
    double s = 0.0;
    for (size_t k = 0; k < m; ++k) {
        const Point& p = poly.vertices[k];
        const Point& q = poly.vertices[(k + 1) % m];
        s += std::hypot(q.x - p.x, q.y - p.y);
    }
    return s;
}

/// Sum over edges of edge_length * F(outward unit normal).
inline double polygon_perimeter_F(const Polygon& poly, const NormDescriptor& norm) {
    size_t m = poly.vertices.size();
    if (m < 3) throw DegeneratePolygon("polygon needs at least 3 vertices");
    polygon_measure(poly);
    double s = 0.0;
    for (size_t k = 0; k < m; ++k) {
        const Point& p = poly.vertices[k];
        const Point& q = poly.vertices[(k + 1) % m];
        double ex = q.x - p.x, ey = q.y - p.y;
        double len = std::hypot(ex, ey);
        if (len == 0.0) continue;
        // CCW boundary: outward normal is the edge rotated clockwise
        s += len * norm.eval(Vec(ey / len, -ex / len));
    }
    return s;
}

inline bool polygon_is_convex(const Polygon& poly) {
    size_t m = poly.vertices.size();
    if (m < 3) return false;
    for (size_t k = 0; k < m; ++k) {
        const Point& a = poly.vertices[k];
        const Point& b = poly.vertices[(k + 1) % m];
        const Point& c = poly.vertices[(k + 2) % m];
        double cr = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if (cr < -1e-12) return false;
    }
    return true;
}

inline bool point_in_polygon(const Polygon& poly, double x, double y) {
    bool in = false;
    size_t m = poly.vertices.size();
    for (size_t k = 0, l = m - 1; k < m; l = k++) {
        const Point& p = poly.vertices[k];
        const Point& q = poly.vertices[l];
        if ((p.y > y) != (q.y > y) && x < (q.x - p.x) * (y - p.y) / (q.y - p.y) + p.x) in = !in;
    }
    return in;
}

inline GridDomain make_polygon_domain(const Polygon& poly, double h, int pad = 8) {
    polygon_measure(poly);
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const Point& p : poly.vertices) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    return domain_from_predicate(x0, y0, x1, y1, h,
                                 [&](double x, double y) { return point_in_polygon(poly, x, y); },
                                 pad);
}

namespace detail {

/// min over lambda in [0,1] of F°(x - (a + lambda (b-a))); convex in lambda.
inline double gauge_dist_to_segment(const NormDescriptor& norm, double px, double py,
                                    const Point& a, const Point& b) {
    double ex = b.x - a.x, ey = b.y - a.y;
    auto val = [&](double t) {
        return norm.polar_eval(Vec(px - a.x - t * ex, py - a.y - t * ey));
    };
    double lo = 0.0, hi = 1.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = val(c), fd = val(d);
    for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = val(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = val(d);
        }
    }
    return std::min({val(0.5 * (lo + hi)), val(0.0), val(1.0)});
}

}  // namespace detail

/// d_F(x, boundary of poly) = min over edges of min F°(x - y), y on the edge.
inline double polygon_boundary_distance_F(const Polygon& poly, const NormDescriptor& norm,
                                          double x, double y) {
    size_t m = poly.vertices.size();
    double best = 1e300;
    for (size_t k = 0; k < m; ++k)
        best = std::min(best, detail::gauge_dist_to_segment(norm, x, y, poly.vertices[k],
                                                            poly.vertices[(k + 1) % m]));
    return best;
}

/// Gauge distance field to a grid subset: zero on the subset, elsewhere the
/// minimum of F°(x - y) over boundary points of the subset. The boundary is
/// sampled at face midpoints between subset cells and their complement, which
/// halves the cell-center quantization error. Exact brute force over all
/// boundary points.
inline GridFunction anisotropic_distance(const GridDomain& domain, const GridSubset& target,
                                         const NormDescriptor& norm) {
    target.validate();
    if (target.count() == 0) throw EmptyTarget("distance to empty set");
    std::vector<std::pair<double, double>> bpts;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i) {
            if (!target.has(i, j)) continue;
            for (int k = 0; k < 4; ++k) {
                int a = i + di[k], b = j + dj[k];
                bool nbr_in = a >= 0 && b >= 0 && a < domain.nx && b < domain.ny &&
                              target.has(a, b);
                if (!nbr_in)
                    bpts.emplace_back(0.5 * (domain.cx(i) + domain.cx(i) + di[k] * domain.h),
                                      0.5 * (domain.cy(j) + domain.cy(j) + dj[k] * domain.h));
            }
        }
    GridFunction dist = GridFunction::zeros(domain);
    for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i) {
            if (target.has(i, j)) {
                dist.at(i, j) = 0.0;
                continue;
            }
            double x = domain.cx(i), y = domain.cy(j);
            double best = 1e300;
            for (const auto& [bx, by] : bpts)
                best = std::min(best, norm.polar_eval(Vec(x - bx, y - by)));
            dist.at(i, j) = best;
        }
    return dist;
}

/// Gauge distance to the domain boundary, defined on mask cells (zero off mask):
/// distance to the face midpoints separating mask cells from non-mask cells.
inline GridFunction boundary_distance(const GridDomain& domain, const NormDescriptor& norm) {
    GridSubset outside = GridSubset::empty(domain);
    // complement of the mask within the lattice; validate() is skipped because
    // these cells are deliberately outside the mask
    for (size_t k = 0; k < outside.cells.size(); ++k)
        outside.cells[k] = domain.mask[k] ? 0 : 1;
    std::vector<std::pair<double, double>> bpts;
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i) {
            if (!domain.inside(i, j)) continue;
            for (int k = 0; k < 4; ++k) {
                if (!domain.inside(i + di[k], j + dj[k]))
                    bpts.emplace_back(domain.cx(i) + 0.5 * di[k] * domain.h,
                                      domain.cy(j) + 0.5 * dj[k] * domain.h);
            }
        }
    if (bpts.empty()) throw EmptyTarget("mask has no boundary");
    GridFunction dist = GridFunction::zeros(domain);
    for (int j = 0; j < domain.ny; ++j)
        for (int i = 0; i < domain.nx; ++i) {
            if (!domain.inside(i, j)) continue;
            double x = domain.cx(i), y = domain.cy(j);
            double best = 1e300;
            for (const auto& [bx, by] : bpts)
                best = std::min(best, norm.polar_eval(Vec(x - bx, y - by)));
            dist.at(i, j) = best;
        }
    return dist;
}

struct StripRow {
    double eps = 0.0;
    double ratio = 0.0;  // |E^eps \ E| / eps
};

/// Outer-strip volume ratios |E^eps \ E| / eps; the ratio approaches the
/// anisotropic perimeter as eps decreases while staying well above h.
inline std::vector<StripRow> strip_volume_check(const GridSubset& s, const NormDescriptor& norm,
                                                const std::vector<double>& eps_list) {
    for (double e : eps_list)
        if (e < 2.0 * s.parent->h) throw EpsilonUnresolvable("eps below 2h");
    GridFunction dist = anisotropic_distance(*s.parent, s, norm);
    std::vector<StripRow> out;
    const double cell = s.parent->h * s.parent->h;
    for (double e : eps_list) {
        int cnt = 0;
        for (int j = 0; j < s.parent->ny; ++j)
            for (int i = 0; i < s.parent->nx; ++i)
                if (!s.has(i, j) && dist.at(i, j) <= e) ++cnt;
        out.push_back({e, double(cnt) * cell / e});
    }
    return out;
}

/// Cheeger constant of a convex planar body by the inner-set method: the
/// unique t with |{x : d_F(x, boundary) >= 1/t}| = kappa_2 / t^2.
/// Valid for convex planar domains; reported side by side with the grid
/// solver, never asserted as ground truth for anisotropic norms.
inline double convex_planar_h1_oracle(const Polygon& poly, const NormDescriptor& norm,
                                      int resolution = 480) {
    if (!polygon_is_convex(poly)) throw NotConvex("oracle requires a convex polygon");
    double area = polygon_measure(poly);
    double kappa = wulff_unit_measure(norm);
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const Point& p : poly.vertices) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    int mx = resolution, my = resolution;
    double hx = (x1 - x0) / mx, hy = (y1 - y0) / my;
    std::vector<double> dist(size_t(mx) * size_t(my), -1.0);
    for (int j = 0; j < my; ++j)
        for (int i = 0; i < mx; ++i) {
            double x = x0 + (i + 0.5) * hx, y = y0 + (j + 0.5) * hy;
            if (point_in_polygon(poly, x, y))
                dist[size_t(j) * mx + i] = polygon_boundary_distance_F(poly, norm, x, y);
        }
    // fractional area of {dist >= c}: linear interpolation inside cells whose
    // center is within one cell width of the level, slope from F(grad d) = 1
    auto inner_area = [&](double c) {
        double acc = 0.0;
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i) {
                double d = dist[size_t(j) * mx + i];
                if (d < 0.0) continue;
                // local gradient magnitude of d in Euclidean terms lies in
                // [1/b, 1/a]; estimate from neighbors when available
                double g = 1.0 / norm.a;
                auto nb = [&](int a2, int b2) -> double {
                    if (a2 < 0 || b2 < 0 || a2 >= mx || b2 >= my) return -1.0;
                    return dist[size_t(b2) * mx + a2];
                };
                double dl = nb(i - 1, j), dr = nb(i + 1, j), db = nb(i, j - 1), da = nb(i, j + 1);
                if (dl >= 0.0 && dr >= 0.0 && db >= 0.0 && da >= 0.0) {
                    double gx = (dr - dl) / (2.0 * hx), gy = (da - db) / (2.0 * hy);
                    double gg = std::hypot(gx, gy);
                    if (gg > 1e-9) g = gg;
                }
                double w = g * std::max(hx, hy);
                double frac = 0.5 + (d - c) / std::max(w, 1e-300);
                acc += std::clamp(frac, 0.0, 1.0) * hx * hy;
            }
        return acc;
    };
    double t_lo = 2.0 * std::sqrt(kappa / area) * 0.999;
    double t_hi = 4.0 * polygon_perimeter_F(poly, norm) / area;
    auto g = [&](double t) { return inner_area(1.0 / t) - kappa / (t * t); };
    double glo = g(t_lo), ghi = g(t_hi);
    if (glo > 0.0 || ghi < 0.0) throw BisectionFailure("oracle bracket does not straddle zero");
    for (int it = 0; it < 100; ++it) {
        double tm = 0.5 * (t_lo + t_hi);
        double gm = g(tm);
        if (gm >= 0.0)
            t_hi = tm;
        else
            t_lo = tm;
        if (t_hi - t_lo < 1e-10 * t_hi) break;
    }
    return 0.5 * (t_lo + t_hi);
}

}  // namespace wulfflab
