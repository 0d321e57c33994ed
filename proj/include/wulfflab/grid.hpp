#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "wulfflab/errors.hpp"
#include "wulfflab/norms.hpp"

namespace wulfflab {

/// Rectangular lattice of square cells with an admissibility mask.
/// Cells touching the lattice boundary are always outside the mask, so
/// extension by zero across the boundary is well defined.
struct GridDomain {
    int nx = 0, ny = 0;
    double h = 1.0;
    double ox = 0.0, oy = 0.0;
    std::vector<uint8_t> mask;

    size_t idx(int i, int j) const { return size_t(j) * size_t(nx) + size_t(i); }
    bool inside(int i, int j) const {
        return i >= 0 && j >= 0 && i < nx && j < ny && mask[idx(i, j)] != 0;
    }
    double cx(int i) const { return ox + (double(i) + 0.5) * h; }
    double cy(int j) const { return oy + (double(j) + 0.5) * h; }

    int mask_count() const {
        int c = 0;
        for (uint8_t m : mask) c += (m != 0);
        return c;
    }
    double measure() const { return double(mask_count()) * h * h; }

    void validate() const {
        if (nx < 3 || ny < 3) throw ConfigError("grid too small");
        if (h <= 0.0) throw ConfigError("grid spacing must be positive");
        if (mask.size() != size_t(nx) * size_t(ny)) throw ConfigError("mask size mismatch");
        if (mask_count() < 1) throw ConfigError("mask has no interior cell");
        for (int i = 0; i < nx; ++i)
            if (mask[idx(i, 0)] || mask[idx(i, ny - 1)])
                throw ConfigError("mask touches lattice boundary");
        for (int j = 0; j < ny; ++j)
            if (mask[idx(0, j)] || mask[idx(nx - 1, j)])
                throw ConfigError("mask touches lattice boundary");
    }
};

/// Subset of the mask cells of a GridDomain.
struct GridSubset {
    const GridDomain* parent = nullptr;
    std::vector<uint8_t> cells;

    bool has(int i, int j) const { return cells[parent->idx(i, j)] != 0; }
    int count() const {
        int c = 0;
        for (uint8_t m : cells) c += (m != 0);
        return c;
    }
    double measure() const { return double(count()) * parent->h * parent->h; }

    void validate() const {
        if (!parent) throw ConfigError("subset has no parent domain");
        if (cells.size() != parent->mask.size()) throw ConfigError("subset size mismatch");
        for (size_t k = 0; k < cells.size(); ++k)
            if (cells[k] && !parent->mask[k]) throw ConfigError("subset cell outside domain mask");
    }

    static GridSubset empty(const GridDomain& d) {
        GridSubset s;
        s.parent = &d;
        s.cells.assign(d.mask.size(), 0);
        return s;
    }
    static GridSubset full(const GridDomain& d) {
        GridSubset s;
        s.parent = &d;
        s.cells = d.mask;
        return s;
    }
};

/// Scalar field on a GridDomain, identically zero outside the mask.
struct GridFunction {
    const GridDomain* domain = nullptr;
    std::vector<double> values;

    static GridFunction zeros(const GridDomain& d) {
        GridFunction f;
        f.domain = &d;
        f.values.assign(d.mask.size(), 0.0);
        return f;
    }
    static GridFunction indicator(const GridSubset& s) {
        GridFunction f = zeros(*s.parent);
        for (size_t k = 0; k < s.cells.size(); ++k) f.values[k] = s.cells[k] ? 1.0 : 0.0;
        return f;
    }

    void clamp_to_mask() {
        for (size_t k = 0; k < values.size(); ++k)
            if (!domain->mask[k]) values[k] = 0.0;
    }

    double& at(int i, int j) { return values[domain->idx(i, j)]; }
    double at(int i, int j) const { return values[domain->idx(i, j)]; }

    /// Superlevel set {u > s} intersected with the mask.
    GridSubset superlevel(double s) const {
        GridSubset out = GridSubset::empty(*domain);
        for (size_t k = 0; k < values.size(); ++k)
            out.cells[k] = (domain->mask[k] && values[k] > s) ? 1 : 0;
        return out;
    }
};

/// Vector field (one 2-vector per cell) used as the TV dual variable.
struct DualField {
    const GridDomain* domain = nullptr;
    std::vector<double> sx, sy;

    static DualField zeros(const GridDomain& d) {
        DualField f;
        f.domain = &d;
        f.sx.assign(d.mask.size(), 0.0);
        f.sy.assign(d.mask.size(), 0.0);
        return f;
    }

    double max_polar(const NormDescriptor& norm) const {
        double m = 0.0;
        for (size_t k = 0; k < sx.size(); ++k)
            m = std::max(m, norm.polar_eval2(sx[k], sy[k]));
        return m;
    }
};

/// Builds a padded domain whose mask is {cells whose center satisfies pred}
/// inside the box [x0,x1] x [y0,y1]; `pad` empty cells surround the box.
inline GridDomain domain_from_predicate(double x0, double y0, double x1, double y1, double h,
                                        const std::function<bool(double, double)>& pred,
                                        int pad = 8) {
    if (h <= 0.0 || x1 <= x0 || y1 <= y0) throw ConfigError("bad domain box");
    GridDomain d;
    d.h = h;
    int cx = int(std::ceil((x1 - x0) / h - 1e-12));
    int cy = int(std::ceil((y1 - y0) / h - 1e-12));
    d.nx = cx + 2 * pad;
    d.ny = cy + 2 * pad;
    d.ox = x0 - pad * h;
    d.oy = y0 - pad * h;
    d.mask.assign(size_t(d.nx) * size_t(d.ny), 0);
    for (int j = pad; j < pad + cy; ++j)
        for (int i = pad; i < pad + cx; ++i)
            if (pred(d.cx(i), d.cy(j))) d.mask[d.idx(i, j)] = 1;
    d.validate();
    return d;
}

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
inline GridDomain make_rect_domain(double x0, double y0, double x1, double y1, double h,
                                   int pad = 8) {
    return domain_from_predicate(x0, y0, x1, y1, h,
                                 [](double, double) { return true; }, pad);
}

/// Discretized Wulff shape {F°(x - c) < r}.
inline GridDomain make_wulff_domain(const NormDescriptor& norm, double r, double h, int pad = 8,
                                    double ccx = 0.0, double ccy = 0.0) {
    if (r <= 0.0) throw ConfigError("wulff radius must be positive");
    // half-width of the bounding box of {F° < r}: F°(v) >= |v| / b implies |v| <= b r
    double hw = norm.b * r * 1.05 + h;
    return domain_from_predicate(ccx - hw, ccy - hw, ccx + hw, ccy + hw, h,
                                 [&](double x, double y) {
                                     return norm.polar_eval(Vec(x - ccx, y - ccy)) < r;
                                 },
                                 pad);
}

/// Two disjoint Wulff shapes of radii r1, r2 separated by `gap` along the x axis.
inline GridDomain make_two_wulff_domain(const NormDescriptor& norm, double r1, double r2,
                                        double gap, double h, int pad = 8) {
    if (r1 <= 0.0 || r2 <= 0.0 || gap <= 0.0) throw ConfigError("bad two-wulff parameters");
    double w1 = norm.b * r1 * 1.05, w2 = norm.b * r2 * 1.05;
    double c1x = 0.0, c2x = w1 + gap + w2;
    double hw = std::max(w1, w2) + h;
    return domain_from_predicate(
        c1x - w1 - h, -hw, c2x + w2 + h, hw, h,
        [&](double x, double y) {
            return norm.polar_eval(Vec(x - c1x, y)) < r1 ||
                   norm.polar_eval(Vec(x - c2x, y)) < r2;
        },
        pad);
}

/// Random connected blob of exactly `target_cells` cells, grown cell by cell.
inline GridDomain make_random_blob_domain(int target_cells, double h, Rng& rng, int pad = 8) {
    if (target_cells < 1) throw ConfigError("need at least one cell");
    int side = target_cells + 2;
    GridDomain d;
    d.h = h;
    d.nx = side + 2 * pad;
    d.ny = side + 2 * pad;
    d.ox = 0.0;
    d.oy = 0.0;
    d.mask.assign(size_t(d.nx) * size_t(d.ny), 0);
    int ci = d.nx / 2, cj = d.ny / 2;
    d.mask[d.idx(ci, cj)] = 1;
    std::vector<std::pair<int, int>> frontier;
    auto push_nbrs = [&](int i, int j) {
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            int a = i + di[k], b = j + dj[k];
            if (a > pad && b > pad && a < d.nx - pad - 1 && b < d.ny - pad - 1 &&
                !d.mask[d.idx(a, b)])
                frontier.emplace_back(a, b);
        }
    };
    push_nbrs(ci, cj);
    int placed = 1;
    while (placed < target_cells && !frontier.empty()) {
        size_t pick = size_t(rng.next_u64() % frontier.size());
        auto [a, b] = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        if (d.mask[d.idx(a, b)]) continue;
        d.mask[d.idx(a, b)] = 1;
        ++placed;
        push_nbrs(a, b);
    }
    d.validate();
    return d;
}

}  // namespace wulfflab
