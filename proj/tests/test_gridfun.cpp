#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "wulfflab/gridfun.hpp"
#include "wulfflab/grid.hpp"

using namespace wulfflab;

namespace {

// Independent reimplementation of the discrete TV: smoothing passes done
// with explicit loops, forward differences written out longhand.
double naive_tv(const GridDomain& d, std::vector<double> u, const NormDescriptor& norm,
                int passes) {
    auto at = [&](const std::vector<double>& v, int i, int j) -> double {
        if (i < 0 || j < 0 || i >= d.nx || j >= d.ny) return 0.0;
        return v[size_t(j) * size_t(d.nx) + size_t(i)];
    };
    for (int p = 0; p < passes; ++p) {
        std::vector<double> t(u.size());
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                t[size_t(j) * size_t(d.nx) + size_t(i)] =
                    0.25 * (at(u, i - 1, j) + 2.0 * at(u, i, j) + at(u, i + 1, j));
        std::vector<double> s(u.size());
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                s[size_t(j) * size_t(d.nx) + size_t(i)] =
                    0.25 * (at(t, i, j - 1) + 2.0 * at(t, i, j) + at(t, i, j + 1));
        u = s;
    }
    double acc = 0.0;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            double gx = (at(u, i + 1, j) - at(u, i, j)) / d.h;
            double gy = (at(u, i, j + 1) - at(u, i, j)) / d.h;
            acc += norm.eval2(gx, gy);
        }
    return acc * d.h * d.h;
}

GridSubset block(const GridDomain& d, int i0, int j0, int w, int h) {
    GridSubset s = GridSubset::empty(d);
    for (int j = j0; j < j0 + h; ++j)
        for (int i = i0; i < i0 + w; ++i) s.cells[d.idx(i, j)] = 1;
    return s;
}

}  // namespace

TEST_CASE("tv_F matches a naive reimplementation") {
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 12);
    NormDescriptor ne = NormDescriptor::euclidean(2);
    NormDescriptor nl = NormDescriptor::lq(3.0, {1.0, 2.0});
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        GridFunction u = GridFunction::zeros(d);
        for (size_t k = 0; k < u.values.size(); ++k)
            if (d.mask[k]) u.values[k] = rng.uniform(-1.0, 1.0);
        for (int passes : {0, 1, 4}) {
            CHECK(tv_F(u, ne, passes) ==
                  Catch::Approx(naive_tv(d, u.values, ne, passes)).epsilon(1e-12));
            CHECK(tv_F(u, nl, passes) ==
                  Catch::Approx(naive_tv(d, u.values, nl, passes)).epsilon(1e-12));
        }
    }
}

TEST_CASE("tv_F basics") {
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 16);
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridFunction z = GridFunction::zeros(d);
    CHECK(tv_F(z, ne) == 0.0);
    Rng rng(5);
    GridFunction u = GridFunction::zeros(d);
    for (size_t k = 0; k < u.values.size(); ++k)
        if (d.mask[k]) u.values[k] = rng.uniform(-1.0, 1.0);
    GridFunction cu = u;
    for (double& v : cu.values) v *= -2.5;
    CHECK(tv_F(cu, ne) == Catch::Approx(2.5 * tv_F(u, ne)).epsilon(1e-12));
}

TEST_CASE("block perimeter with the plain stencil") {
    // with plain forward differences the euclidean TV of a k x k block is
    // (4k - 2 + sqrt 2) h: exactly one cell (the inside corner where both
    // forward differences jump at once) merges its two unit jumps into sqrt 2
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 16);
    NormDescriptor ne = NormDescriptor::euclidean(2);
    for (int k : {2, 3, 5}) {
        GridSubset s = block(d, 4, 4, k, k);
        double expect = (4.0 * k - 2.0 + std::sqrt(2.0)) * d.h;
        CHECK(grid_set_perimeter_F(s, ne, 0) == Catch::Approx(expect).epsilon(1e-12));
        CHECK(grid_set_perimeter_F(s, ne, 0) ==
              Catch::Approx(naive_tv(d, GridFunction::indicator(s).values, ne, 0)));
    }
}

TEST_CASE("smoothed stencil measures a disk within a few percent") {
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridDomain d = make_rect_domain(-0.5, -0.5, 0.5, 0.5, 1.0 / 256);
    GridSubset s = GridSubset::empty(d);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            if (d.inside(i, j) && std::hypot(d.cx(i), d.cy(j)) < 0.3) s.cells[d.idx(i, j)] = 1;
    double per = grid_set_perimeter_F(s, ne);
    CHECK(per == Catch::Approx(2.0 * M_PI * 0.3).epsilon(0.05));
}

TEST_CASE("adjoint is exact for the gradient operator") {
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 10);
    Rng rng(17);
    for (int passes : {0, 2, 4}) {
        GradOp G(d, passes);
        std::vector<double> u(d.mask.size()), vx(d.mask.size()), vy(d.mask.size());
        for (size_t k = 0; k < u.size(); ++k) {
            u[k] = rng.uniform(-1.0, 1.0);
            vx[k] = rng.uniform(-1.0, 1.0);
            vy[k] = rng.uniform(-1.0, 1.0);
        }
        std::vector<double> gx, gy, gt;
        G.apply(u, gx, gy);
        G.adjoint(vx, vy, gt);
        double lhs = 0.0, rhs = 0.0;
        for (size_t k = 0; k < u.size(); ++k) {
            lhs += gx[k] * vx[k] + gy[k] * vy[k];
            rhs += u[k] * gt[k];
        }
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-11));
        // operator norm bound |G u|^2 <= (8/h^2) |u|^2
        double gu = 0.0, uu = 0.0;
        for (size_t k = 0; k < u.size(); ++k) {
            gu += gx[k] * gx[k] + gy[k] * gy[k];
            uu += u[k] * u[k];
        }
        CHECK(gu <= G.op_norm_sq() * uu * (1.0 + 1e-12));
    }
}

TEST_CASE("dual gap is nonnegative and exact in the easy cases") {
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 12);
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridFunction z = GridFunction::zeros(d);
    DualField sig = DualField::zeros(d);
    CHECK(tv_F_dual_gap(z, sig, ne) == Catch::Approx(0.0).margin(1e-15));
    GridFunction u = GridFunction::indicator(block(d, 3, 3, 4, 4));
    CHECK(tv_F_dual_gap(u, sig, ne) == Catch::Approx(tv_F(u, ne)));
    // random feasible duals keep the gap nonnegative
    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        DualField s = DualField::zeros(d);
        for (size_t k = 0; k < s.sx.size(); ++k) {
            double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
            double f = ne.polar_eval2(a, b);
            if (f > 1.0) {
                a /= f;
                b /= f;
            }
            s.sx[k] = a;
            s.sy[k] = b;
        }
        CHECK(tv_F_dual_gap(u, s, ne) >= -1e-10);
    }
    // infeasible dual rejected
    DualField bad = DualField::zeros(d);
    for (size_t k = 0; k < bad.sx.size(); ++k) bad.sx[k] = 2.0;
    CHECK_THROWS_AS(tv_F_dual_gap(u, bad, ne), InfeasibleDual);
}

TEST_CASE("coarea layer cake") {
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 24);
    NormDescriptor ne = NormDescriptor::euclidean(2);
    // an indicator has one level set: gap is zero (blocks sit past the
    // 8-cell pad ring so the superlevel sets stay inside the mask)
    GridFunction chi = GridFunction::indicator(block(d, 12, 12, 8, 8));
    CoareaReport r0 = coarea_check(chi, ne, 16, 0);
    CHECK(r0.gap_rel == Catch::Approx(0.0).margin(1e-12));
    // tent function: layer integral approaches the TV as levels refine
    GridFunction tent = GridFunction::zeros(d);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            if (d.inside(i, j))
                tent.at(i, j) = std::max(
                    0.0, 1.0 - 2.0 * std::max(std::fabs(d.cx(i) - 0.5), std::fabs(d.cy(j) - 0.5)));
    CoareaReport rc = coarea_check(tent, ne, 256, 0);
    CHECK(std::fabs(rc.gap_rel) < 0.02);
    CoareaReport rfine = coarea_check(tent, ne, 1024, 0);
    CHECK(std::fabs(rfine.gap_rel) <= std::fabs(rc.gap_rel) + 1e-12);
    // two disjoint indicators with heights 1 and 2: layer cake gives
    // P(E1 u E2) + P(E2) exactly
    GridFunction two = GridFunction::zeros(d);
    GridSubset e1 = block(d, 10, 10, 4, 4), e2 = block(d, 20, 20, 5, 5);
    for (size_t k = 0; k < two.values.size(); ++k) {
        if (e1.cells[k]) two.values[k] = 1.0;
        if (e2.cells[k]) two.values[k] = 2.0;
    }
    GridSubset both = e1;
    for (size_t k = 0; k < both.cells.size(); ++k)
        both.cells[k] = uint8_t(e1.cells[k] | e2.cells[k]);
    double expect =
        grid_set_perimeter_F(both, ne, 0) * 1.0 + grid_set_perimeter_F(e2, ne, 0) * 1.0;
    CoareaReport r2 = coarea_check(two, ne, 2, 0);
    CHECK(r2.layer_integral == Catch::Approx(expect).epsilon(1e-12));
    CHECK(r2.tv == Catch::Approx(expect).epsilon(1e-12));
}
