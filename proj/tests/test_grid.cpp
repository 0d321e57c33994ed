#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wulfflab/geometry.hpp"
#include "wulfflab/grid.hpp"

using namespace wulfflab;

TEST_CASE("rect domain measure and boundary ring") {
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 16);
    CHECK(d.measure() == Catch::Approx(1.0).epsilon(0.01));
    CHECK_NOTHROW(d.validate());
    // boundary ring of the lattice must be outside the mask
    for (int i = 0; i < d.nx; ++i) {
        CHECK(!d.inside(i, 0));
        CHECK(!d.inside(i, d.ny - 1));
    }
}

TEST_CASE("wulff domain measure matches kappa r^n") {
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridDomain d = make_wulff_domain(ne, 0.5, 1.0 / 64);
    CHECK(d.measure() == Catch::Approx(M_PI * 0.25).epsilon(0.02));
}

TEST_CASE("two wulff domain has two components and additive measure") {
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridDomain d = make_two_wulff_domain(ne, 0.5, 0.3, 0.2, 1.0 / 64);
    CHECK(d.measure() == Catch::Approx(M_PI * (0.25 + 0.09)).epsilon(0.02));
}

TEST_CASE("polygon measure oracles") {
    Polygon sq;
    sq.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_measure(sq) == Catch::Approx(1.0));
    Polygon tri;
    tri.vertices = {{0, 0}, {1, 0}, {0, 1}};
    CHECK(polygon_measure(tri) == Catch::Approx(0.5));
    Polygon gon;  // regular 64-gon inscribed in the unit circle
    for (int k = 0; k < 64; ++k)
        gon.vertices.push_back({std::cos(2.0 * M_PI * k / 64), std::sin(2.0 * M_PI * k / 64)});
    // oracle: (1/2) m sin(2 pi / m)
    CHECK(polygon_measure(gon) == Catch::Approx(0.5 * 64 * std::sin(2.0 * M_PI / 64)));
    CHECK(polygon_measure(gon) == Catch::Approx(M_PI).epsilon(0.002));
}

TEST_CASE("polygon anisotropic perimeter") {
    NormDescriptor ne = NormDescriptor::euclidean(2);
    SymMat A;
    A.n = 2;
    A.m[0][0] = 4.0;
    A.m[1][1] = 1.0;
    NormDescriptor nq = NormDescriptor::quadratic(A);
    Polygon sq;
    sq.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_perimeter_F(sq, ne) == Catch::Approx(4.0));
    // horizontal edges have normal (0,±1) with F=1, vertical edges (±1,0) with F=2
    CHECK(polygon_perimeter_F(sq, nq) == Catch::Approx(6.0));
    // 256-gon approximating the quadratic Wulff boundary vs n kappa_n
    Polygon wulff;
    for (int k = 0; k < 256; ++k) {
        double th = 2.0 * M_PI * k / 256;
        // boundary of {F° = 1}: scale the direction to the unit polar sphere
        Vec dir(std::cos(th), std::sin(th));
        double r = 1.0 / nq.polar_eval(dir);
        wulff.vertices.push_back({r * dir[0], r * dir[1]});
    }
    double kappa = wulff_unit_measure(nq);
    CHECK(polygon_perimeter_F(wulff, nq) == Catch::Approx(2.0 * kappa).epsilon(0.005));
}

TEST_CASE("anisotropic distance field") {
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridDomain d = make_rect_domain(-0.5, -0.5, 0.5, 0.5, 1.0 / 32);
    GridSubset target = GridSubset::empty(d);
    int ci = -1, cj = -1;
    double bestd = 1e300;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            if (d.inside(i, j)) {
                double r = std::hypot(d.cx(i), d.cy(j));
                if (r < bestd) {
                    bestd = r;
                    ci = i;
                    cj = j;
                }
            }
    target.cells[d.idx(ci, cj)] = 1;
    GridFunction dist = anisotropic_distance(d, target, ne);
    double x0 = d.cx(ci), y0 = d.cy(cj);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            if (!d.inside(i, j)) continue;
            double exact = std::hypot(d.cx(i) - x0, d.cy(j) - y0);
            CHECK(dist.at(i, j) == Catch::Approx(exact).margin(3.0 * d.h));
        }
}

TEST_CASE("quadratic distance level sets are polar spheres") {
    SymMat A;
    A.n = 2;
    A.m[0][0] = 4.0;
    A.m[1][1] = 1.0;
    NormDescriptor nq = NormDescriptor::quadratic(A);
    GridDomain d = make_rect_domain(-1.0, -1.0, 1.0, 1.0, 1.0 / 24);
    GridSubset target = GridSubset::empty(d);
    int ci = d.nx / 2, cj = d.ny / 2;
    REQUIRE(d.inside(ci, cj));
    target.cells[d.idx(ci, cj)] = 1;
    GridFunction dist = anisotropic_distance(d, target, nq);
    double x0 = d.cx(ci), y0 = d.cy(cj);
    for (int j = 2; j < d.ny - 2; ++j)
        for (int i = 2; i < d.nx - 2; ++i) {
            if (!d.inside(i, j)) continue;
            Vec off(d.cx(i) - x0, d.cy(j) - y0);
            CHECK(dist.at(i, j) == Catch::Approx(nq.polar_eval(off)).margin(4.0 * d.h));
        }
}

TEST_CASE("boundary distance integral recovers the measure") {
    // sum_cells F(grad d_F) h^2 tends to |Omega| since F(grad d_F) = 1 a.e.
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridDomain d = make_rect_domain(0.0, 0.0, 1.0, 1.0, 1.0 / 64);
    GridFunction bd = boundary_distance(d, ne);
    GradOp G(d, 0);
    std::vector<double> gx, gy;
    G.apply(bd.values, gx, gy);
    double acc = 0.0;
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            if (d.inside(i, j)) acc += ne.eval2(gx[d.idx(i, j)], gy[d.idx(i, j)]);
    acc *= d.h * d.h;
    CHECK(acc == Catch::Approx(d.measure()).epsilon(0.05));
}

TEST_CASE("random blob domain is connected and sized") {
    Rng rng(7);
    for (int t = 0; t < 5; ++t) {
        int target = 5 + int(rng.next_u64() % 16);
        GridDomain d = make_random_blob_domain(target, 1.0, rng);
        CHECK(d.mask_count() == target);
        CHECK_NOTHROW(d.validate());
    }
}
