#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "wulfflab/io.hpp"

using namespace wulfflab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("wulfflab_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("norm descriptors round trip through json") {
    SymMat A;
    A.n = 2;
    A.m[0][0] = 2.0;
    A.m[1][1] = 1.0;
    A.m[0][1] = A.m[1][0] = 0.5;
    for (const NormDescriptor& nm :
         {NormDescriptor::euclidean(2), NormDescriptor::quadratic(A),
          NormDescriptor::lq(3.0, {1.0, 2.0})}) {
        NormDescriptor back = parse_norm(norm_to_json(nm));
        CHECK(back.kind == nm.kind);
        Rng rng(64);
        for (int s = 0; s < 50; ++s) {
            Vec xi = rng.vec(2);
            CHECK(back.eval(xi) == Catch::Approx(nm.eval(xi)));
        }
    }
}

TEST_CASE("bad norm specs are rejected with config errors") {
    CHECK_THROWS_AS(parse_norm(json{{"kind", "nosuch"}}), ConfigError);
    CHECK_THROWS_AS(parse_norm(json{{"q", 3.0}}), ConfigError);
    json asym{{"kind", "quadratic"}, {"A", {{1.0, 0.5}, {0.0, 1.0}}}};
    CHECK_THROWS_AS(parse_norm(asym), ConfigError);
}

TEST_CASE("domain specs") {
    json rect{{"h", 0.125}, {"rect", {0.0, 0.0, 1.0, 1.0}}};
    GridDomain d = parse_domain(rect);
    CHECK(d.measure() == Catch::Approx(1.0).epsilon(0.01));
    json wulff{{"h", 0.0625},
               {"wulff", {{"r", 0.5}, {"norm", {{"kind", "euclidean"}}}}}};
    GridDomain dw = parse_domain(wulff);
    CHECK(dw.measure() == Catch::Approx(M_PI * 0.25).epsilon(0.05));
    json missing{{"rect", {0.0, 0.0, 1.0, 1.0}}};
    CHECK_THROWS_AS(parse_domain(missing), ConfigError);
}

TEST_CASE("pgm round trip preserves the mask") {
    TempDir tmp;
    NormDescriptor ne = NormDescriptor::euclidean(2);
    GridDomain d = make_wulff_domain(ne, 0.4, 1.0 / 24);
    write_subset_pgm(tmp.file("mask.pgm"), GridSubset::full(d));
    PgmImage img = read_pgm(tmp.file("mask.pgm"));
    REQUIRE(img.nx == d.nx);
    REQUIRE(img.ny == d.ny);
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
            CHECK((img.pixels[size_t(j) * size_t(d.nx) + size_t(i)] != 0) == bool(d.mask[d.idx(i, j)]));
    // and back through the domain parser
    json spec{{"h", 1.0 / 24}, {"pgm", tmp.file("mask.pgm")}};
    GridDomain back = parse_domain(spec, ".");
    CHECK(back.mask_count() == d.mask_count());
}

TEST_CASE("config parsing and validation") {
    SolverConfig cfg = parse_config(json{{"tol", 1e-5}, {"seeds", 4},
                                         {"projection_mode", "gauge_rescale"}});
    CHECK(cfg.tol == 1e-5);
    CHECK(cfg.seeds == 4);
    CHECK(cfg.projection_mode == ProjectionMode::gauge_rescale);
    CHECK_THROWS_AS(parse_config(json{{"projection_mode", "bogus"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"tol", -1.0}}), ConfigError);
}

TEST_CASE("tabular and figure writers produce stable bytes") {
    TempDir tmp;
    std::vector<std::vector<double>> rows{{1.5, 2.25}, {1.2, 3.5}};
    write_csv(tmp.file("a.csv"), {"p", "v"}, rows);
    write_csv(tmp.file("b.csv"), {"p", "v"}, rows);
    CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
    CHECK(slurp(tmp.file("a.csv")) == "p,v\n1.5,2.25\n1.2,3.5\n");
    SvgSeries s{"series", "#1f6fb2", false, {{1.0, 2.0}, {2.0, 3.0}}};
    write_svg_plot(tmp.file("a.svg"), "t", "x", "y", {s});
    write_svg_plot(tmp.file("b.svg"), "t", "x", "y", {s});
    CHECK(slurp(tmp.file("a.svg")) == slurp(tmp.file("b.svg")));
    CHECK(slurp(tmp.file("a.svg")).find("<svg") == 0);
}

TEST_CASE("format_double is locale independent and round trips") {
    CHECK(format_double(1.75) == "1.75");
    CHECK(format_double(0.1) == "0.1");
    double v = 5.783185962947;
    CHECK(std::stod(format_double(v)) == Catch::Approx(v).epsilon(1e-11));
}
