#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wulfflab/config.hpp"
#include "wulfflab/errors.hpp"
#include "wulfflab/geometry.hpp"
#include "wulfflab/grid.hpp"
#include "wulfflab/norms.hpp"

namespace wulfflab {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// ---- norms -----------------------------------------------------------------

inline NormDescriptor parse_norm(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("norm spec needs a 'kind' field");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") {
        int n = j.value("n", 2);
        return NormDescriptor::euclidean(n);
    }
    if (kind == "quadratic") {
        if (!j.contains("A")) throw ConfigError("quadratic norm needs matrix 'A'");
        auto rows = j.at("A");
        int n = int(rows.size());
        if (n < 2 || n > 3) throw ConfigError("matrix 'A' must be 2x2 or 3x3");
        SymMat A;
        A.n = n;
        for (int r = 0; r < n; ++r) {
            if (int(rows[size_t(r)].size()) != n) throw ConfigError("matrix 'A' must be square");
            for (int c = 0; c < n; ++c) A.m[size_t(r)][size_t(c)] = rows[size_t(r)][size_t(c)];
        }
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (std::fabs(A.m[size_t(r)][size_t(c)] - A.m[size_t(c)][size_t(r)]) > 1e-12)
                    throw ConfigError("matrix 'A' must be symmetric");
        return NormDescriptor::quadratic(A);
    }
    if (kind == "lq") {
        if (!j.contains("q")) throw ConfigError("lq norm needs exponent 'q'");
        std::vector<double> w = j.value("weights", std::vector<double>{1.0, 1.0});
        return NormDescriptor::lq(j.at("q").get<double>(), w);
    }
    throw ConfigError("unknown norm kind '" + kind + "'");
}

inline json norm_to_json(const NormDescriptor& norm) {
    json j;
    j["kind"] = to_string(norm.kind);
    j["n"] = norm.n;
    if (norm.kind == NormKind::quadratic) {
        json rows = json::array();
        for (int r = 0; r < norm.n; ++r) {
            json row = json::array();
            for (int c = 0; c < norm.n; ++c) row.push_back(norm.A().m[size_t(r)][size_t(c)]);
            rows.push_back(row);
        }
        j["A"] = rows;
    }
    if (norm.kind == NormKind::lq) {
        j["q"] = norm.lq_exponent();
        json w = json::array();
        for (int i = 0; i < norm.n; ++i) w.push_back(norm.lq_weights()[size_t(i)]);
        j["weights"] = w;
    }
    return j;
}

// ---- PGM P5 ----------------------------------------------------------------

inline void write_pgm(const std::string& path, int nx, int ny,
                      const std::vector<uint8_t>& pixels) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << "P5\n" << nx << " " << ny << "\n255\n";
    // rows top to bottom, matching image convention (j = ny-1 first)
    for (int j = ny - 1; j >= 0; --j)
        f.write(reinterpret_cast<const char*>(&pixels[size_t(j) * size_t(nx)]),
                std::streamsize(nx));
}

inline void write_subset_pgm(const std::string& path, const GridSubset& s) {
    std::vector<uint8_t> px(s.cells.size(), 0);
    for (size_t k = 0; k < s.cells.size(); ++k) px[k] = s.cells[k] ? 255 : 0;
    write_pgm(path, s.parent->nx, s.parent->ny, px);
}

inline void write_field_pgm(const std::string& path, const GridFunction& u) {
    double lo = 1e300, hi = -1e300;
    for (double v : u.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double span = (hi > lo) ? hi - lo : 1.0;
    std::vector<uint8_t> px(u.values.size(), 0);
    for (size_t k = 0; k < u.values.size(); ++k)
        px[k] = uint8_t(std::lround(255.0 * (u.values[k] - lo) / span));
    write_pgm(path, u.domain->nx, u.domain->ny, px);
}

struct PgmImage {
    int nx = 0, ny = 0;
    std::vector<uint8_t> pixels;  // row j=0 at bottom, as in GridDomain
};

inline PgmImage read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw ConfigError(path + " is not a binary PGM (P5)");
    auto next_token = [&]() {
        std::string t;
        while (f >> t) {
            if (t[0] == '#') {
                std::string rest;
                std::getline(f, rest);
                continue;
            }
            return t;
        }
        throw ConfigError("truncated PGM header in " + path);
    };
    PgmImage img;
    img.nx = std::stoi(next_token());
    img.ny = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (maxval <= 0 || maxval > 255) throw ConfigError("unsupported PGM maxval in " + path);
    f.get();
    std::vector<uint8_t> raw(size_t(img.nx) * size_t(img.ny));
    f.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (!f) throw ConfigError("truncated PGM data in " + path);
    img.pixels.resize(raw.size());
    for (int j = 0; j < img.ny; ++j)
        for (int i = 0; i < img.nx; ++i)
            img.pixels[size_t(j) * size_t(img.nx) + size_t(i)] =
                raw[size_t(img.ny - 1 - j) * size_t(img.nx) + size_t(i)];
    return img;
}

// ---- domains ---------------------------------------------------------------

inline Polygon parse_polygon(const json& j) {
    Polygon poly;
    for (const auto& pt : j) {
        if (pt.size() != 2) throw ConfigError("polygon vertices must be [x, y] pairs");
        poly.vertices.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    polygon_measure(poly);
    return poly;
}

/// Domain spec: an object with "h" plus exactly one of
///   "polygon": [[x,y],...]
///   "rect": [x0, y0, x1, y1]
///   "wulff": {"r": r, "norm": {...}} (optional "cx", "cy")
///   "two_wulff": {"r1":.., "r2":.., "gap":.., "norm": {...}}
///   "pgm": "mask.pgm" (h from this spec; 0 = outside, nonzero = inside)
inline GridDomain parse_domain(const json& j, const std::string& base_dir = ".") {
    if (!j.is_object()) throw ConfigError("domain spec must be an object");
    if (!j.contains("h")) throw ConfigError("domain spec needs grid spacing 'h'");
    double h = j.at("h").get<double>();
    int pad = j.value("pad", 8);
    if (j.contains("polygon")) return make_polygon_domain(parse_polygon(j.at("polygon")), h, pad);
    if (j.contains("rect")) {
        auto r = j.at("rect");
        if (r.size() != 4) throw ConfigError("'rect' must be [x0, y0, x1, y1]");
        return make_rect_domain(r[0], r[1], r[2], r[3], h, pad);
    }
    if (j.contains("wulff")) {
        const auto& w = j.at("wulff");
        NormDescriptor norm = parse_norm(w.at("norm"));
        return make_wulff_domain(norm, w.at("r").get<double>(), h, pad, w.value("cx", 0.0),
                                 w.value("cy", 0.0));
    }
    if (j.contains("two_wulff")) {
        const auto& w = j.at("two_wulff");
        NormDescriptor norm = parse_norm(w.at("norm"));
        return make_two_wulff_domain(norm, w.at("r1").get<double>(), w.at("r2").get<double>(),
                                     w.at("gap").get<double>(), h, pad);
    }
    if (j.contains("pgm")) {
        std::filesystem::path p(j.at("pgm").get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        PgmImage img = read_pgm(p.string());
        GridDomain d;
        d.nx = img.nx + 2;
        d.ny = img.ny + 2;
        d.h = h;
        d.ox = j.value("ox", 0.0) - h;
        d.oy = j.value("oy", 0.0) - h;
        d.mask.assign(size_t(d.nx) * size_t(d.ny), 0);
        for (int jj = 0; jj < img.ny; ++jj)
            for (int ii = 0; ii < img.nx; ++ii)
                d.mask[d.idx(ii + 1, jj + 1)] =
                    img.pixels[size_t(jj) * size_t(img.nx) + size_t(ii)] ? 1 : 0;
        d.validate();
        return d;
    }
    throw ConfigError("domain spec needs one of: polygon, rect, wulff, two_wulff, pgm");
}

// ---- config ----------------------------------------------------------------

inline SolverConfig parse_config(const json& j) {
    SolverConfig cfg;
    if (j.is_null()) return cfg;
    cfg.tol = j.value("tol", cfg.tol);
    cfg.inner_tol = j.value("inner_tol", cfg.inner_tol);
    cfg.max_outer = j.value("max_outer", cfg.max_outer);
    cfg.max_inner = j.value("max_inner", cfg.max_inner);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.passes = j.value("passes", cfg.passes);
    cfg.seeds = j.value("seeds", cfg.seeds);
    std::string pm = j.value("projection_mode", std::string("exact"));
    if (pm == "exact")
        cfg.projection_mode = ProjectionMode::exact;
    else if (pm == "gauge_rescale")
        cfg.projection_mode = ProjectionMode::gauge_rescale;
    else
        throw ConfigError("projection_mode must be 'exact' or 'gauge_rescale'");
    cfg.validate();
    return cfg;
}

// ---- tabular / figures -----------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path + " for writing");
    f << content;
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << "\n";
    }
    write_text_file(path, out.str());
}

struct SvgSeries {
    std::string label;
    std::string color = "#1f6fb2";
    bool dashed = false;
    std::vector<std::pair<double, double>> points;
};

/// Minimal hand-emitted SVG line plot with axes and a legend.
inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::vector<SvgSeries>& series) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    double padx = 0.06 * (x1 - x0), pady = 0.10 * (y1 - y0);
    x0 -= padx;
    x1 += padx;
    y0 -= pady;
    y1 += pady;
    const int W = 640, H = 420, ML = 64, MR = 16, MT = 36, MB = 44;
    auto px = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
        << H - MB << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = x0 + (x1 - x0) * k / 4.0;
        double yv = y0 + (y1 - y0) * k / 4.0;
        out << "<text x=\"" << format_double(px(xv)) << "\" y=\"" << H - MB + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << format_double(xv) << "</text>\n";
        out << "<text x=\"" << ML - 6 << "\" y=\"" << format_double(py(yv) + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(yv) << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 8
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    out << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
        << H / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    int legend_y = MT + 4;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"5,4\"";
        out << " points=\"";
        for (auto [x, y] : s.points)
            out << format_double(px(x)) << "," << format_double(py(y)) << " ";
        out << "\"/>\n";
        out << "<line x1=\"" << W - MR - 140 << "\" y1=\"" << legend_y << "\" x2=\""
            << W - MR - 116 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "")
            << "/>\n";
        out << "<text x=\"" << W - MR - 110 << "\" y=\"" << legend_y + 4
            << "\" font-size=\"11\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
    write_text_file(path, out.str());
}

inline void write_gridfunction_csv(const std::string& path, const GridFunction& u) {
    std::ostringstream out;
    out << "x,y,value\n";
    for (int j = 0; j < u.domain->ny; ++j)
        for (int i = 0; i < u.domain->nx; ++i)
            out << format_double(u.domain->cx(i)) << "," << format_double(u.domain->cy(j)) << ","
                << format_double(u.at(i, j)) << "\n";
    write_text_file(path, out.str());
}

}  // namespace wulfflab
