#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wulfflab/errors.hpp"

namespace wulfflab {

/// Small dense vector, dimension 2 or 3.
struct Vec {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    int n = 2;

    Vec() = default;
    Vec(double a, double b) : x{a, b, 0.0}, n(2) {}
    Vec(double a, double b, double c) : x{a, b, c}, n(3) {}

    double& operator[](int i) { return x[static_cast<size_t>(i)]; }
    double operator[](int i) const { return x[static_cast<size_t>(i)]; }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += x[size_t(i)] * o.x[size_t(i)];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r[i] += o[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r[i] -= o[i];
        return r;
    }
    Vec operator*(double t) const {
        Vec r = *this;
        for (int i = 0; i < n; ++i) r[i] *= t;
        return r;
    }
};

/// Symmetric matrix stored row-major, used up to dimension 3.
struct SymMat {
    std::array<std::array<double, 3>, 3> m{};
    int n = 2;

    Vec apply(const Vec& v) const {
        Vec r;
        r.n = n;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += m[size_t(i)][size_t(j)] * v[j];
            r[i] = s;
        }
        return r;
    }

    double quad(const Vec& v) const { return v.dot(apply(v)); }

    SymMat inverse() const {
        SymMat r;
        r.n = n;
        if (n == 2) {
            double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if (det <= 0.0) throw Error("matrix not SPD");
            r.m[0][0] = m[1][1] / det;
            r.m[1][1] = m[0][0] / det;
            r.m[0][1] = r.m[1][0] = -m[0][1] / det;
        } else {
            double a = m[0][0], b = m[0][1], c = m[0][2];
            double d = m[1][1], e = m[1][2], f = m[2][2];
            double det = a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
            if (det <= 0.0) throw Error("matrix not SPD");
            r.m[0][0] = (d * f - e * e) / det;
            r.m[0][1] = r.m[1][0] = (c * e - b * f) / det;
            r.m[0][2] = r.m[2][0] = (b * e - c * d) / det;
            r.m[1][1] = (a * f - c * c) / det;
            r.m[1][2] = r.m[2][1] = (b * c - a * e) / det;
            r.m[2][2] = (a * d - b * b) / det;
        }
        return r;
    }
};

/// Deterministic, platform-stable RNG (splitmix64 core).
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0,1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Random nonzero direction-ish vector with components in [-1,1].
    Vec vec(int n, double scale = 1.0) {
        while (true) {
            Vec v;
            v.n = n;
            for (int i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
            if (v.norm() > 1e-3) return v * scale;
        }
    }

  private:
    uint64_t state_;
};

enum class NormKind { euclidean, quadratic, lq };

inline const char* to_string(NormKind k) {
    switch (k) {
        case NormKind::euclidean: return "euclidean";
        case NormKind::quadratic: return "quadratic";
        case NormKind::lq: return "lq";
    }
    return "?";
}

/// A smooth even 1-homogeneous gauge F together with its polar F°.
/// Immutable after construction; all evaluators are pure.
class NormDescriptor {
  public:
    NormKind kind = NormKind::euclidean;
    int n = 2;
    /// Equivalence constants: a*|xi| <= F(xi) <= b*|xi| (min/max of F on the sphere).
    double a = 1.0;
    double b = 1.0;

    static NormDescriptor euclidean(int dim = 2) {
        NormDescriptor d;
        d.kind = NormKind::euclidean;
        d.n = dim;
        d.finalize();
        return d;
    }

    static NormDescriptor quadratic(const SymMat& A) {
        NormDescriptor d;
        d.kind = NormKind::quadratic;
        d.n = A.n;
        d.A_ = A;
        d.Ainv_ = A.inverse();
        d.finalize();
        return d;
    }

    static NormDescriptor lq(double q, const std::vector<double>& weights) {
        if (q < 2.0) throw Error("lq exponent must be >= 2");
        NormDescriptor d;
        d.kind = NormKind::lq;
        d.n = int(weights.size());
        if (d.n < 2 || d.n > 3) throw Error("lq dimension must be 2 or 3");
        d.q_ = q;
        d.qc_ = q / (q - 1.0);
        for (int i = 0; i < d.n; ++i) {
            double w = weights[size_t(i)];
            if (w <= 0.0) throw Error("lq weights must be positive");
            d.w_[size_t(i)] = w;
            d.wpolar_[size_t(i)] = std::pow(w, -d.qc_ / q);
        }
        d.finalize();
        return d;
    }

    double eval(const Vec& xi) const {
        switch (kind) {
            case NormKind::euclidean: return xi.norm();
            case NormKind::quadratic: return std::sqrt(std::max(0.0, A_.quad(xi)));
            case NormKind::lq: return lq_eval(xi, q_, w_);
        }
        return 0.0;
    }

    /// Cheap componentwise form for hot loops in dimension 2.
    double eval2(double gx, double gy) const {
        switch (kind) {
            case NormKind::euclidean: return std::hypot(gx, gy);
            case NormKind::quadratic:
                return std::sqrt(std::max(0.0, A_.m[0][0] * gx * gx + 2.0 * A_.m[0][1] * gx * gy +
                                                   A_.m[1][1] * gy * gy));
            case NormKind::lq:
                return std::pow(w_[0] * std::pow(std::fabs(gx), q_) +
                                    w_[1] * std::pow(std::fabs(gy), q_),
                                1.0 / q_);
        }
        return 0.0;
    }

    Vec grad(const Vec& xi) const {
        if (xi.norm() == 0.0) throw ZeroVector("grad of F at xi = 0");
        Vec g;
        g.n = n;
        switch (kind) {
            case NormKind::euclidean: {
                double f = xi.norm();
                for (int i = 0; i < n; ++i) g[i] = xi[i] / f;
                break;
            }
            case NormKind::quadratic: {
                double f = eval(xi);
                Vec ax = A_.apply(xi);
                for (int i = 0; i < n; ++i) g[i] = ax[i] / f;
                break;
            }
            case NormKind::lq: {
                double f = eval(xi);
                double s = std::pow(f, 1.0 - q_);
                for (int i = 0; i < n; ++i) {
                    double t = std::pow(std::fabs(xi[i]), q_ - 1.0);
                    g[i] = s * w_[size_t(i)] * t * (xi[i] < 0.0 ? -1.0 : (xi[i] > 0.0 ? 1.0 : 0.0));
                }
                break;
            }
        }
        return g;
    }

    double polar_eval(const Vec& v) const {
        switch (kind) {
            case NormKind::euclidean: return v.norm();
            case NormKind::quadratic: return std::sqrt(std::max(0.0, Ainv_.quad(v)));
            case NormKind::lq: return lq_eval(v, qc_, wpolar_);
        }
        return 0.0;
    }

    double polar_eval2(double vx, double vy) const {
        switch (kind) {
            case NormKind::euclidean: return std::hypot(vx, vy);
            case NormKind::quadratic:
                return std::sqrt(std::max(0.0, Ainv_.m[0][0] * vx * vx +
                                                   2.0 * Ainv_.m[0][1] * vx * vy +
                                                   Ainv_.m[1][1] * vy * vy));
            case NormKind::lq:
                return std::pow(wpolar_[0] * std::pow(std::fabs(vx), qc_) +
                                    wpolar_[1] * std::pow(std::fabs(vy), qc_),
                                1.0 / qc_);
        }
        return 0.0;
    }

    Vec polar_grad(const Vec& v) const {
        if (v.norm() == 0.0) throw ZeroVector("grad of F° at v = 0");
        Vec g;
        g.n = n;
        switch (kind) {
            case NormKind::euclidean: {
                double f = v.norm();
                for (int i = 0; i < n; ++i) g[i] = v[i] / f;
                break;
            }
            case NormKind::quadratic: {
                double f = polar_eval(v);
                Vec av = Ainv_.apply(v);
                for (int i = 0; i < n; ++i) g[i] = av[i] / f;
                break;
            }
            case NormKind::lq: {
                double f = polar_eval(v);
                double s = std::pow(f, 1.0 - qc_);
                for (int i = 0; i < n; ++i) {
                    double t = std::pow(std::fabs(v[i]), qc_ - 1.0);
                    g[i] = s * wpolar_[size_t(i)] * t *
                           (v[i] < 0.0 ? -1.0 : (v[i] > 0.0 ? 1.0 : 0.0));
                }
                break;
            }
        }
        return g;
    }

    /// Brute-force sup over sphere samples of <xi,v>/F(xi), golden-refined.
    /// Cross-checks the closed-form polar; also used for the duality involution test.
    double polar_eval_numeric(const Vec& v, int samples = 4096) const {
        if (v.norm() == 0.0) return 0.0;
        if (n == 2) {
            auto val = [&](double th) {
                Vec xi(std::cos(th), std::sin(th));
                return xi.dot(v) / eval(xi);
            };
            double best = -1e300, bestth = 0.0;
            for (int k = 0; k < samples; ++k) {
                double th = 2.0 * M_PI * (double(k) + 0.5) / double(samples);
                double f = val(th);
                if (f > best) {
                    best = f;
                    bestth = th;
                }
            }
            double lo = bestth - 2.0 * M_PI / samples, hi = bestth + 2.0 * M_PI / samples;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
            for (int it = 0; it < 80; ++it) {
                if (val(c) > val(d)) {
                    hi = d;
                } else {
                    lo = c;
                }
                c = hi - gr * (hi - lo);
                d = lo + gr * (hi - lo);
            }
            return val(0.5 * (lo + hi));
        }
        // dimension 3: coarse sphere scan plus local coordinate refinement
        int m = std::max(16, int(std::sqrt(double(samples))));
        double best = -1e300;
        Vec arg;
        for (int i = 0; i < m; ++i) {
            double z = -1.0 + 2.0 * (double(i) + 0.5) / m;
            double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            for (int j = 0; j < 2 * m; ++j) {
                double ph = 2.0 * M_PI * (double(j) + 0.5) / (2 * m);
                Vec xi(rho * std::cos(ph), rho * std::sin(ph), z);
                double f = xi.dot(v) / eval(xi);
                if (f > best) {
                    best = f;
                    arg = xi;
                }
            }
        }
        // Nelder-Mead-free polish: small coordinate descent on the sphere
        double step = 2.0 / m;
        for (int it = 0; it < 200; ++it) {
            bool moved = false;
            for (int i = 0; i < 3; ++i) {
                for (double s : {step, -step}) {
                    Vec t = arg;
                    t[i] += s;
                    double nrm = t.norm();
                    for (int k = 0; k < 3; ++k) t[k] /= nrm;
                    double f = t.dot(v) / eval(t);
                    if (f > best) {
                        best = f;
                        arg = t;
                        moved = true;
                    }
                }
            }
            if (!moved) step *= 0.5;
            if (step < 1e-10) break;
        }
        return best;
    }

    /// Hessian of F by central differences of grad, step 1e-5*|xi|.
    std::array<std::array<double, 3>, 3> hessian_fd(const Vec& xi) const {
        std::array<std::array<double, 3>, 3> H{};
        double step = 1e-5 * xi.norm();
        for (int j = 0; j < n; ++j) {
            Vec xp = xi, xm = xi;
            xp[j] += step;
            xm[j] -= step;
            Vec gp = grad(xp), gm = grad(xm);
            for (int i = 0; i < n; ++i) H[size_t(i)][size_t(j)] = (gp[i] - gm[i]) / (2.0 * step);
        }
        return H;
    }

    const SymMat& A() const { return A_; }
    const SymMat& Ainv() const { return Ainv_; }
    double lq_exponent() const { return q_; }
    double lq_conjugate() const { return qc_; }
    const std::array<double, 3>& lq_weights() const { return w_; }
    const std::array<double, 3>& lq_polar_weights() const { return wpolar_; }

  private:
    SymMat A_, Ainv_;
    double q_ = 2.0, qc_ = 2.0;
    std::array<double, 3> w_{1.0, 1.0, 1.0};
    std::array<double, 3> wpolar_{1.0, 1.0, 1.0};

    static double lq_eval(const Vec& v, double q, const std::array<double, 3>& w) {
        double s = 0.0;
        for (int i = 0; i < v.n; ++i) s += w[size_t(i)] * std::pow(std::fabs(v[i]), q);
        return std::pow(s, 1.0 / q);
    }

    void finalize() {
        if (n < 2 || n > 3) throw Error("dimension must be 2 or 3");
        // a = min F on sphere, b = max F on sphere
        double lo = 1e300, hi = -1e300;
        if (n == 2) {
            const int m = 4096;
            for (int k = 0; k < m; ++k) {
                double th = 2.0 * M_PI * k / m;
                double f = eval(Vec(std::cos(th), std::sin(th)));
                lo = std::min(lo, f);
                hi = std::max(hi, f);
            }
        } else {
            const int m = 128;
            for (int i = 0; i < m; ++i) {
                double z = -1.0 + 2.0 * (double(i) + 0.5) / m;
                double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
                for (int j = 0; j < 2 * m; ++j) {
                    double ph = 2.0 * M_PI * j / (2 * m);
                    double f = eval(Vec(rho * std::cos(ph), rho * std::sin(ph), z));
                    lo = std::min(lo, f);
                    hi = std::max(hi, f);
                }
            }
        }
        a = lo;
        b = hi;
    }
};

/// Residuals from the norm-calculus identity suite.
struct IdentityReport {
    double max_euler = 0.0;        // |gradF(xi)·xi - F(xi)| / F(xi)
    double max_polar_unit = 0.0;   // |F°(gradF(xi)) - 1|, |F(gradF°(xi)) - 1|
    double max_reconstruct = 0.0;  // eq:HH0 reconstruction, relative to |xi|
    double max_hessian = 0.0;      // |H(xi)·xi| / |xi|, H by central differences
    int samples = 0;
};

/// Checks the Euler identity, unit-polar identities, the gradient
/// reconstruction identity, and the zero-homogeneity relation H(xi)·xi = 0
/// on random nonzero samples.
inline IdentityReport verify_identities(const NormDescriptor& norm, int sample_count,
                                        uint64_t seed = 12345) {
    if (sample_count < 1) throw Error("sample_count must be >= 1");
    IdentityReport rep;
    rep.samples = sample_count;
    Rng rng(seed);
    for (int s = 0; s < sample_count; ++s) {
        Vec xi = rng.vec(norm.n, std::pow(10.0, rng.uniform(-2.0, 2.0)));
        double F = norm.eval(xi);
        Vec g = norm.grad(xi);
        Vec gp = norm.polar_grad(xi);
        rep.max_euler = std::max(rep.max_euler, std::fabs(g.dot(xi) - F) / F);
        rep.max_polar_unit = std::max(rep.max_polar_unit, std::fabs(norm.polar_eval(g) - 1.0));
        rep.max_polar_unit = std::max(rep.max_polar_unit, std::fabs(norm.eval(gp) - 1.0));
        Vec r1 = norm.grad(gp) * norm.polar_eval(xi);
        Vec r2 = norm.polar_grad(g) * F;
        rep.max_reconstruct = std::max(rep.max_reconstruct, (r1 - xi).norm() / xi.norm());
        rep.max_reconstruct = std::max(rep.max_reconstruct, (r2 - xi).norm() / xi.norm());
        auto H = norm.hessian_fd(xi);
        Vec hx;
        hx.n = norm.n;
        for (int i = 0; i < norm.n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < norm.n; ++j) acc += H[size_t(i)][size_t(j)] * xi[j];
            hx[i] = acc;
        }
        rep.max_hessian = std::max(rep.max_hessian, hx.norm() / xi.norm());
    }
    return rep;
}

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
inline void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(size_t(m), 0.0);
    weights.assign(size_t(m), 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(M_PI * (double(i) + 0.75) / (double(m) + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - double(j) * p2) / (double(j) + 1.0);
            }
            pp = double(m) * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[size_t(i)] = -x;
        nodes[size_t(m - 1 - i)] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[size_t(i)] = w;
        weights[size_t(m - 1 - i)] = w;
    }
}

}  // namespace detail

/// kappa_n = |{F° < 1}| by the polar-coordinate formula
/// kappa_n = (1/n) \int_{S^{n-1}} F°(w)^{-n} dw.
/// n=2: 4096-node periodic trapezoid; n=3: Gauss-Legendre x uniform product rule.
inline double wulff_unit_measure(const NormDescriptor& norm, int resolution = 4096) {
    if (norm.n == 2) {
        double s = 0.0;
        for (int k = 0; k < resolution; ++k) {
            double th = 2.0 * M_PI * k / resolution;
            double f = norm.polar_eval(Vec(std::cos(th), std::sin(th)));
            s += 1.0 / (f * f);
        }
        return 0.5 * s * (2.0 * M_PI / resolution);
    }
    int mz = std::max(16, resolution / 64);
    int mp = 2 * mz;
    std::vector<double> z, wz;
    detail::gauss_legendre(mz, z, wz);
    double s = 0.0;
    for (int i = 0; i < mz; ++i) {
        double rho = std::sqrt(std::max(0.0, 1.0 - z[size_t(i)] * z[size_t(i)]));
        for (int j = 0; j < mp; ++j) {
            double ph = 2.0 * M_PI * j / mp;
            double f = norm.polar_eval(Vec(rho * std::cos(ph), rho * std::sin(ph), z[size_t(i)]));
            s += wz[size_t(i)] * (2.0 * M_PI / mp) / (f * f * f);
        }
    }
    return s / 3.0;
}

/// |W_r| = kappa_n r^n.
inline double wulff_measure(const NormDescriptor& norm, double r, int resolution = 4096) {
    if (r <= 0.0) throw Error("wulff_measure: r must be positive");
    return wulff_unit_measure(norm, resolution) * std::pow(r, norm.n);
}

/// Anisotropic perimeter of W_r by boundary quadrature (dimension 2):
/// the boundary {F° = r} is sampled as a dense polygon and
/// sum_edges |e| * F(unit normal) is accumulated.
inline double wulff_perimeter(const NormDescriptor& norm, double r, int resolution = 16384) {
    if (r <= 0.0) throw Error("wulff_perimeter: r must be positive");
    if (norm.n != 2) throw Error("wulff_perimeter: boundary quadrature implemented for n=2");
    double per = 0.0;
    auto bpoint = [&](int k) {
        double th = 2.0 * M_PI * k / resolution;
        Vec w(std::cos(th), std::sin(th));
        double f = norm.polar_eval(w);
        return Vec(r * w[0] / f, r * w[1] / f);
    };
    Vec prev = bpoint(0);
    for (int k = 1; k <= resolution; ++k) {
        Vec cur = bpoint(k % resolution);
        double ex = cur[0] - prev[0], ey = cur[1] - prev[1];
        double len = std::hypot(ex, ey);
        if (len > 0.0) {
            // outward normal of a CCW edge
            Vec nu(ey / len, -ex / len);
            per += len * norm.eval(nu);
        }
        prev = cur;
    }
    return per;
}

}  // namespace wulfflab
