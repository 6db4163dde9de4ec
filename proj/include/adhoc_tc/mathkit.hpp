#pragma once

// Special functions, adaptive quadrature and bracketed root finding.
//
// Everything here is a pure function of its arguments. The special functions
// lean on <cmath> and Boost.Math for the raw evaluation; inverses are then
// polished with Newton steps so that the defining residual is met.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

#include "adhoc_tc/errors.hpp"

namespace adhoc_tc::math {

struct ToleranceSpec {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_iter = 200;

    void validate() const {
        if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
        if (!(abs_tol > 0.0)) throw DomainError("abs_tol must be positive");
        if (max_iter < 1) throw DomainError("max_iter must be at least 1");
    }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Standard normal

inline double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Q(z) = P(Z > z) for Z ~ N(0,1).
inline double std_normal_ccdf(double z) {
    detail::require_finite(z, "z");
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// Inverse of Q on (0,1).
inline double std_normal_ccdf_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("Q^-1 needs p in (0,1)");
    double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    // Polish on Q(z) - p; Q' = -pdf. Two steps is plenty from erfc_inv's start.
    for (int i = 0; i < 3; ++i) {
        const double pdf = std_normal_pdf(z);
        if (pdf <= 0.0) break;
        const double step = (std_normal_ccdf(z) - p) / pdf;
        z += step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

// ---------------------------------------------------------------------------
// Gamma family

inline double gamma_fn(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("gamma_fn needs a > 0");
    return std::tgamma(a);
}

/// Non-normalised upper incomplete gamma: integral of v^(a-1) e^-v over [x, inf).
inline double upper_incomplete_gamma(double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("upper_incomplete_gamma needs a > 0");
    if (!(x >= 0.0)) throw DomainError("upper_incomplete_gamma needs x >= 0");
    if (x == 0.0) return std::tgamma(a);
    if (std::isinf(x)) return 0.0;
    return boost::math::tgamma(a, x);
}

/// Solves upper_incomplete_gamma(a, x) = y for x >= 0, with 0 < y <= Gamma(a).
inline double upper_incomplete_gamma_inv(double a, double y) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("upper_incomplete_gamma_inv needs a > 0");
    const double full = std::tgamma(a);
    if (!(y > 0.0) || y > full * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
        throw DomainError("upper_incomplete_gamma_inv needs y in (0, Gamma(a)]");
    if (y >= full) return 0.0;
    double x = boost::math::gamma_q_inv(a, y / full);
    for (int i = 0; i < 4 && x > 0.0; ++i) {
        // d/dx Gamma(a,x) = -x^(a-1) e^-x
        const double slope = -std::exp((a - 1.0) * std::log(x) - x);
        if (slope == 0.0) break;
        const double step = (boost::math::tgamma(a, x) - y) / slope;
        const double next = x - step;
        x = next > 0.0 ? next : 0.5 * x;
        if (std::abs(step) <= 1e-16 * x) break;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Lambert W, lower branch

inline double lambert_w_m1(double x) {
    constexpr double branch = -1.0 / std::numbers::e;
    if (!(x < 0.0) || x < branch * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
        throw DomainError("lambert_w_m1 needs x in [-1/e, 0)");
    if (x <= branch) return -1.0;
    double w = boost::math::lambert_wm1(x);
    // Halley polish on w e^w - x, skipped at the branch point where f' vanishes.
    for (int i = 0; i < 3; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double fp = ew * (w + 1.0);
        if (fp == 0.0 || f == 0.0) break;
        const double fpp = ew * (w + 2.0);
        const double step = f / (fp - 0.5 * f * fpp / fp);
        if (!std::isfinite(step)) break;
        const double next = w - step;
        if (next > -1.0) break;
        w = next;
        if (std::abs(step) <= 1e-16 * std::abs(w)) break;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7/15) quadrature

namespace detail {

// Kronrod abscissae (descending), Kronrod weights, Gauss weights (odd nodes).
inline constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    double value, error;
    std::size_t piece;
};

// One K15 estimate with the QUADPACK error heuristic.
template <class G>
std::pair<double, double> gk15(const G& g, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = g(center);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = g(center - dx);
        f2[j] = g(center + dx);
        const double sum = f1[j] + f2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }
    const double mean = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    const double scale = std::abs(half);
    resk *= half;
    resabs *= scale;
    resasc *= scale;
    double err = std::abs((resk - resg * half));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    return {resk, err};
}

// A finite or (semi-)infinite piece mapped onto a finite parameter interval.
struct Piece {
    enum class Kind { Finite, UpperInf, LowerInf, BothInf } kind;
    double lo, hi;

    double u_lo() const { return kind == Kind::BothInf ? -1.0 : (kind == Kind::Finite ? lo : 0.0); }
    double u_hi() const { return kind == Kind::Finite ? hi : 1.0; }

    template <class F>
    double eval(const F& f, double u) const {
        switch (kind) {
            case Kind::Finite:
                return f(u);
            case Kind::UpperInf: {
                const double s = 1.0 - u;
                return f(lo + u / s) / (s * s);
            }
            case Kind::LowerInf: {
                const double s = 1.0 - u;
                return f(hi - u / s) / (s * s);
            }
            case Kind::BothInf: {
                const double s = 1.0 - u * u;
                return f(u / s) * (1.0 + u * u) / (s * s);
            }
        }
        return 0.0;
    }
};

inline Piece make_piece(double lo, double hi) {
    const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) return {Piece::Kind::BothInf, lo, hi};
    if (hi_inf) return {Piece::Kind::UpperInf, lo, hi};
    if (lo_inf) return {Piece::Kind::LowerInf, lo, hi};
    return {Piece::Kind::Finite, lo, hi};
}

}  // namespace detail

/// Integrates f across consecutive breakpoints (the first and last may be
/// infinite). Interior breakpoints are where f has kinks or jumps; the
/// refinement never straddles them.
template <class F>
double integrate_pieces(const F& f, std::span<const double> points, ToleranceSpec tol = {}) {
    tol.validate();
    if (points.size() < 2) throw DomainError("integrate needs at least two breakpoints");
    std::vector<detail::Piece> pieces;
    double sign = 1.0;
    std::vector<double> pts(points.begin(), points.end());
    if (pts.front() > pts.back()) {
        std::reverse(pts.begin(), pts.end());
        sign = -1.0;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (std::isnan(pts[i]) || std::isnan(pts[i + 1]) || pts[i] > pts[i + 1])
            throw DomainError("integrate breakpoints must be ordered");
        if (pts[i] == pts[i + 1]) continue;
        if (std::isinf(pts[i]) && pts[i] > 0) throw DomainError("integrate: lower limit is +inf");
        pieces.push_back(detail::make_piece(pts[i], pts[i + 1]));
    }
    if (pieces.empty()) return 0.0;

    std::vector<detail::Segment> segs;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& pc = pieces[k];
        auto g = [&](double u) { return pc.eval(f, u); };
        auto [v, e] = detail::gk15(g, pc.u_lo(), pc.u_hi());
        segs.push_back({pc.u_lo(), pc.u_hi(), v, e, k});
    }

    auto totals = [&segs] {
        double v = 0.0, e = 0.0;
        for (const auto& s : segs) {
            v += s.value;
            e += s.error;
        }
        return std::pair{v, e};
    };

    for (int iter = 0;; ++iter) {
        auto [value, error] = totals();
        if (!std::isfinite(value)) throw NumericError("integrate: non-finite integrand", value);
        if (error <= std::max(tol.abs_tol, tol.rel_tol * std::abs(value))) return sign * value;
        if (iter >= tol.max_iter) {
            std::ostringstream msg;
            msg << "integrate: no convergence after " << tol.max_iter
                << " refinements (estimate " << value << ", error " << error << ")";
            throw NumericError(msg.str(), sign * value);
        }
        auto worst = std::max_element(segs.begin(), segs.end(),
                                      [](const auto& x, const auto& y) { return x.error < y.error; });
        const detail::Segment s = *worst;
        const auto& pc = pieces[s.piece];
        auto g = [&](double u) { return pc.eval(f, u); };
        const double mid = 0.5 * (s.a + s.b);
        auto [v1, e1] = detail::gk15(g, s.a, mid);
        auto [v2, e2] = detail::gk15(g, mid, s.b);
        *worst = {s.a, mid, v1, e1, s.piece};
        segs.push_back({mid, s.b, v2, e2, s.piece});
    }
}

/// Integral of f over [lower, upper]; either limit may be infinite.
template <class F>
double integrate(const F& f, double lower, double upper, ToleranceSpec tol = {}) {
    const std::array<double, 2> pts{lower, upper};
    return integrate_pieces(f, pts, tol);
}

// ---------------------------------------------------------------------------
// Root finding

/// Brent's method on a sign-changing bracket. Returns r with |f(r)| <= abs_tol
/// or a bracket no wider than rel_tol * |r|.
template <class F>
double find_root_monotone(const F& f, double lo, double hi, ToleranceSpec tol = {}) {
    tol.validate();
    if (!(std::isfinite(lo) && std::isfinite(hi))) throw BracketError("root bracket must be finite");
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (std::isnan(fa) || std::isnan(fb)) throw BracketError("root bracket endpoint evaluates to NaN");
    if (std::abs(fa) <= tol.abs_tol) return a;
    if (std::abs(fb) <= tol.abs_tol) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        std::ostringstream msg;
        msg << "no sign change on [" << lo << ", " << hi << "]: f = " << fa << ", " << fb;
        throw BracketError(msg.str());
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double c = b, fc = fb, d = b - a, e = d;
    for (int iter = 0; iter < std::max(tol.max_iter, 1); ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol.rel_tol * std::abs(b) +
                            std::numeric_limits<double>::denorm_min();
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || std::abs(fb) <= tol.abs_tol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
        fb = f(b);
    }
    throw NumericError("find_root_monotone: iteration limit reached", b);
}

}  // namespace adhoc_tc::math
