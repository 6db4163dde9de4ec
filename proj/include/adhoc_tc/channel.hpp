#pragma once

// Link-level models: fading gain Psi, transmitter-receiver distance D, and the
// received signal strength W = Psi * D^-alpha that drives threshold scheduling.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/expint.hpp>

#include "adhoc_tc/errors.hpp"
#include "adhoc_tc/mathkit.hpp"

namespace adhoc_tc {

struct ConstantFading {
    double psi = 1.0;
};

// sigma is the standard deviation of ln(Psi), in nats.
struct LognormalFading {
    double sigma = 1.0;
};

// Psi ~ Exp(1).
struct RayleighFading {};

using FadingModel = std::variant<ConstantFading, LognormalFading, RayleighFading>;

enum class SigmaUnit { Nats, Decibels };

inline LognormalFading lognormal_fading(double sigma, SigmaUnit unit = SigmaUnit::Nats) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("lognormal sigma must be positive");
    if (unit == SigmaUnit::Decibels) sigma *= std::numbers::ln10 / 10.0;
    return LognormalFading{sigma};
}

struct FixedDistance {
    double r = 1.0;
};

// Distance to the nearest point of a receiver PPP of intensity lambda_prime,
// drawn independently per link.
struct NearestNeighborDistance {
    double lambda_prime = 0.01;
};

using DistanceModel = std::variant<FixedDistance, NearestNeighborDistance>;

inline void validate(const FadingModel& f) {
    if (auto* c = std::get_if<ConstantFading>(&f); c && !(c->psi > 0.0 && std::isfinite(c->psi)))
        throw DomainError("psi must be positive");
    if (auto* l = std::get_if<LognormalFading>(&f); l && !(l->sigma > 0.0 && std::isfinite(l->sigma)))
        throw DomainError("lognormal sigma must be positive");
}

inline void validate(const DistanceModel& d) {
    if (auto* f = std::get_if<FixedDistance>(&d); f && !(f->r > 0.0 && std::isfinite(f->r)))
        throw DomainError("distance r must be positive");
    if (auto* n = std::get_if<NearestNeighborDistance>(&d);
        n && !(n->lambda_prime > 0.0 && std::isfinite(n->lambda_prime)))
        throw DomainError("lambda_prime must be positive");
}

class ChannelSpec {
public:
    ChannelSpec(double alpha, double beta, FadingModel fading, DistanceModel distance)
        : alpha_(alpha), beta_(beta), fading_(fading), distance_(distance) {
        if (!(alpha > 2.0) || !std::isfinite(alpha)) throw DomainError("alpha must exceed 2");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
        validate(fading_);
        validate(distance_);
        delta_ = 2.0 / alpha_;
        y_ = 1.0 / beta_;
    }

    double alpha() const { return alpha_; }
    double delta() const { return delta_; }
    double beta() const { return beta_; }
    double y() const { return y_; }
    const FadingModel& fading() const { return fading_; }
    const DistanceModel& distance() const { return distance_; }

    bool fixed_distance() const { return std::holds_alternative<FixedDistance>(distance_); }
    bool constant_fading() const { return std::holds_alternative<ConstantFading>(fading_); }

private:
    double alpha_, delta_, beta_, y_;
    FadingModel fading_;
    DistanceModel distance_;
};

struct NetworkSpec {
    double lambda = 0.01;

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive");
    }
};

enum class MomentSign { Plus, Minus };

// ---------------------------------------------------------------------------
// Fading primitives

/// E[Psi^s], s > -1.
inline double fading_moment(const FadingModel& f, double s) {
    if (auto* c = std::get_if<ConstantFading>(&f)) return std::pow(c->psi, s);
    if (auto* l = std::get_if<LognormalFading>(&f)) return std::exp(0.5 * s * s * l->sigma * l->sigma);
    if (!(s > -1.0)) throw DomainError("Rayleigh moment E[Psi^s] needs s > -1");
    return std::tgamma(1.0 + s);
}

/// P(Psi > s).
inline double fading_ccdf(const FadingModel& f, double s) {
    if (s <= 0.0) return 1.0;
    if (std::isinf(s)) return 0.0;
    if (auto* c = std::get_if<ConstantFading>(&f)) return s < c->psi ? 1.0 : 0.0;
    if (auto* l = std::get_if<LognormalFading>(&f)) return math::std_normal_ccdf(std::log(s) / l->sigma);
    return std::exp(-s);
}

/// E[Psi^m 1{Psi > s}] for m > -1 (Rayleigh) or any m (other models).
inline std::optional<double> fading_partial_moment(const FadingModel& f, double m, double s) {
    if (auto* c = std::get_if<ConstantFading>(&f)) return (s < c->psi) ? std::pow(c->psi, m) : 0.0;
    if (auto* l = std::get_if<LognormalFading>(&f)) {
        const double sg = l->sigma;
        if (s <= 0.0) return std::exp(0.5 * m * m * sg * sg);
        if (std::isinf(s)) return 0.0;
        return std::exp(0.5 * m * m * sg * sg) * math::std_normal_ccdf(std::log(s) / sg - m * sg);
    }
    if (std::isinf(s)) return 0.0;
    if (m > -1.0) return math::upper_incomplete_gamma(1.0 + m, std::max(s, 0.0));
    if (s <= 0.0) return std::nullopt;
    if (m == -1.0) return boost::math::expint(1, s);
    // Gamma(a, s) for a <= 0 via the integral itself.
    return math::integrate([m](double v) { return std::pow(v, m) * std::exp(-v); }, s, math::kInf);
}

/// E[h(Psi) | Psi > s]. psi_kink marks a point where h is not smooth (NaN if none).
template <class H>
double fading_conditional_expectation(const FadingModel& f, double s, const H& h, double psi_kink,
                                      math::ToleranceSpec tol) {
    if (auto* c = std::get_if<ConstantFading>(&f)) {
        if (!(s < c->psi)) throw DegenerateThresholdError("no fading mass above threshold");
        return h(c->psi);
    }
    if (auto* l = std::get_if<LognormalFading>(&f)) {
        const double sg = l->sigma;
        const double zk = psi_kink > 0.0 ? std::log(psi_kink) / sg : std::numeric_limits<double>::quiet_NaN();
        if (s <= 0.0) {
            auto g = [&](double z) {
                const double w = math::std_normal_pdf(z);
                return w > 0.0 ? h(std::exp(sg * z)) * w : 0.0;
            };
            std::vector<double> pts{-math::kInf};
            if (std::isfinite(zk)) pts.push_back(zk);
            pts.push_back(math::kInf);
            return math::integrate_pieces(g, pts, tol);
        }
        const double zs = std::log(s) / sg;
        const double q = math::std_normal_ccdf(zs);
        if (!(q > 0.0)) throw DegenerateThresholdError("no fading mass above threshold");
        const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(q);
        auto g = [&](double x) {
            const double z = zs + x;
            const double w = std::exp(log_norm - 0.5 * z * z);
            return w > 0.0 ? h(std::exp(sg * z)) * w : 0.0;
        };
        std::vector<double> pts{0.0};
        if (std::isfinite(zk) && zk > zs) pts.push_back(zk - zs);
        pts.push_back(math::kInf);
        return math::integrate_pieces(g, pts, tol);
    }
    // Rayleigh: memoryless, Psi | Psi > s  ~  s + Exp(1).
    const double lo = std::max(s, 0.0);
    if (std::isinf(lo)) throw DegenerateThresholdError("no fading mass above threshold");
    auto g = [&](double x) { return h(lo + x) * std::exp(-x); };
    std::vector<double> pts{0.0};
    if (psi_kink > lo && std::isfinite(psi_kink)) pts.push_back(psi_kink - lo);
    pts.push_back(math::kInf);
    return math::integrate_pieces(g, pts, tol);
}

// ---------------------------------------------------------------------------
// Moments of the channel

inline double frac_moment_psi(const ChannelSpec& spec, MomentSign sign) {
    const double s = sign == MomentSign::Plus ? spec.delta() : -spec.delta();
    return fading_moment(spec.fading(), s);
}

inline double mean_sq_distance(const ChannelSpec& spec) {
    if (auto* f = std::get_if<FixedDistance>(&spec.distance())) return f->r * f->r;
    return 1.0 / (std::numbers::pi * std::get<NearestNeighborDistance>(spec.distance()).lambda_prime);
}

inline double mean_distance(const ChannelSpec& spec) {
    if (auto* f = std::get_if<FixedDistance>(&spec.distance())) return f->r;
    return 0.5 / std::sqrt(std::get<NearestNeighborDistance>(spec.distance()).lambda_prime);
}

namespace detail {

inline double pi_lp(const ChannelSpec& spec) {
    return std::numbers::pi * std::get<NearestNeighborDistance>(spec.distance()).lambda_prime;
}

// D^alpha when u = pi lambda' D^2.
inline double d_pow_alpha(double u, double pl, double delta) { return std::pow(u / pl, 1.0 / delta); }

inline math::ToleranceSpec inner_tol(math::ToleranceSpec tol) {
    tol.rel_tol = std::min(tol.rel_tol, 1e-11);
    tol.abs_tol = std::min(tol.abs_tol, 1e-14);
    return tol;
}

}  // namespace detail

/// P(W > w) for w > 0.
inline double signal_ccdf(const ChannelSpec& spec, double w) {
    if (!(w > 0.0)) throw DomainError("signal_ccdf needs w > 0");
    if (std::isinf(w)) return 0.0;
    const double a = spec.alpha();
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance()))
        return fading_ccdf(spec.fading(), w * std::pow(fd->r, a));
    const double pl = detail::pi_lp(spec);
    const double dl = spec.delta();
    if (auto* c = std::get_if<ConstantFading>(&spec.fading()))
        return -std::expm1(-pl * std::pow(c->psi / w, dl));
    // Random Psi and random D: average the fading tail over u = pi lambda' D^2 ~ Exp(1).
    auto g = [&](double u) { return fading_ccdf(spec.fading(), w * detail::d_pow_alpha(u, pl, dl)) * std::exp(-u); };
    return math::integrate(g, 0.0, math::kInf, detail::inner_tol({}));
}

/// P(W > t) for t >= 0; equals 1 at t = 0.
inline double transmit_probability(const ChannelSpec& spec, double t) {
    if (!(t >= 0.0)) throw DomainError("threshold must be non-negative");
    return t == 0.0 ? 1.0 : signal_ccdf(spec, t);
}

/// t with P(W > t) = p.
inline double threshold_for_probability(const ChannelSpec& spec, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("threshold_for_probability needs p in (0,1)");
    const double a = spec.alpha();
    const double dl = spec.delta();
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance())) {
        const double ra = std::pow(fd->r, a);
        if (auto* l = std::get_if<LognormalFading>(&spec.fading()))
            return std::exp(l->sigma * math::std_normal_ccdf_inv(p)) / ra;
        if (std::holds_alternative<RayleighFading>(spec.fading())) return -std::log(p) / ra;
        throw DomainError("signal strength is deterministic; no threshold realizes p in (0,1)");
    }
    const double pl = detail::pi_lp(spec);
    if (auto* c = std::get_if<ConstantFading>(&spec.fading()))
        return c->psi * std::pow(pl / -std::log1p(-p), 1.0 / dl);
    // Mixed model: solve in log t.
    auto f = [&](double lt) { return signal_ccdf(spec, std::exp(lt)) - p; };
    double lo = -5.0, hi = 5.0;
    while (f(lo) < 0.0) lo -= 10.0;
    while (f(hi) > 0.0) hi += 10.0;
    math::ToleranceSpec tol{1e-13, 1e-15, 300};
    return std::exp(math::find_root_monotone(f, lo, hi, tol));
}

/// E[W^-delta 1{W > t}] for t >= 0.
inline double cond_moment_w(const ChannelSpec& spec, double t) {
    if (!(t >= 0.0)) throw DomainError("threshold must be non-negative");
    const double a = spec.alpha();
    const double dl = spec.delta();
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance()))
        return fd->r * fd->r * *fading_partial_moment(spec.fading(), -dl, t * std::pow(fd->r, a));
    const double pl = detail::pi_lp(spec);
    if (auto* c = std::get_if<ConstantFading>(&spec.fading())) {
        const double scale = std::pow(c->psi, -dl) / pl;
        if (t == 0.0) return scale;
        const double x = pl * std::pow(c->psi / t, dl);
        // 1 - (1 + x) e^-x, written to survive both small and large x.
        const double em = std::exp(-x);
        const double val = x < 0.5 ? -std::expm1(-x) - x * em : 1.0 - (1.0 + x) * em;
        return scale * val;
    }
    auto g = [&](double u) {
        const double s = t * detail::d_pow_alpha(u, pl, dl);
        return (u / pl) * *fading_partial_moment(spec.fading(), -dl, s) * std::exp(-u);
    };
    return math::integrate(g, 0.0, math::kInf, detail::inner_tol({}));
}

/// E[W^-1 1{W > t}], the mean transmit power under channel inversion.
/// Empty when the expectation diverges (Rayleigh fading with t = 0).
inline std::optional<double> avg_inversion_power(const ChannelSpec& spec, double t) {
    if (!(t >= 0.0)) throw DomainError("threshold must be non-negative");
    const double a = spec.alpha();
    const double dl = spec.delta();
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance())) {
        auto m = fading_partial_moment(spec.fading(), -1.0, t * std::pow(fd->r, a));
        if (!m) return std::nullopt;
        return std::pow(fd->r, a) * *m;
    }
    const double pl = detail::pi_lp(spec);
    if (auto* c = std::get_if<ConstantFading>(&spec.fading())) {
        // E[D^alpha 1{u < u*}] = (pi lambda')^(-alpha/2) * lower_gamma(1 + alpha/2, u*)
        const double ustar = t == 0.0 ? math::kInf : pl * std::pow(c->psi / t, dl);
        const double lower = std::isinf(ustar) ? std::tgamma(1.0 + 0.5 * a)
                                               : boost::math::tgamma_lower(1.0 + 0.5 * a, ustar);
        return std::pow(pl, -0.5 * a) * lower / c->psi;
    }
    if (std::holds_alternative<RayleighFading>(spec.fading()) && t == 0.0) return std::nullopt;
    auto g = [&](double u) {
        const double da = detail::d_pow_alpha(u, pl, dl);
        return da * *fading_partial_moment(spec.fading(), -1.0, t * da) * std::exp(-u);
    };
    return math::integrate(g, 0.0, math::kInf, detail::inner_tol({}));
}

/// E[g(W^-delta) | W > t]. v_kink is a value of W^-delta at which g has a
/// kink (NaN if none); quadrature places a breakpoint there.
template <class G>
double expect_over_signal(const ChannelSpec& spec, double t, const G& g, double v_kink,
                          math::ToleranceSpec tol = {}) {
    if (!(t >= 0.0)) throw DomainError("threshold must be non-negative");
    const double a = spec.alpha();
    const double dl = spec.delta();
    const bool has_kink = v_kink > 0.0 && std::isfinite(v_kink);
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance())) {
        const double r2 = fd->r * fd->r;
        auto h = [&](double psi) { return g(r2 * std::pow(psi, -dl)); };
        const double psi_kink = has_kink ? std::pow(r2 / v_kink, 1.0 / dl) : std::numeric_limits<double>::quiet_NaN();
        return fading_conditional_expectation(spec.fading(), t * std::pow(fd->r, a), h, psi_kink, tol);
    }
    const double pl = detail::pi_lp(spec);
    if (auto* c = std::get_if<ConstantFading>(&spec.fading())) {
        const double k = std::pow(c->psi, -dl) / pl;  // W^-delta = k u
        const double ustar = t == 0.0 ? math::kInf : pl * std::pow(c->psi / t, dl);
        const double mass = std::isinf(ustar) ? 1.0 : -std::expm1(-ustar);
        if (!(mass > 0.0)) throw DegenerateThresholdError("no signal mass above threshold");
        auto f = [&](double u) { return g(k * u) * std::exp(-u); };
        std::vector<double> pts{0.0};
        if (has_kink && v_kink / k < ustar) pts.push_back(v_kink / k);
        pts.push_back(ustar);
        return math::integrate_pieces(f, pts, tol) / mass;
    }
    // Mixed: outer average over u = pi lambda' D^2, inner over Psi | Psi > t D^alpha.
    const double mass = transmit_probability(spec, t);
    if (!(mass > 0.0)) throw DegenerateThresholdError("no signal mass above threshold");
    const auto itol = detail::inner_tol(tol);
    auto outer = [&](double u) {
        const double d2 = u / pl;
        const double s = t * detail::d_pow_alpha(u, pl, dl);
        const double tail = fading_ccdf(spec.fading(), s);
        if (!(tail > 0.0)) return 0.0;
        auto h = [&](double psi) { return g(d2 * std::pow(psi, -dl)); };
        const double psi_kink = has_kink ? std::pow(d2 / v_kink, 1.0 / dl) : std::numeric_limits<double>::quiet_NaN();
        return tail * fading_conditional_expectation(spec.fading(), s, h, psi_kink, itol) * std::exp(-u);
    };
    return math::integrate(outer, 0.0, math::kInf, tol) / mass;
}

// ---------------------------------------------------------------------------
// Sampling

struct SignalState {
    double psi;
    double d;
    double w;
};

template <class Urbg>
double sample_fading(const FadingModel& f, Urbg& rng) {
    if (auto* c = std::get_if<ConstantFading>(&f)) return c->psi;
    if (auto* l = std::get_if<LognormalFading>(&f)) return std::exp(l->sigma * std::normal_distribution<double>{}(rng));
    return std::exponential_distribution<double>{}(rng);
}

template <class Urbg>
double sample_distance(const DistanceModel& d, Urbg& rng) {
    if (auto* f = std::get_if<FixedDistance>(&d)) return f->r;
    const double lp = std::get<NearestNeighborDistance>(d).lambda_prime;
    return std::sqrt(std::exponential_distribution<double>{}(rng) / (std::numbers::pi * lp));
}

template <class Urbg>
SignalState sample_signal_state(const ChannelSpec& spec, Urbg& rng) {
    const double psi = sample_fading(spec.fading(), rng);
    const double d = sample_distance(spec.distance(), rng);
    return {psi, d, psi * std::pow(d, -spec.alpha())};
}

namespace detail {

template <class Urbg>
double open_uniform(Urbg& rng) {
    double u;
    do {
        u = std::generate_canonical<double, 53>(rng);
    } while (u <= 0.0);
    return u;
}

// Psi | Psi > s.
template <class Urbg>
double sample_fading_above(const FadingModel& f, double s, Urbg& rng) {
    if (s <= 0.0) return sample_fading(f, rng);
    if (auto* c = std::get_if<ConstantFading>(&f)) {
        if (!(s < c->psi)) throw DegenerateThresholdError("no fading mass above threshold");
        return c->psi;
    }
    if (auto* l = std::get_if<LognormalFading>(&f)) {
        const double zs = std::log(s) / l->sigma;
        const double q = math::std_normal_ccdf(zs);
        if (!(q > 0.0)) throw DegenerateThresholdError("no fading mass above threshold");
        if (q > 0.25) {
            std::normal_distribution<double> nd;
            for (;;) {
                const double z = nd(rng);
                if (z > zs) return std::exp(l->sigma * z);
            }
        }
        const double z = math::std_normal_ccdf_inv(q * open_uniform(rng));
        return std::exp(l->sigma * std::max(z, zs));
    }
    return s + std::exponential_distribution<double>{}(rng);
}

}  // namespace detail

/// (Psi, D) drawn conditionally on W = Psi D^-alpha > t.
template <class Urbg>
SignalState sample_signal_state_above(const ChannelSpec& spec, double t, Urbg& rng) {
    if (!(t >= 0.0)) throw DomainError("threshold must be non-negative");
    if (t == 0.0) return sample_signal_state(spec, rng);
    const double a = spec.alpha();
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance())) {
        const double psi = detail::sample_fading_above(spec.fading(), t * std::pow(fd->r, a), rng);
        return {psi, fd->r, psi * std::pow(fd->r, -a)};
    }
    const double pl = detail::pi_lp(spec);
    if (auto* c = std::get_if<ConstantFading>(&spec.fading())) {
        // u = pi lambda' D^2 ~ Exp(1) truncated to u < u*.
        const double ustar = pl * std::pow(c->psi / t, spec.delta());
        double u = -std::log1p(detail::open_uniform(rng) * std::expm1(-ustar));
        u = std::min(u, ustar);
        const double d = std::sqrt(u / pl);
        return {c->psi, d, c->psi * std::pow(d, -a)};
    }
    for (long k = 0; k < 100'000'000; ++k) {
        const auto s = sample_signal_state(spec, rng);
        if (s.w > t) return s;
    }
    throw NumericError("conditional signal sampling: acceptance too low", t);
}

}  // namespace adhoc_tc
