#pragma once

// Outage, throughput and transmission-capacity bounds for random access and
// threshold scheduling, with and without channel inversion.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "adhoc_tc/channel.hpp"
#include "adhoc_tc/errors.hpp"
#include "adhoc_tc/mathkit.hpp"

namespace adhoc_tc {

enum class Scheduling { RandomAccess, Threshold };
enum class Power { Unit, ChannelInversion };

struct PolicyFamily {
    Scheduling scheduling = Scheduling::RandomAccess;
    Power power = Power::Unit;

    friend bool operator==(const PolicyFamily&, const PolicyFamily&) = default;
};

// For RandomAccess, `value` is the transmit probability p; for Threshold it is
// the signal-strength threshold t.
struct PolicySpec {
    Scheduling scheduling = Scheduling::RandomAccess;
    double value = 1.0;
    Power power = Power::Unit;

    static PolicySpec random_access(double p, Power power = Power::Unit) {
        PolicySpec s{Scheduling::RandomAccess, p, power};
        s.validate();
        return s;
    }
    static PolicySpec threshold(double t, Power power = Power::Unit) {
        PolicySpec s{Scheduling::Threshold, t, power};
        s.validate();
        return s;
    }

    PolicyFamily family() const { return {scheduling, power}; }

    void validate() const {
        if (scheduling == Scheduling::RandomAccess && !(value > 0.0 && value <= 1.0))
            throw DomainError("transmit probability must lie in (0,1]");
        if (scheduling == Scheduling::Threshold && !(value >= 0.0 && std::isfinite(value)))
            throw DomainError("threshold must be non-negative");
    }
};

inline std::string policy_name(PolicyFamily f) {
    std::string s = f.scheduling == Scheduling::RandomAccess ? "ra" : "th";
    s += f.power == Power::Unit ? "_nopc" : "_ci";
    return s;
}

struct BoundSet {
    double q_lower = 0.0;
    double q_upper = 0.0;
    double tau_lower = 0.0;
    double tau_upper = 0.0;
    double mu = 0.0;
};

struct CapacityBounds {
    double c_lower = 0.0;
    double c_upper = 0.0;
};

struct OperatingPoint {
    double mu_star;
    double tau_star;
    double eps_star;
};

struct AsymptoticCoeffs {
    double lower;
    double exact;
    double upper;
};

enum class DispersionMode { Conditional, Inverted };

namespace bounds {

// Default accuracy for the analytic engine. Tighter than the mathkit default
// because the closed-form cross-checks are made at 1e-12.
inline constexpr math::ToleranceSpec kTol{1e-13, 1e-16, 400};

// ---------------------------------------------------------------------------
// kappa / theta

inline double kappa(const ChannelSpec& spec) {
    return std::numbers::pi * frac_moment_psi(spec, MomentSign::Plus) *
           frac_moment_psi(spec, MomentSign::Minus) * mean_sq_distance(spec);
}

inline double kappa_t(const ChannelSpec& spec, double t) {
    const double mass = transmit_probability(spec, t);
    if (!(mass > 0.0)) {
        std::ostringstream msg;
        msg << "threshold t = " << t << " leaves no transmitters";
        throw DegenerateThresholdError(msg.str());
    }
    if (t == 0.0) return kappa(spec);
    return std::numbers::pi * frac_moment_psi(spec, MomentSign::Plus) * cond_moment_w(spec, t) / mass;
}

inline double theta(const ChannelSpec& spec) { return kappa(spec) * std::pow(spec.beta(), spec.delta()); }

inline double theta_t(const ChannelSpec& spec, double t) {
    return kappa_t(spec, t) * std::pow(spec.beta(), spec.delta());
}

/// Kappa conditional on the reference signal strength, pi E[Psi^delta] w^-delta.
inline double kappa_w(const ChannelSpec& spec, double w) {
    if (!(w > 0.0)) throw DomainError("kappa_w needs w > 0");
    return std::numbers::pi * frac_moment_psi(spec, MomentSign::Plus) * std::pow(w, -spec.delta());
}

// ---------------------------------------------------------------------------
// The Chebyshev factor and the scalar outage maps

inline double chebyshev_validity_limit(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    // Smaller root of d/(2-d) x = (1 - d/(1-d) x)^2.
    const double d = delta;
    return (1.0 - d) * ((5.0 - 3.0 * d) - std::sqrt((1.0 - d) * (9.0 - 5.0 * d))) / (2.0 * d * (2.0 - d));
}

/// (1 - F) where F is the clamped Chebyshev factor at normalised load x.
/// Equals 1 from the first root h(delta) onwards: past it the factor is
/// negative, and the second positive branch sits beyond the point where the
/// mean of the non-dominant interference exceeds the threshold, so the
/// inequality it comes from no longer applies.
inline double chebyshev_deficit(double delta, double x) {
    if (!(x > 0.0)) return 0.0;
    if (x >= chebyshev_validity_limit(delta)) return 1.0;
    const double c1 = delta / (2.0 - delta);
    const double c2 = delta / (1.0 - delta);
    const double den = 1.0 - c2 * x;
    return std::min(1.0, c1 * x / (den * den));
}

/// 1 - e^-x: outage lower bound at normalised load x.
inline double outage_lower_at(double x) {
    if (!(x > 0.0)) return 0.0;
    return -std::expm1(-x);
}

/// 1 - F(x) e^-x: outage upper bound at normalised load x.
inline double outage_upper_at(double delta, double x) {
    if (!(x > 0.0)) return 0.0;
    const double def = chebyshev_deficit(delta, x);
    if (def >= 1.0) return 1.0;
    return std::min(1.0, -std::expm1(-x) + def * std::exp(-x));
}

/// Inverse of outage_upper_at over [0, h(delta)].
inline double outage_upper_inverse(double delta, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    const double h = chebyshev_validity_limit(delta);
    auto f = [&](double x) { return outage_upper_at(delta, x) - eps; };
    return math::find_root_monotone(f, 0.0, h, {1e-15, 1e-17, 400});
}

// ---------------------------------------------------------------------------
// Outage bounds

namespace detail {

inline double reference_threshold(const PolicySpec& policy) {
    return policy.scheduling == Scheduling::Threshold ? policy.value : 0.0;
}

inline double attempt_intensity(const ChannelSpec& spec, const PolicySpec& policy, double lambda) {
    return policy.scheduling == Scheduling::RandomAccess ? lambda * policy.value
                                                         : lambda * transmit_probability(spec, policy.value);
}

// Without power control the load seen by the reference link is
// c * W0^-delta with c = pi E[Psi^delta] beta^delta mu.
inline double nopc_load_scale(const ChannelSpec& spec, double mu) {
    return std::numbers::pi * frac_moment_psi(spec, MomentSign::Plus) * std::pow(spec.beta(), spec.delta()) * mu;
}

// (q_lower, q_upper) without power control, reference link conditioned on W0 > t.
inline std::pair<double, double> nopc_outage(const ChannelSpec& spec, double t, double mu,
                                             math::ToleranceSpec tol) {
    if (!(mu > 0.0)) return {0.0, 0.0};
    const double c = nopc_load_scale(spec, mu);
    const double dl = spec.delta();
    const double h = chebyshev_validity_limit(dl);
    const double ql = expect_over_signal(spec, t, [c](double v) { return outage_lower_at(c * v); },
                                         std::numeric_limits<double>::quiet_NaN(), tol);
    const double qu = expect_over_signal(spec, t, [c, dl](double v) { return outage_upper_at(dl, c * v); },
                                         h / c, tol);
    return {std::clamp(ql, 0.0, 1.0), std::clamp(std::max(qu, ql), 0.0, 1.0)};
}

inline BoundSet make_bound_set(double mu, double ql, double qu) {
    return {ql, qu, mu * (1.0 - qu), mu * (1.0 - ql), mu};
}

}  // namespace detail

inline BoundSet outage_bounds(const ChannelSpec& spec, const PolicySpec& policy, double lambda,
                              math::ToleranceSpec tol = kTol) {
    NetworkSpec{lambda}.validate();
    policy.validate();
    const double mu = detail::attempt_intensity(spec, policy, lambda);
    const double t = detail::reference_threshold(policy);
    if (policy.power == Power::ChannelInversion) {
        if (!(mu > 0.0)) return detail::make_bound_set(0.0, 0.0, 0.0);
        const double x = (policy.scheduling == Scheduling::Threshold ? theta_t(spec, t) : theta(spec)) * mu;
        return detail::make_bound_set(mu, outage_lower_at(x), outage_upper_at(spec.delta(), x));
    }
    if (policy.scheduling == Scheduling::Threshold && !(mu > 0.0))
        throw DegenerateThresholdError("threshold leaves no transmitters");
    auto [ql, qu] = detail::nopc_outage(spec, t, mu, tol);
    return detail::make_bound_set(mu, ql, qu);
}

// ---------------------------------------------------------------------------
// gamma(t) = theta(t) mu(t) and its inverse

inline double gamma_of_t(const ChannelSpec& spec, double lambda, double t) {
    NetworkSpec{lambda}.validate();
    if (!(t >= 0.0)) throw DomainError("threshold must be non-negative");
    return lambda * std::pow(spec.beta(), spec.delta()) * std::numbers::pi *
           frac_moment_psi(spec, MomentSign::Plus) * cond_moment_w(spec, t);
}

namespace detail {

// 1 - (1 + x) e^-x
inline double one_minus_poly_exp(double x) {
    const double em = std::exp(-x);
    return x < 0.5 ? -std::expm1(-x) - x * em : 1.0 - (1.0 + x) * em;
}

}  // namespace detail

inline double gamma_inverse(const ChannelSpec& spec, double lambda, double g) {
    NetworkSpec{lambda}.validate();
    const double g0 = gamma_of_t(spec, lambda, 0.0);
    if (!(g > 0.0) || g > g0 * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "gamma_inverse needs g in (0, " << g0 << "], got " << g;
        throw DomainError(msg.str());
    }
    if (g >= g0) return 0.0;
    const double a = spec.alpha();
    const double dl = spec.delta();
    const double bd = std::pow(spec.beta(), dl);
    if (auto* fd = std::get_if<FixedDistance>(&spec.distance())) {
        const double r = fd->r;
        const double base = std::numbers::pi * r * r * lambda * bd;
        if (auto* l = std::get_if<LognormalFading>(&spec.fading())) {
            const double sg = l->sigma;
            const double arg = g / (base * std::exp(dl * dl * sg * sg));
            return std::pow(r, -a) * std::exp(sg * math::std_normal_ccdf_inv(arg) - dl * sg * sg);
        }
        if (std::holds_alternative<RayleighFading>(spec.fading())) {
            const double arg = g / (base * std::tgamma(1.0 + dl));
            return std::pow(r, -a) * math::upper_incomplete_gamma_inv(1.0 - dl, arg);
        }
        throw DomainError("gamma(t) is a step for deterministic signal strength; no inverse");
    }
    const double lp = std::get<NearestNeighborDistance>(spec.distance()).lambda_prime;
    if (auto* c = std::get_if<ConstantFading>(&spec.fading())) {
        const double G = g * lp / (lambda * bd);
        const double w = math::lambert_w_m1(-(1.0 - G) / std::numbers::e);
        double x = -1.0 - w;
        // -1 - W loses digits when x is small; finish on 1 - (1+x)e^-x = G directly.
        for (int i = 0; i < 3 && x > 0.0; ++i) {
            const double slope = x * std::exp(-x);
            if (!(slope > 0.0)) break;
            const double step = (detail::one_minus_poly_exp(x) - G) / slope;
            x -= step;
            if (std::abs(step) <= 1e-16 * x) break;
        }
        return c->psi * std::pow(x / (std::numbers::pi * lp), -0.5 * a);
    }
    // Mixed model: monotone decreasing in t, solve in log t.
    auto f = [&](double lt) { return gamma_of_t(spec, lambda, std::exp(lt)) - g; };
    double lo = -5.0, hi = 5.0;
    while (f(lo) < 0.0) lo -= 10.0;
    while (f(hi) > 0.0) hi += 10.0;
    return std::exp(math::find_root_monotone(f, lo, hi, {1e-13, 1e-15, 400}));
}

// ---------------------------------------------------------------------------
// Transmission capacity

namespace detail {

inline void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
}

[[noreturn]] inline void window_fail(const char* which, double eps, double bound) {
    std::ostringstream msg;
    msg << which << ": eps = " << eps << " exceeds the reachable outage " << bound
        << " at full contention (eps must be <= " << bound << ")";
    throw WindowError(msg.str(), bound);
}

// Smallest x in (lo, hi] with f(x) = target, f nondecreasing. Checks
// monotonicity on a coarse grid first.
template <class F>
double invert_increasing(const F& f, double lo, double hi, double target, const char* what) {
    constexpr int n = 8;
    double prev = -1.0;
    for (int i = 1; i <= n; ++i) {
        const double v = f(lo + (hi - lo) * i / n);
        if (v < prev - 1e-9) throw NumericError(std::string(what) + ": bound is not monotone", v);
        prev = v;
    }
    return math::find_root_monotone([&](double x) { return f(x) - target; }, lo, hi, {1e-14, 1e-16, 400});
}

}  // namespace detail

inline CapacityBounds transmission_capacity_bounds(const ChannelSpec& spec, PolicyFamily family, double lambda,
                                                   double eps, math::ToleranceSpec tol = kTol) {
    NetworkSpec{lambda}.validate();
    detail::check_eps(eps);
    const double dl = spec.delta();
    CapacityBounds out;

    if (family.power == Power::ChannelInversion) {
        const double gmax = theta(spec) * lambda;
        const double gl = -std::log1p(-eps);
        const double gu = outage_upper_inverse(dl, eps);
        const double ql_max = outage_lower_at(gmax);
        const double qu_max = outage_upper_at(dl, gmax);
        if (eps > ql_max) detail::window_fail("upper capacity bound", eps, ql_max);
        if (eps > qu_max) detail::window_fail("lower capacity bound", eps, qu_max);
        if (family.scheduling == Scheduling::RandomAccess) {
            const double th = theta(spec);
            out.c_upper = gl / th * (1.0 - eps);
            out.c_lower = gu / th * (1.0 - eps);
        } else {
            out.c_upper = lambda * transmit_probability(spec, gamma_inverse(spec, lambda, std::min(gl, gmax))) * (1.0 - eps);
            out.c_lower = lambda * transmit_probability(spec, gamma_inverse(spec, lambda, std::min(gu, gmax))) * (1.0 - eps);
        }
        return out;
    }

    if (family.scheduling == Scheduling::RandomAccess) {
        auto ql = [&](double mu) { return detail::nopc_outage(spec, 0.0, mu, tol).first; };
        auto qu = [&](double mu) { return detail::nopc_outage(spec, 0.0, mu, tol).second; };
        const auto full = detail::nopc_outage(spec, 0.0, lambda, tol);
        if (eps > full.first) detail::window_fail("upper capacity bound", eps, full.first);
        if (eps > full.second) detail::window_fail("lower capacity bound", eps, full.second);
        out.c_upper = detail::invert_increasing(ql, 0.0, lambda, eps, "q_lower") * (1.0 - eps);
        out.c_lower = detail::invert_increasing(qu, 0.0, lambda, eps, "q_upper") * (1.0 - eps);
        return out;
    }

    // Threshold, unit power: search over the transmit fraction p = P(W > t).
    auto q_at = [&](double p) {
        if (!(p > 0.0)) return std::pair{0.0, 0.0};
        const double t = p >= 1.0 ? 0.0 : threshold_for_probability(spec, p);
        return detail::nopc_outage(spec, t, lambda * p, tol);
    };
    const auto full = q_at(1.0);
    if (eps > full.first) detail::window_fail("upper capacity bound", eps, full.first);
    if (eps > full.second) detail::window_fail("lower capacity bound", eps, full.second);
    auto ql = [&](double p) { return q_at(p).first; };
    auto qu = [&](double p) { return q_at(p).second; };
    out.c_upper = lambda * detail::invert_increasing(ql, 0.0, 1.0, eps, "q_lower") * (1.0 - eps);
    out.c_lower = lambda * detail::invert_increasing(qu, 0.0, 1.0, eps, "q_upper") * (1.0 - eps);
    return out;
}

// ---------------------------------------------------------------------------
// Operating points and other closed forms

inline OperatingPoint optimal_random_access(const ChannelSpec& spec, double lambda) {
    NetworkSpec{lambda}.validate();
    const double th = theta(spec);
    if (!(lambda > 1.0 / th)) {
        std::ostringstream msg;
        msg << "network is not saturated: lambda = " << lambda << " <= 1/theta = " << 1.0 / th;
        throw UnsaturatedError(msg.str());
    }
    return {1.0 / th, 1.0 / (std::numbers::e * th), 1.0 - 1.0 / std::numbers::e};
}

/// Threshold maximising mu(t) exp(-gamma(t)): root of P(W > t) = t^delta / a.
inline double optimal_threshold(const ChannelSpec& spec, double lambda) {
    NetworkSpec{lambda}.validate();
    const double dl = spec.delta();
    const double a = std::numbers::pi * lambda * std::pow(spec.beta(), dl) * frac_moment_psi(spec, MomentSign::Plus);
    if (!(a > 0.0)) throw DomainError("optimal_threshold needs a > 0");
    auto f = [&](double t) { return transmit_probability(spec, t) - std::pow(t, dl) / a; };
    return math::find_root_monotone(f, 0.0, std::pow(a, 1.0 / dl), {1e-14, 1e-15, 400});
}

/// Throughput upper bound under threshold scheduling with channel inversion.
inline double threshold_throughput(const ChannelSpec& spec, double lambda, double t) {
    return lambda * transmit_probability(spec, t) * std::exp(-gamma_of_t(spec, lambda, t));
}

/// Coefficients of y^-delta in the large-y expansions of the lower bound,
/// the exact CCDF and the upper bound, at attempt intensity mu.
inline AsymptoticCoeffs asymptotic_ccdf_coeffs(const ChannelSpec& spec, double mu) {
    const double k = kappa(spec) * mu;
    return {k, k, 2.0 / (2.0 - spec.delta()) * k};
}

inline double dispersion(const ChannelSpec& spec, double mu, DispersionMode mode, double w = 1.0) {
    const double dl = spec.delta();
    const double k = mode == DispersionMode::Inverted ? kappa(spec) : kappa_w(spec, w);
    return std::tgamma(2.0 - dl) / (1.0 - dl) * std::cos(std::numbers::pi * dl / 2.0) * k * mu;
}

inline double fading_tc_factor(const FadingModel& fading, double alpha) {
    if (!(alpha > 2.0)) throw DomainError("alpha must exceed 2");
    const double dl = 2.0 / alpha;
    return 1.0 / (fading_moment(fading, dl) * fading_moment(fading, -dl));
}

inline double rate_to_sir_threshold(double rate_bps_per_hz) {
    if (!(rate_bps_per_hz > 0.0) || !std::isfinite(rate_bps_per_hz))
        throw DomainError("rate must be positive");
    return std::exp2(rate_bps_per_hz) - 1.0;
}

}  // namespace bounds
}  // namespace adhoc_tc
