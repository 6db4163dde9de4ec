#pragma once

// Channel presets at the reference operating point and test-side oracles.

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "adhoc_tc/channel.hpp"

namespace fixtures {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLambda = 0.01;
inline constexpr double kAlpha = 4.0;
inline constexpr double kBeta = 3.0;
inline constexpr double kR = 5.0;
inline const double kSigma = std::log(10.0) / 10.0 * 6.0;

inline adhoc_tc::ChannelSpec rayleigh(double alpha = kAlpha) {
    return {alpha, kBeta, adhoc_tc::RayleighFading{}, adhoc_tc::FixedDistance{kR}};
}
inline adhoc_tc::ChannelSpec lognormal(double alpha = kAlpha) {
    return {alpha, kBeta, adhoc_tc::LognormalFading{kSigma}, adhoc_tc::FixedDistance{kR}};
}
inline adhoc_tc::ChannelSpec nearest(double alpha = kAlpha) {
    return {alpha, kBeta, adhoc_tc::ConstantFading{1.0}, adhoc_tc::NearestNeighborDistance{kLambda}};
}
inline adhoc_tc::ChannelSpec mixed(double alpha = kAlpha) {
    return {alpha, kBeta, adhoc_tc::RayleighFading{}, adhoc_tc::NearestNeighborDistance{kLambda}};
}

// Integral over [a, inf) by double-exponential quadrature.
template <class F>
double tail_integral(const F& f, double a) {
    if (std::isinf(a)) return 0.0;
    boost::math::quadrature::exp_sinh<double> q;
    auto safe = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : 0.0;
    };
    return q.integrate(safe, a, std::numeric_limits<double>::infinity(), 1e-13);
}

template <class F>
double finite_integral(const F& f, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(f, a, b, 1e-13);
}

template <class F>
double whole_line_integral(const F& f) {
    return tail_integral(f, 0.0) + tail_integral([&](double x) { return f(-x); }, 0.0);
}

// E[g(Psi)] and E[g(D^2)] against each model's density, written out directly.
template <class G>
double rayleigh_expect(const G& g, double lo = 0.0) {
    return tail_integral([&](double p) { return g(p) * std::exp(-p); }, lo);
}

template <class G>
double lognormal_expect(double sigma, const G& g) {
    return whole_line_integral([&](double z) {
        return g(std::exp(sigma * z)) * std::exp(-0.5 * z * z) / std::sqrt(2 * kPi);
    });
}

// Same, restricted to Psi > s.
template <class G>
double lognormal_expect_above(double sigma, double s, const G& g) {
    return tail_integral([&](double z) {
        return g(std::exp(sigma * z)) * std::exp(-0.5 * z * z) / std::sqrt(2 * kPi);
    }, std::log(s) / sigma);
}

// D with P(D > d) = exp(-pi lambda' d^2): density 2 pi lambda' d exp(-pi lambda' d^2).
template <class G>
double nearest_expect(double lambda_prime, const G& g, double dmax = std::numeric_limits<double>::infinity()) {
    auto dens = [&](double d) { return g(d) * 2 * kPi * lambda_prime * d * std::exp(-kPi * lambda_prime * d * d); };
    return std::isinf(dmax) ? tail_integral(dens, 0.0) : finite_integral(dens, 0.0, dmax);
}

template <class F>
double bisect(const F& f, double lo, double hi, int iters = 200) {
    const bool up = f(hi) > f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0) == up) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace fixtures
