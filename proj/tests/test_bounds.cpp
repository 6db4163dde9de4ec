#include <gtest/gtest.h>

#include "adhoc_tc/bounds.hpp"
#include "fixtures.hpp"

using namespace adhoc_tc;
using namespace adhoc_tc::bounds;
using namespace fixtures;

namespace {

const PolicyFamily kRaNo{Scheduling::RandomAccess, Power::Unit};
const PolicyFamily kRaCi{Scheduling::RandomAccess, Power::ChannelInversion};
const PolicyFamily kThNo{Scheduling::Threshold, Power::Unit};
const PolicyFamily kThCi{Scheduling::Threshold, Power::ChannelInversion};

// First zero of 1 - c1 x / (1 - c2 x)^2, found by bisection on (0, 1/c2).
double oracle_h(double d) {
    const double c1 = d / (2 - d), c2 = d / (1 - d);
    return bisect([&](double x) { return 1 - c1 * x / ((1 - c2 * x) * (1 - c2 * x)); }, 0.0, 1.0 / c2 * (1 - 1e-15));
}

// Clamped Chebyshev factor: zero from its first root onwards.
double oracle_factor(double d, double x) {
    if (x >= oracle_h(d)) return 0.0;
    const double c1 = d / (2 - d), c2 = d / (1 - d);
    return std::max(0.0, 1 - c1 * x / ((1 - c2 * x) * (1 - c2 * x)));
}

// Outage bounds without power control, written from the integral form: the
// load on the reference link is Theta mu with Theta = pi E[Psi^d] beta^d W^-d,
// averaged over W restricted to W > t and normalised by P(W > t).
struct Pair {
    double lo, up;
};

template <class ExpectW>
Pair oracle_nopc(const ChannelSpec& ch, double mu, const ExpectW& expect_w, double mass) {
    const double d = ch.delta();
    const double c = kPi * frac_moment_psi(ch, MomentSign::Plus) * std::pow(ch.beta(), d) * mu;
    const double wk = std::pow(c / oracle_h(d), 1 / d);  // where the clamp engages
    const double el = expect_w([&](double w) { return std::exp(-c * std::pow(w, -d)); }, wk);
    const double eu = expect_w([&](double w) {
        const double x = c * std::pow(w, -d);
        return oracle_factor(d, x) * std::exp(-x);
    }, wk);
    return {1 - el / mass, 1 - eu / mass};
}

// E[g(W) 1{W > t}] per preset, integrated against the fading or distance density.
// Each splits the integral where W crosses wk.
auto expect_rayleigh(double t) {
    return [t](auto g, double wk) {
        auto f = [&](double p) { return g(p / 625.0) * std::exp(-p); };
        const double lo = t * 625.0, k = std::max(lo, wk * 625.0);
        return (k > lo ? finite_integral(f, lo, k) : 0.0) + tail_integral(f, k);
    };
}
auto expect_lognormal(double t) {
    return [t](auto g, double wk) {
        auto f = [&](double z) {
            return g(std::exp(kSigma * z) / 625.0) * std::exp(-0.5 * z * z) / std::sqrt(2 * kPi);
        };
        const double lo = t > 0 ? std::log(t * 625.0) / kSigma : -40.0;
        const double k = std::max(lo, std::log(wk * 625.0) / kSigma);
        return (k > lo ? finite_integral(f, lo, k) : 0.0) + tail_integral(f, k);
    };
}
auto expect_nearest(double t) {
    return [t](auto g, double wk) {
        auto f = [&](double x) {
            return g(std::pow(x, -4.0)) * 2 * kPi * kLambda * x * std::exp(-kPi * kLambda * x * x);
        };
        const double hi = t > 0 ? std::pow(t, -0.25) : 1e3;
        const double k = std::min(hi, std::pow(wk, -0.25));
        return finite_integral(f, 0.0, k) + (hi > k ? finite_integral(f, k, hi) : 0.0);
    };
}

}  // namespace

TEST(Kappa, Examples) {
    EXPECT_NEAR(kappa(rayleigh()), 25 * kPi * kPi / 2, 1e-11);
    EXPECT_NEAR(kappa(rayleigh()), 123.370, 1e-3);
    EXPECT_NEAR(kappa(nearest()), 100.0, 1e-12);
    const ChannelSpec flat(4.0, 3.0, ConstantFading{1.0}, FixedDistance{5.0});
    EXPECT_NEAR(kappa(flat), 25 * kPi, 1e-12);
    EXPECT_NEAR(kappa(lognormal()), kPi * std::exp(0.25 * kSigma * kSigma) * 25, 1e-11);
    for (double a : {2.5, 3.0, 5.0}) {
        const double d = 2 / a;
        EXPECT_NEAR(kappa(rayleigh(a)), kPi * (kPi * d / std::sin(kPi * d)) * 25, 1e-10);
    }
}

TEST(KappaT, Examples) {
    EXPECT_NEAR(kappa_t(rayleigh(), 0.0), kappa(rayleigh()), 1e-12);
    const double t = 1.6e-3;  // log(t r^alpha) = 0
    const double d = 0.5;
    const double expect = kPi * std::exp(d * d * kSigma * kSigma) * 25 * math::std_normal_ccdf(d * kSigma) / 0.5;
    EXPECT_NEAR(kappa_t(lognormal(), t) / expect, 1.0, 1e-12);
    // Against quadrature of the conditional moment.
    const double m = lognormal_expect_above(kSigma, 1.0, [](double p) { return std::pow(p / 625, -0.5); });
    EXPECT_NEAR(kappa_t(lognormal(), t) / (kPi * std::exp(0.125 * kSigma * kSigma) * m / 0.5), 1.0, 1e-9);
    EXPECT_THROW(kappa_t(lognormal(), 1e300), DegenerateThresholdError);
}

TEST(KappaT, ClosedFormsFromTheExamples) {
    for (double t : {1e-4, 1e-3, 4e-3}) {
        const double x = t * 625;
        EXPECT_NEAR(kappa_t(rayleigh(), t) / (kPi * std::tgamma(1.5) * math::upper_incomplete_gamma(0.5, x) * std::exp(x) * 25),
                    1.0, 1e-12);
        const double v = kPi * 0.01 * std::pow(1 / t, 0.5);
        const double nn = (1 - (1 + v) * std::exp(-v)) / (kPi * 0.01) / (1 - std::exp(-v));
        EXPECT_NEAR(kappa_t(nearest(), t) / (kPi * nn), 1.0, 1e-12);
    }
}

TEST(KappaT, StrictlyDecreasing) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest(), mixed()}) {
        double prev = kappa(ch);
        for (double p = 0.95; p > 0.01; p -= 0.05) {
            const double k = kappa_t(ch, threshold_for_probability(ch, p));
            EXPECT_LT(k, prev) << p;
            prev = k;
        }
    }
}

TEST(Theta, Examples) {
    EXPECT_NEAR(theta(rayleigh()), 123.37005501361699 * std::sqrt(3.0), 1e-9);
    EXPECT_NEAR(theta(rayleigh()), 213.68, 5e-3);
    EXPECT_NEAR(theta(nearest()), 100 * std::sqrt(3.0), 1e-10);
    const ChannelSpec unit(4.0, 1.0, RayleighFading{}, FixedDistance{5.0});
    EXPECT_DOUBLE_EQ(theta(unit), kappa(unit));
    EXPECT_NEAR(theta_t(rayleigh(), 1e-3), kappa_t(rayleigh(), 1e-3) * std::sqrt(3.0), 1e-10);
}

TEST(ChebyshevLimit, Values) {
    EXPECT_NEAR(chebyshev_validity_limit(0.5), 0.56574, 1e-5);
    for (double d = 0.05; d < 0.96; d += 0.05) {
        const double h = chebyshev_validity_limit(d);
        if (h > 0) EXPECT_NEAR(h, oracle_h(d), 1e-10) << d;
    }
    EXPECT_THROW(chebyshev_validity_limit(1.0), DomainError);
}

TEST(ChebyshevLimit, ClampRegion) {
    const auto ch = rayleigh();
    const double h = chebyshev_validity_limit(0.5);
    const double th = theta(ch);
    for (double x : {0.1, 0.5, h * 0.999, h * 1.001, 0.9, 2.0, 5.0}) {
        const double p = x / th / kLambda;
        if (p > 1) continue;
        const auto b = outage_bounds(ch, PolicySpec::random_access(p, Power::ChannelInversion), kLambda);
        EXPECT_EQ(b.q_upper < 1.0, x < h) << x;
    }
}

TEST(OutageBounds, RayleighExactOutage) {
    const double mu = 5e-4;
    const auto b = outage_bounds(rayleigh(), PolicySpec::random_access(mu / kLambda, Power::ChannelInversion), kLambda);
    const double exact = 1 - std::exp(-kPi * mu * std::sqrt(3.0) * 25 * std::tgamma(1.5) * std::tgamma(0.5));
    EXPECT_NEAR(b.q_lower, exact, 1e-14);
    EXPECT_NEAR(b.q_lower, 0.1013, 1e-4);
}

TEST(OutageBounds, NearestClosedForm) {
    for (double mu : {1e-4, 1e-3, 5e-3, 1e-2}) {
        const auto b = outage_bounds(nearest(), PolicySpec::random_access(mu / kLambda), kLambda);
        const double bd = std::sqrt(3.0);
        const double closed = bd * mu / (bd * mu + kLambda);
        EXPECT_NEAR(b.q_lower, closed, 1e-12) << mu;
        const auto o = oracle_nopc(nearest(), mu, expect_nearest(0.0), 1.0);
        EXPECT_NEAR(o.lo, closed, 1e-12) << mu;
    }
    const auto b = outage_bounds(nearest(), PolicySpec::random_access(0.1), kLambda);
    EXPECT_NEAR(b.q_lower, 0.14764, 1e-5);
}

TEST(OutageBounds, NoPowerControlAgainstOracle) {
    for (double p : {0.02, 0.1, 0.4, 1.0}) {
        const double mu = p * kLambda;
        const auto pol = PolicySpec::random_access(p);
        for (auto [ch, o] : {std::pair{rayleigh(), oracle_nopc(rayleigh(), mu, expect_rayleigh(0), 1.0)},
                             std::pair{lognormal(), oracle_nopc(lognormal(), mu, expect_lognormal(0), 1.0)},
                             std::pair{nearest(), oracle_nopc(nearest(), mu, expect_nearest(0), 1.0)}}) {
            const auto b = outage_bounds(ch, pol, kLambda);
            EXPECT_NEAR(b.q_lower, o.lo, 1e-9) << p;
            EXPECT_NEAR(b.q_upper, o.up, 1e-7) << p;
        }
    }
}

TEST(OutageBounds, ThresholdAgainstOracle) {
    for (double p : {0.05, 0.3, 0.8}) {
        const auto ry = rayleigh();
        const double t = threshold_for_probability(ry, p);
        auto o = oracle_nopc(ry, kLambda * p, expect_rayleigh(t), p);
        auto b = outage_bounds(ry, PolicySpec::threshold(t), kLambda);
        EXPECT_NEAR(b.mu, kLambda * p, 1e-15);
        EXPECT_NEAR(b.q_lower, o.lo, 1e-9);
        EXPECT_NEAR(b.q_upper, o.up, 1e-7);

        const auto ln = lognormal();
        const double tl = threshold_for_probability(ln, p);
        o = oracle_nopc(ln, kLambda * p, expect_lognormal(tl), p);
        b = outage_bounds(ln, PolicySpec::threshold(tl), kLambda);
        EXPECT_NEAR(b.q_lower, o.lo, 1e-9);
        EXPECT_NEAR(b.q_upper, o.up, 1e-7);

        const auto nn = nearest();
        const double tn = threshold_for_probability(nn, p);
        o = oracle_nopc(nn, kLambda * p, expect_nearest(tn), p);
        b = outage_bounds(nn, PolicySpec::threshold(tn), kLambda);
        EXPECT_NEAR(b.q_lower, o.lo, 1e-9);
        EXPECT_NEAR(b.q_upper, o.up, 1e-7);

        // Channel inversion uses theta(t) mu(t).
        const auto ci = outage_bounds(ry, PolicySpec::threshold(t, Power::ChannelInversion), kLambda);
        EXPECT_NEAR(ci.q_lower, 1 - std::exp(-theta_t(ry, t) * kLambda * p), 1e-14);
    }
}

TEST(OutageBounds, MixedModelIsBetweenZeroAndOne) {
    const auto b = outage_bounds(mixed(), PolicySpec::random_access(0.2), kLambda);
    EXPECT_GT(b.q_lower, 0.0);
    EXPECT_LE(b.q_lower, b.q_upper);
    EXPECT_LE(b.q_upper, 1.0);
}

TEST(OutageBounds, BoundSetInvariants) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest()})
        for (auto f : {kRaNo, kRaCi, kThNo, kThCi})
            for (double p : {0.01, 0.05, 0.2, 0.5, 1.0}) {
                const auto pol = f.scheduling == Scheduling::RandomAccess
                                     ? PolicySpec::random_access(p, f.power)
                                     : PolicySpec::threshold(p < 1 ? threshold_for_probability(ch, p) : 0.0, f.power);
                const auto b = outage_bounds(ch, pol, kLambda);
                EXPECT_LE(0.0, b.q_lower);
                EXPECT_LE(b.q_lower, b.q_upper);
                EXPECT_LE(b.q_upper, 1.0);
                EXPECT_LE(b.tau_lower, b.tau_upper);
                EXPECT_DOUBLE_EQ(b.tau_upper, b.mu * (1 - b.q_lower));
                EXPECT_DOUBLE_EQ(b.tau_lower, b.mu * (1 - b.q_upper));
                EXPECT_NEAR(b.mu, kLambda * p, 1e-12 * kLambda);
            }
}

TEST(OutageBounds, VanishingLoad) {
    for (const auto& ch : {rayleigh(), nearest()})
        for (auto pw : {Power::Unit, Power::ChannelInversion}) {
            const auto b = outage_bounds(ch, PolicySpec::random_access(1e-12, pw), kLambda);
            EXPECT_LT(b.q_upper, 1e-9);
            EXPECT_LE(b.q_lower, b.q_upper);
        }
}

TEST(OutageBounds, ThresholdZeroEqualsFullRandomAccess) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest(), mixed()})
        for (auto pw : {Power::Unit, Power::ChannelInversion}) {
            const auto a = outage_bounds(ch, PolicySpec::threshold(0.0, pw), kLambda);
            const auto b = outage_bounds(ch, PolicySpec::random_access(1.0, pw), kLambda);
            EXPECT_EQ(a.q_lower, b.q_lower);
            EXPECT_EQ(a.q_upper, b.q_upper);
            EXPECT_EQ(a.tau_lower, b.tau_lower);
            EXPECT_EQ(a.tau_upper, b.tau_upper);
            EXPECT_EQ(a.mu, b.mu);
        }
}

TEST(OutageBounds, JensenOrdering) {
    for (const auto& ch : {rayleigh(), lognormal(), mixed()})
        for (double lp = -4; lp <= 0; lp += 0.25) {
            const double p = std::pow(10.0, lp);
            const auto no = outage_bounds(ch, PolicySpec::random_access(p), kLambda);
            const auto ci = outage_bounds(ch, PolicySpec::random_access(p, Power::ChannelInversion), kLambda);
            EXPECT_GT(ci.q_lower, no.q_lower) << p;
        }
}

TEST(OutageBounds, SmallLoadLinearityAndRatio) {
    for (const auto& ch : {rayleigh(), rayleigh(3.0), lognormal(5.0)}) {
        const double th = theta(ch);
        double prev_gap = 1.0;
        for (double x : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
            const auto b = outage_bounds(ch, PolicySpec::random_access(x / th / kLambda, Power::ChannelInversion), kLambda);
            EXPECT_NEAR(b.q_lower / x, 1.0, 2 * x);
            const double ratio = b.q_upper / b.q_lower;
            const double gap = std::abs(ratio - ch.alpha() / (ch.alpha() - 1));
            EXPECT_LT(gap, prev_gap);
            prev_gap = gap;
        }
        EXPECT_LT(prev_gap, 1e-4);
    }
}

TEST(OutageInverse, RoundTrip) {
    for (double d : {0.4, 0.5, 2.0 / 3})
        for (double eps : {1e-6, 0.01, 0.1, 0.3}) {
            if (eps >= outage_upper_at(d, chebyshev_validity_limit(d) * (1 - 1e-12))) continue;
            EXPECT_NEAR(outage_upper_at(d, outage_upper_inverse(d, eps)), eps, 1e-13);
        }
}

TEST(Capacity, ClosedForms) {
    const auto c = transmission_capacity_bounds(rayleigh(), kRaCi, kLambda, 0.1);
    EXPECT_NEAR(c.c_upper, -0.9 * std::log(0.9) / theta(rayleigh()), 1e-17);
    EXPECT_NEAR(c.c_upper, 4.438e-4, 1e-7);
    const auto n = transmission_capacity_bounds(nearest(), kRaNo, kLambda, 0.1);
    EXPECT_NEAR(n.c_upper, kLambda / std::sqrt(3.0) * 0.1, 1e-12);
    EXPECT_NEAR(n.c_upper, 5.7735e-4, 1e-8);
    for (auto f : {kRaNo, kRaCi, kThNo, kThCi}) {
        const auto s = transmission_capacity_bounds(rayleigh(), f, kLambda, 1e-7);
        EXPECT_LT(s.c_upper, 1e-8);
        EXPECT_LE(s.c_lower, s.c_upper);
    }
}

TEST(Capacity, BruteForceInversion) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest()})
        for (double eps : {0.02, 0.05, 0.1, 0.2}) {
            for (auto f : {kRaNo, kRaCi}) {
                const auto c = transmission_capacity_bounds(ch, f, kLambda, eps);
                const auto bu = outage_bounds(ch, PolicySpec::random_access(c.c_upper / (1 - eps) / kLambda, f.power), kLambda);
                const auto bl = outage_bounds(ch, PolicySpec::random_access(c.c_lower / (1 - eps) / kLambda, f.power), kLambda);
                EXPECT_NEAR(bu.q_lower, eps, 1e-8);
                EXPECT_NEAR(bl.q_upper, eps, 1e-8);
                EXPECT_LE(c.c_lower, c.c_upper);
            }
            for (auto f : {kThNo, kThCi}) {
                const auto c = transmission_capacity_bounds(ch, f, kLambda, eps);
                auto at = [&](double cap) {
                    const double p = cap / (1 - eps) / kLambda;
                    return outage_bounds(ch, PolicySpec::threshold(threshold_for_probability(ch, p), f.power), kLambda);
                };
                EXPECT_NEAR(at(c.c_upper).q_lower, eps, 1e-8);
                EXPECT_NEAR(at(c.c_lower).q_upper, eps, 1e-8);
                EXPECT_LE(c.c_lower, c.c_upper);
            }
        }
}

TEST(Capacity, ThresholdBeatsRandomAccess) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest()})
        for (auto pw : {Power::Unit, Power::ChannelInversion}) {
            const auto ra = transmission_capacity_bounds(ch, {Scheduling::RandomAccess, pw}, kLambda, 0.1);
            const auto th = transmission_capacity_bounds(ch, {Scheduling::Threshold, pw}, kLambda, 0.1);
            EXPECT_GT(th.c_lower, ra.c_upper);
        }
}

TEST(Capacity, Windows) {
    // A sparse network cannot reach high outage targets.
    const double lambda = 1e-4;
    for (auto f : {kRaNo, kRaCi, kThNo, kThCi}) {
        try {
            transmission_capacity_bounds(rayleigh(), f, lambda, 0.5);
            FAIL() << policy_name(f);
        } catch (const WindowError& e) {
            EXPECT_GT(e.window_bound(), 0.0);
            EXPECT_LT(e.window_bound(), 0.5);
        }
    }
    const double g = theta(rayleigh()) * lambda;
    const double ql_max = 1 - std::exp(-g);
    try {
        transmission_capacity_bounds(rayleigh(), kThCi, lambda, 0.5);
    } catch (const WindowError& e) {
        EXPECT_NEAR(e.window_bound(), ql_max, 1e-15);
    }
    EXPECT_THROW(transmission_capacity_bounds(rayleigh(), kRaCi, kLambda, 0.0), DomainError);
    EXPECT_THROW(transmission_capacity_bounds(rayleigh(), kRaCi, kLambda, 1.0), DomainError);
}

TEST(Gamma, Values) {
    EXPECT_NEAR(gamma_of_t(rayleigh(), kLambda, 0.0), theta(rayleigh()) * kLambda, 1e-12);
    EXPECT_NEAR(gamma_of_t(rayleigh(), kLambda, 0.0), 2.1368, 1e-4);
    EXPECT_LT(gamma_of_t(rayleigh(), kLambda, 1.0), 1e-200);
    const double v = kPi * 0.01;
    EXPECT_NEAR(gamma_of_t(nearest(), kLambda, 1.0), std::sqrt(3.0) * (1 - (1 + v) * std::exp(-v)), 1e-14);
    for (const auto& ch : {rayleigh(), lognormal(), nearest()})
        for (double p : {0.9, 0.3, 0.05}) {
            const double t = threshold_for_probability(ch, p);
            EXPECT_NEAR(gamma_of_t(ch, kLambda, t), theta_t(ch, t) * kLambda * p, 1e-12);
        }
}

TEST(Gamma, InverseRoundTrip) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest(), mixed()})
        for (double p = 0.01; p < 0.995; p += 0.02) {
            const double t = threshold_for_probability(ch, p);
            const double g = gamma_of_t(ch, kLambda, t);
            EXPECT_NEAR(gamma_inverse(ch, kLambda, g) / t, 1.0, 1e-8) << p;
        }
}

TEST(Gamma, InverseSpotValues) {
    const double g = 1.0;
    const double arg = g / (kPi * 25 * kLambda * std::sqrt(3.0) * std::tgamma(1.5));
    // Incomplete-gamma inverse by bisection on the quadrature oracle.
    const double x = bisect([&](double v) {
        return tail_integral([](double s) { return std::pow(s, -0.5) * std::exp(-s); }, v) - arg;
    }, 0.0, 50.0);
    EXPECT_NEAR(gamma_inverse(rayleigh(), kLambda, g) / (x / 625), 1.0, 1e-9);
    // Lambert argument stays in [-1/e, 0) for g in (0, gamma(0)).
    const double g0 = gamma_of_t(nearest(), kLambda, 0.0);
    for (double f : {1e-9, 0.1, 0.5, 0.99, 1 - 1e-9}) {
        const double G = f * g0 * 0.01 / (kLambda * std::sqrt(3.0));
        const double z = -(1 - G) / std::numbers::e;
        EXPECT_GE(z, -1 / std::numbers::e);
        EXPECT_LT(z, 0.0);
        EXPECT_NEAR(gamma_of_t(nearest(), kLambda, gamma_inverse(nearest(), kLambda, f * g0)) / (f * g0), 1.0, 1e-9);
    }
    EXPECT_EQ(gamma_inverse(rayleigh(), kLambda, gamma_of_t(rayleigh(), kLambda, 0.0)), 0.0);
    EXPECT_THROW(gamma_inverse(rayleigh(), kLambda, 0.0), DomainError);
    EXPECT_THROW(gamma_inverse(rayleigh(), kLambda, 10.0), DomainError);
}

TEST(Optimal, RandomAccess) {
    const auto op = optimal_random_access(rayleigh(), kLambda);
    EXPECT_NEAR(op.mu_star, 4.680e-3, 1e-6);
    EXPECT_NEAR(op.tau_star, 1.7216e-3, 1e-7);
    EXPECT_DOUBLE_EQ(op.tau_star, 1 / (std::numbers::e * theta(rayleigh())));
    EXPECT_NEAR(op.eps_star, 0.632, 1e-3);
    EXPECT_THROW(optimal_random_access(rayleigh(), 1e-3), UnsaturatedError);
    const ChannelSpec wide(4.0, 1e6, RayleighFading{}, FixedDistance{5.0});
    EXPECT_LT(optimal_random_access(wide, kLambda).mu_star, 1e-4);
}

TEST(Optimal, Threshold) {
    for (const auto& ch : {rayleigh(), lognormal(), nearest()}) {
        const double t = optimal_threshold(ch, kLambda);
        const double a = kPi * kLambda * std::sqrt(3.0) * frac_moment_psi(ch, MomentSign::Plus);
        EXPECT_LT(std::abs(transmit_probability(ch, t) - std::sqrt(t) / a), 1e-10);
        const double best = threshold_throughput(ch, kLambda, t);
        for (int i = 1; i <= 100; ++i) {
            const double tt = t * std::pow(10.0, -2.0 + 4.0 * i / 100);
            EXPECT_GE(best, threshold_throughput(ch, kLambda, tt) * (1 - 1e-12)) << tt;
        }
        EXPECT_GE(best, threshold_throughput(ch, kLambda, 0.0));
        double prev = t;
        for (double lam : {3e-3, 1e-3, 3e-4}) {
            const double tl = optimal_threshold(ch, lam);
            EXPECT_LT(tl, prev);
            prev = tl;
        }
    }
}

TEST(Asymptotics, Coefficients) {
    const auto c = asymptotic_ccdf_coeffs(rayleigh(), 1e-3);
    EXPECT_NEAR(c.upper / c.lower, 4.0 / 3, 1e-15);
    EXPECT_NEAR(c.lower, 123.370055 * 1e-3, 1e-8);
    EXPECT_EQ(c.exact, c.lower);
    const auto far = asymptotic_ccdf_coeffs(rayleigh(200.0), 1e-3);
    EXPECT_NEAR(far.upper / far.lower, 1.0, 0.01);
}

TEST(FadingFactor, Values) {
    EXPECT_NEAR(fading_tc_factor(RayleighFading{}, 3.0), std::sin(2 * kPi / 3) / (2 * kPi / 3), 1e-14);
    EXPECT_NEAR(fading_tc_factor(RayleighFading{}, 3.0), 0.4135, 1e-4);
    EXPECT_DOUBLE_EQ(fading_tc_factor(ConstantFading{3.0}, 4.0), 1.0);
    EXPECT_NEAR(fading_tc_factor(LognormalFading{kSigma}, 4.0), 0.6206, 1e-4);
    for (double a : {2.1, 3.0, 4.0, 8.0}) {
        EXPECT_LE(fading_tc_factor(RayleighFading{}, a), 1.0);
        EXPECT_LE(fading_tc_factor(LognormalFading{0.3}, a), 1.0);
        EXPECT_NEAR(fading_tc_factor(RayleighFading{}, a), kPi * 25 / kappa(rayleigh(a)), 1e-12);
    }
}

TEST(Dispersion, Values) {
    const double factor = std::tgamma(1.5) / 0.5 * std::cos(kPi / 4);
    EXPECT_NEAR(factor, 1.2533141373155, 1e-12);
    EXPECT_NEAR(dispersion(rayleigh(), 1e-3, DispersionMode::Inverted), factor * kappa(rayleigh()) * 1e-3, 1e-14);
    EXPECT_NEAR(dispersion(rayleigh(), 1e-3, DispersionMode::Conditional, 0.01),
                factor * kPi * std::tgamma(1.5) * 10.0 * 1e-3, 1e-13);
    EXPECT_EQ(dispersion(rayleigh(), 0.0, DispersionMode::Inverted), 0.0);
}

TEST(Rate, ToSirThreshold) {
    EXPECT_DOUBLE_EQ(rate_to_sir_threshold(1.0), 1.0);
    EXPECT_DOUBLE_EQ(rate_to_sir_threshold(2.0), 3.0);
    EXPECT_NEAR(rate_to_sir_threshold(0.5), std::sqrt(2.0) - 1, 1e-15);
    EXPECT_THROW(rate_to_sir_threshold(0.0), DomainError);
}

TEST(Policy, Validation) {
    EXPECT_THROW(PolicySpec::random_access(0.0), DomainError);
    EXPECT_THROW(PolicySpec::random_access(1.5), DomainError);
    EXPECT_THROW(PolicySpec::threshold(-1.0), DomainError);
    EXPECT_EQ(policy_name(kThCi), "th_ci");
}
