#pragma once

// Monte Carlo simulation of the reference link in a marked Poisson field.
//
// Every trial draws from its own generator, seeded from (master_seed,
// trial_index, stream), so estimates do not depend on how trials are spread
// over threads. Counts are reduced in a fixed order.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "adhoc_tc/bounds.hpp"
#include "adhoc_tc/channel.hpp"
#include "adhoc_tc/errors.hpp"
#include "adhoc_tc/mathkit.hpp"

namespace adhoc_tc::sim {

using Rng = std::mt19937_64;

struct SimConfig {
    double window_radius = 500.0;
    double d_min = 0.5;
    long trials = 100000;
    std::uint64_t master_seed = 20080101;
    double ci_level = 0.95;
    int threads = 1;

    void validate() const {
        if (!(window_radius > 0.0) || !std::isfinite(window_radius)) throw DomainError("window_radius must be positive");
        if (!(d_min >= 0.0) || !std::isfinite(d_min)) throw DomainError("d_min must be non-negative");
        if (trials < 1) throw DomainError("trials must be at least 1");
        if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci_level must lie in (0,1)");
        if (threads < 1) throw DomainError("threads must be at least 1");
    }
};

struct Interferer {
    std::array<double, 2> position;
    double psi_to_ref;
    double own_w;
    bool active;
    double power;
};

struct ReferenceLink {
    double psi00;
    double d0;
    double w0;
    double power;
};

struct FieldRealization {
    std::vector<Interferer> interferers;
    ReferenceLink reference;
};

struct SimEstimate {
    double mean = 0.0;
    double ci_half_width = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Seeding and reduction

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { Reference = 1, Field = 2, FullField = 3 };

inline Rng trial_rng(std::uint64_t master_seed, long trial_index, Stream stream) {
    const std::uint64_t base = splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
    return Rng(splitmix64(base + static_cast<std::uint64_t>(trial_index)));
}

/// Sum of fn(i) over i in [0, n), split over `threads` contiguous blocks.
/// Partial sums are combined in block order.
template <class T, class F>
T reduce_trials(long n, int threads, const F& fn) {
    threads = static_cast<int>(std::clamp<long>(threads, 1, std::max<long>(n, 1)));
    std::vector<T> partial(static_cast<std::size_t>(threads), T{});
    auto work = [&](int b) {
        const long lo = n * b / threads, hi = n * (b + 1) / threads;
        T acc{};
        for (long i = lo; i < hi; ++i) acc += fn(i);
        partial[static_cast<std::size_t>(b)] = acc;
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int b = 0; b < threads; ++b) pool.emplace_back(work, b);
        for (auto& th : pool) th.join();
    }
    T total{};
    for (const auto& p : partial) total += p;
    return total;
}

/// Wilson score interval; returns the larger of the two distances from the
/// point estimate to the interval ends.
inline double wilson_half_width(long successes, long n, double ci_level) {
    if (n <= 0) return 0.0;
    const double z = math::std_normal_ccdf_inv(0.5 * (1.0 - ci_level));
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (ph + z2 / (2.0 * nn)) / denom;
    const double hw = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    return std::max(center + hw - ph, ph - (center - hw));
}

inline SimEstimate proportion(long successes, const SimConfig& cfg) {
    return {static_cast<double>(successes) / static_cast<double>(cfg.trials),
            wilson_half_width(successes, cfg.trials, cfg.ci_level), cfg.trials, cfg.master_seed};
}

// ---------------------------------------------------------------------------
// Full field sampling

/// One realisation of the potential-transmitter field in the disk of radius
/// window_radius, with every mark drawn and the scheduling rule applied.
inline FieldRealization sample_field(const ChannelSpec& channel, const NetworkSpec& net, const PolicySpec& policy,
                                     const SimConfig& cfg, long trial_index) {
    net.validate();
    policy.validate();
    cfg.validate();
    Rng rng = trial_rng(cfg.master_seed, trial_index, Stream::FullField);
    const double R = cfg.window_radius;
    const bool inversion = policy.power == Power::ChannelInversion;
    const bool thresh = policy.scheduling == Scheduling::Threshold;

    FieldRealization field;
    const SignalState ref = thresh ? sample_signal_state_above(channel, policy.value, rng)
                                   : sample_signal_state(channel, rng);
    field.reference = {ref.psi, ref.d, ref.w, inversion ? 1.0 / ref.w : 1.0};

    const long count = std::poisson_distribution<long>(net.lambda * std::numbers::pi * R * R)(rng);
    field.interferers.reserve(static_cast<std::size_t>(count));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long k = 0; k < count; ++k) {
        const double rad = R * std::sqrt(unif(rng));
        const double ang = 2.0 * std::numbers::pi * unif(rng);
        Interferer it;
        it.position = {rad * std::cos(ang), rad * std::sin(ang)};
        it.psi_to_ref = sample_fading(channel.fading(), rng);
        it.own_w = sample_signal_state(channel, rng).w;
        // The coin is drawn under both rules so the streams stay aligned.
        const double coin = unif(rng);
        it.active = thresh ? it.own_w > policy.value : coin < policy.value;
        it.power = inversion ? 1.0 / it.own_w : 1.0;
        field.interferers.push_back(it);
    }
    return field;
}

/// Interference-to-signal ratio at the reference receiver. Interferers closer
/// than d_min are left out.
inline double reference_isr(const FieldRealization& field, const ChannelSpec& channel, const SimConfig& cfg) {
    const double half_alpha = 0.5 * channel.alpha();
    const double dmin2 = cfg.d_min * cfg.d_min;
    double interference = 0.0;
    for (const auto& it : field.interferers) {
        if (!it.active) continue;
        const double r2 = it.position[0] * it.position[0] + it.position[1] * it.position[1];
        if (r2 < dmin2) continue;
        interference += it.power * it.psi_to_ref * std::pow(r2, -half_alpha);
    }
    const double signal = field.reference.power * field.reference.w0;
    return interference / signal;
}

// ---------------------------------------------------------------------------
// Fast kernel
//
// Only the active interferers are generated: a Poisson process of intensity
// mu in radial order (pi mu r_k^2 are the arrival times of a unit-rate
// process), each carrying its cross gain and, under channel inversion, its
// own conditional signal strength. This has the same law as thinning the
// full field, and re-using the unit-rate arrival times across mu couples
// runs at different contention levels.

namespace detail {

struct Kernel {
    const ChannelSpec* channel;
    double mu;
    double t;            // reference and interferer threshold (0 for random access)
    bool inversion;
    double half_alpha;
    double r2_max;
    double dmin2;
    std::uint64_t seed;
};

inline Kernel make_kernel(const ChannelSpec& channel, const NetworkSpec& net, const PolicySpec& policy,
                          const SimConfig& cfg) {
    net.validate();
    policy.validate();
    cfg.validate();
    const bool thresh = policy.scheduling == Scheduling::Threshold;
    const double mu = thresh ? net.lambda * transmit_probability(channel, policy.value) : net.lambda * policy.value;
    if (thresh && !(mu > 0.0)) throw DegenerateThresholdError("threshold leaves no transmitters");
    return {&channel,
            mu,
            thresh ? policy.value : 0.0,
            policy.power == Power::ChannelInversion,
            0.5 * channel.alpha(),
            cfg.window_radius * cfg.window_radius,
            cfg.d_min * cfg.d_min,
            cfg.master_seed};
}

inline double path_gain(double r2, double half_alpha) {
    return half_alpha == 2.0 ? 1.0 / (r2 * r2) : std::pow(r2, -half_alpha);
}

enum class Mode { Outage, Dominant, Total };

// Returns the ISR contribution summary for one trial. For Outage/Dominant the
// loop stops as soon as the event is decided; the return value is then 1 or 0.
inline double run_trial(const Kernel& k, long index, Mode mode) {
    const ChannelSpec& ch = *k.channel;
    Rng ref_rng = trial_rng(k.seed, index, Stream::Reference);
    const double w0 = sample_signal_state_above(ch, k.t, ref_rng).w;
    const double signal = k.inversion ? 1.0 : w0;
    const double level = ch.y() * signal;

    Rng rng = trial_rng(k.seed, index, Stream::Field);
    std::exponential_distribution<double> expo;
    const double scale = 1.0 / (std::numbers::pi * k.mu);
    double arrival = 0.0;
    double interference = 0.0;
    for (;;) {
        arrival += expo(rng);
        const double r2 = arrival * scale;
        if (r2 > k.r2_max) break;
        const double psi = sample_fading(ch.fading(), rng);
        const double power = k.inversion ? 1.0 / sample_signal_state_above(ch, k.t, rng).w : 1.0;
        if (r2 < k.dmin2) continue;
        const double term = power * psi * path_gain(r2, k.half_alpha);
        switch (mode) {
            case Mode::Dominant:
                if (term >= level) return 1.0;
                break;
            case Mode::Outage:
                interference += term;
                if (interference > level) return 1.0;
                break;
            case Mode::Total:
                interference += term;
                break;
        }
    }
    return mode == Mode::Total ? interference / signal : 0.0;
}

inline long count_events(const Kernel& k, const SimConfig& cfg, Mode mode) {
    if (!(k.mu > 0.0)) return 0;
    return reduce_trials<long>(cfg.trials, cfg.threads,
                               [&](long i) { return run_trial(k, i, mode) > 0.5 ? 1L : 0L; });
}

}  // namespace detail

/// Fraction of trials with ISR > 1/beta.
inline SimEstimate estimate_outage(const ChannelSpec& channel, const NetworkSpec& net, const PolicySpec& policy,
                                   const SimConfig& cfg) {
    const auto k = detail::make_kernel(channel, net, policy, cfg);
    return proportion(detail::count_events(k, cfg, detail::Mode::Outage), cfg);
}

/// Fraction of trials in which some single active interferer reaches the
/// outage level on its own.
inline SimEstimate dominant_interferer_probability(const ChannelSpec& channel, const NetworkSpec& net,
                                                   const PolicySpec& policy, const SimConfig& cfg) {
    const auto k = detail::make_kernel(channel, net, policy, cfg);
    return proportion(detail::count_events(k, cfg, detail::Mode::Dominant), cfg);
}

/// ISR samples, one per trial, in trial order.
inline std::vector<double> isr_samples(const ChannelSpec& channel, const NetworkSpec& net, const PolicySpec& policy,
                                       const SimConfig& cfg) {
    const auto k = detail::make_kernel(channel, net, policy, cfg);
    std::vector<double> out(static_cast<std::size_t>(cfg.trials), 0.0);
    if (!(k.mu > 0.0)) return out;
    reduce_trials<long>(cfg.trials, cfg.threads, [&](long i) {
        out[static_cast<std::size_t>(i)] = detail::run_trial(k, i, detail::Mode::Total);
        return 0L;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Capacity search

namespace detail {

inline PolicySpec policy_at(const ChannelSpec& channel, PolicyFamily family, double p) {
    if (family.scheduling == Scheduling::RandomAccess) return PolicySpec::random_access(p, family.power);
    const double t = p >= 1.0 ? 0.0 : threshold_for_probability(channel, p);
    return PolicySpec::threshold(t, family.power);
}

}  // namespace detail

struct CapacitySearch {
    SimEstimate capacity;
    double p = 0.0;       // transmit fraction reaching the target
    double q_hat = 0.0;   // outage estimate at that fraction
};

/// Empirical transmission capacity: the transmit fraction p at which the
/// estimated outage crosses eps is found by bisection with common random
/// numbers, and the capacity is lambda p (1 - eps).
inline CapacitySearch estimate_capacity_search(const ChannelSpec& channel, const NetworkSpec& net,
                                               PolicyFamily family, const SimConfig& cfg, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
    auto q_hat = [&](double p) { return estimate_outage(channel, net, detail::policy_at(channel, family, p), cfg); };
    const SimEstimate full = q_hat(1.0);
    if (full.mean < eps) {
        std::ostringstream msg;
        msg << "outage target " << eps << " unreachable: estimated outage at p = 1 is " << full.mean;
        throw SaturationError(msg.str());
    }
    // Bisection in log p: the crossing can sit many decades below 1.
    double lo = 1.0, hi = 1.0;
    SimEstimate at_lo = full;
    while (at_lo.mean >= eps) {
        hi = lo;
        lo *= 0.25;
        if (lo < 1e-9) break;
        at_lo = q_hat(lo);
    }
    for (int it = 0; it < 40 && hi / lo > 1.0 + 2e-3; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (q_hat(mid).mean < eps) lo = mid; else hi = mid;
    }
    const double p = std::sqrt(lo * hi);
    const SimEstimate at = q_hat(p);
    // Propagate the outage CI through a secant slope of q(p).
    const double pl = p * 0.85, ph = std::min(1.0, p * 1.15);
    const double slope = (q_hat(ph).mean - q_hat(pl).mean) / (ph - pl);
    const double scale = net.lambda * (1.0 - eps);
    double ci = slope > 0.0 ? scale * at.ci_half_width / slope : scale * p;
    ci = std::min(ci, scale * 1.0);
    return {{scale * p, ci, cfg.trials, cfg.master_seed}, p, at.mean};
}

inline SimEstimate estimate_capacity(const ChannelSpec& channel, const NetworkSpec& net, PolicyFamily family,
                                     const SimConfig& cfg, double eps) {
    return estimate_capacity_search(channel, net, family, cfg, eps).capacity;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct EcfFit {
    double exponent;
    double s0;
    std::vector<double> s;
    std::vector<double> neg_log_abs_phi;
};

/// |phi(s)| of the empirical ISR law.
inline double ecf_abs(const std::vector<double>& y, double s) {
    double c = 0.0, sn = 0.0;
    for (double v : y) {
        c += std::cos(s * v);
        sn += std::sin(s * v);
    }
    const double n = static_cast<double>(y.size());
    return std::hypot(c, sn) / n;
}

/// Decay exponent of |phi(s)| ~ exp(-c s^e) for the ISR under random access
/// with channel inversion. Fits log(-log|phi|) against log s over a decade
/// starting where -log|phi| is about 0.25.
inline EcfFit ecf_stability_diagnostic(const ChannelSpec& channel, const NetworkSpec& net, const SimConfig& cfg,
                                       double p = 1.0) {
    const auto y = isr_samples(channel, net, PolicySpec::random_access(p, Power::ChannelInversion), cfg);
    const long nonzero = std::count_if(y.begin(), y.end(), [](double v) { return v > 0.0; });
    if (nonzero < static_cast<long>(y.size()) / 2) throw NumericError("ECF diagnostic: ISR sample is degenerate", 0.0);
    auto nl = [&](double s) { return -std::log(ecf_abs(y, s)); };
    double lo = -30.0, hi = 30.0;  // log s
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (nl(std::exp(mid)) < 0.25) lo = mid; else hi = mid;
        if (hi - lo < 1e-6) break;
    }
    const double s0 = std::exp(0.5 * (lo + hi));
    EcfFit fit{0.0, s0, {}, {}};
    constexpr int n = 21;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double s = s0 * std::pow(10.0, static_cast<double>(i) / (n - 1));
        const double v = nl(s);
        if (!(v > 0.0) || !std::isfinite(v)) throw NumericError("ECF diagnostic: |phi| out of range", v);
        fit.s.push_back(s);
        fit.neg_log_abs_phi.push_back(v);
        const double lx = std::log(s), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

struct CampbellCheck {
    double mean_hat, mean_se, mean_theory;
    double var_hat, var_se, var_theory;
};

/// Mean and variance of the non-dominant interference at a fixed reference
/// signal strength w and ISR level y, against their closed forms.
inline CampbellCheck campbell_check(const ChannelSpec& channel, double mu, double w, double y, const SimConfig& cfg) {
    cfg.validate();
    if (!(mu > 0.0 && w > 0.0 && y > 0.0)) throw DomainError("campbell_check needs mu, w, y > 0");
    const double dl = channel.delta();
    const double ha = 0.5 * channel.alpha();
    const double r2max = cfg.window_radius * cfg.window_radius;
    struct Moments {
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
        Moments& operator+=(const Moments& o) {
            s1 += o.s1; s2 += o.s2; s3 += o.s3; s4 += o.s4;
            return *this;
        }
    };
    const auto m = reduce_trials<Moments>(cfg.trials, cfg.threads, [&](long i) {
        Rng rng = trial_rng(cfg.master_seed, i, Stream::Field);
        std::exponential_distribution<double> expo;
        double arrival = 0.0, yc = 0.0;
        for (;;) {
            arrival += expo(rng);
            const double r2 = arrival / (std::numbers::pi * mu);
            if (r2 > r2max) break;
            const double term = sample_fading(channel.fading(), rng) * detail::path_gain(r2, ha) / w;
            if (term < y) yc += term;
        }
        return Moments{yc, yc * yc, yc * yc * yc, yc * yc * yc * yc};
    });
    const double n = static_cast<double>(cfg.trials);
    const double mean = m.s1 / n;
    const double e2 = m.s2 / n, e3 = m.s3 / n, e4 = m.s4 / n;
    const double var = (e2 - mean * mean) * n / (n - 1.0);
    const double c4 = e4 - 4.0 * mean * e3 + 6.0 * mean * mean * e2 - 3.0 * mean * mean * mean * mean;
    const double ep = frac_moment_psi(channel, MomentSign::Plus);
    CampbellCheck out;
    out.mean_hat = mean;
    out.mean_se = std::sqrt(var / n);
    out.mean_theory = dl / (1.0 - dl) * std::numbers::pi * mu * ep * std::pow(w, -dl) * std::pow(y, 1.0 - dl);
    out.var_hat = var;
    out.var_se = std::sqrt(std::max(c4 - var * var, 0.0) / n);
    out.var_theory = dl / (2.0 - dl) * std::numbers::pi * mu * ep * std::pow(w, -dl) * std::pow(y, 2.0 - dl);
    return out;
}

struct TruncationReport {
    SimEstimate at_r;
    SimEstimate at_2r;
    double delta;
    double allowance;
    bool pass;
};

/// Re-runs the outage estimate at twice the window radius with the same
/// seeds; passes when the change is below max(2 CI, 1e-3).
inline TruncationReport truncation_convergence_check(const ChannelSpec& channel, const NetworkSpec& net,
                                                     const PolicySpec& policy, const SimConfig& cfg) {
    SimConfig wide = cfg;
    wide.window_radius = 2.0 * cfg.window_radius;
    TruncationReport rep;
    rep.at_r = estimate_outage(channel, net, policy, cfg);
    rep.at_2r = estimate_outage(channel, net, policy, wide);
    rep.delta = std::abs(rep.at_2r.mean - rep.at_r.mean);
    rep.allowance = std::max(2.0 * std::max(rep.at_r.ci_half_width, rep.at_2r.ci_half_width), 1e-3);
    rep.pass = rep.delta < rep.allowance;
    return rep;
}

}  // namespace adhoc_tc::sim
