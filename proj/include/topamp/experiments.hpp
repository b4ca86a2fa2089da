#pragma once

// Edge profiles, (Delta_s, winding, stability) phase diagrams and disorder
// averages over chain parameters.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/rng.hpp"
#include "topamp/spectral.hpp"
#include "topamp/stability.hpp"
#include "topamp/steady.hpp"
#include "topamp/topology.hpp"
#include "topamp/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace topamp {

namespace detail {

// fn(i) for i in [0, count) on up to `threads` workers; results are written
// by index so the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace detail

struct EdgeProfile {
    ChainParams params;
    RealVector u_abs;  // |u^(N)_j|
    RealVector v_abs;  // |v^(N)_j|
    RealVector s;      // s_1 .. s_N as returned by the SVD
    double s_edge;     // refined s_N
    double gap;        // s_{N-1} - s_N
};

inline EdgeProfile edge_profile_experiment(const ChainParams& p) {
    const CouplingMatrix cm = coupling_matrix(build_chain(p));
    const SvdResult r = svd(cm);
    const Eigen::Index n = r.size();
    const EdgeRefinement e = refine_edge_singular_value(cm, r);
    return {p, r.u.col(n - 1).cwiseAbs(), r.v.col(n - 1).cwiseAbs(), r.s, e.s_edge,
            std::max(0.0, r.s(n - 2) - e.s_edge)};
}

struct LinearFit {
    double slope;
    double intercept;
    double r2;
};

inline LinearFit linear_fit(const RealVector& x, const RealVector& y) {
    const Eigen::Index n = x.size();
    if (n < 2 || y.size() != n) throw ModelError("linear_fit needs >= 2 matching points");
    const double mx = x.mean(), my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    const double syy = (y.array() - my).square().sum();
    const double slope = sxy / sxx;
    const double sse = (y.array() - my - slope * (x.array() - mx)).square().sum();
    return {slope, my - slope * mx, syy > 0.0 ? 1.0 - sse / syy : 1.0};
}

// Fit of ln|w_j| against j over the `count` sites nearest the site where |w| peaks.
inline LinearFit edge_decay_fit(const RealVector& w_abs, int count = 20) {
    const Eigen::Index n = w_abs.size();
    if (count < 2 || count > n) throw ModelError("edge_decay_fit: bad window");
    Eigen::Index peak = 0;
    w_abs.maxCoeff(&peak);
    const Eigen::Index start = peak >= n / 2 ? n - count : 0;
    RealVector x(count), y(count);
    for (int i = 0; i < count; ++i) {
        x(i) = static_cast<double>(start + i + 1);
        y(i) = std::log(w_abs(start + i));
    }
    return linear_fit(x, y);
}

// ---------------------------------------------------------------- phase diagram

struct AxisSpec {
    std::string name;  // t_d, gamma_p, phi or t_c
    double lo;
    double hi;
    int count;

    double value(int i) const { return count == 1 ? lo : lo + (hi - lo) * i / (count - 1); }
};

inline void set_axis(ChainParams& p, const std::string& name, double x) {
    if (name == "t_d") p.t_d = x;
    else if (name == "gamma_p") p.gamma_p = x;
    else if (name == "phi") p.phi = x;
    else if (name == "t_c") p.t_c = x;
    else throw ModelError("invalid axis name '" + name + "' (expected t_d, gamma_p, phi or t_c)");
}

struct PhasePoint {
    ChainParams params;
    double delta_s;
    std::optional<int> winding;  // empty when gapless
    bool stable;                 // N -> infinity analytic window
    double max_real;             // finite-N open-chain spectrum
};

struct Polyline {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (other axis, gamma_p)
};

struct PhaseDiagram {
    AxisSpec axis1;
    AxisSpec axis2;
    std::vector<PhasePoint> points;  // axis1 major
    std::vector<Polyline> overlays;
};

inline PhasePoint phase_point(const ChainParams& p) {
    const CouplingMatrix cm = coupling_matrix(build_chain(p));
    const SvdResult r = svd(cm);
    PhasePoint pt{p, singular_gap(r), std::nullopt, false, 0.0};
    try {
        pt.winding = winding_number(bloch_from_chain(p));
    } catch (const NumericalError& e) {
        if (e.code() != error_code::gapless) throw;
    }
    pt.stable = p.gamma_p < stability_threshold(p.t_c, p.t_d, p.phi);
    pt.max_real = spectrum_open_analytic(p).max_real;
    return pt;
}

inline PhaseDiagram phase_diagram(const AxisSpec& a1, const AxisSpec& a2, const ChainParams& fixed,
                                  int n_sites = 100, int threads = 1) {
    for (const AxisSpec* a : {&a1, &a2}) {
        ChainParams probe;
        set_axis(probe, a->name, 0.0);
        if (a->count < 2) throw ModelError("axis '" + a->name + "' needs at least 2 points");
    }
    if (a1.name == a2.name) throw ModelError("axes must differ");

    PhaseDiagram out{a1, a2, std::vector<PhasePoint>(static_cast<std::size_t>(a1.count) * a2.count), {}};
    detail::parallel_for(out.points.size(), threads, [&](std::size_t idx) {
        ChainParams p = fixed;
        p.n_sites = n_sites;
        set_axis(p, a1.name, a1.value(static_cast<int>(idx / a2.count)));
        set_axis(p, a2.name, a2.value(static_cast<int>(idx % a2.count)));
        out.points[idx] = phase_point(p);
    });

    // Topological and stability boundaries as gamma_p(x) when one axis is gamma_p.
    const AxisSpec* other = a1.name == "gamma_p" ? &a2 : a2.name == "gamma_p" ? &a1 : nullptr;
    if (other) {
        Polyline lower{"topological_lower", {}}, upper{"topological_upper", {}}, stab{"stability", {}};
        const int samples = 4 * (other->count - 1) + 1;
        for (int i = 0; i < samples; ++i) {
            const double x = other->lo + (other->hi - other->lo) * i / (samples - 1);
            ChainParams p = fixed;
            set_axis(p, other->name, x);
            const auto [lo, hi] = topological_interval(p.t_d, p.phi);
            lower.points.emplace_back(x, lo);
            upper.points.emplace_back(x, hi);
            stab.points.emplace_back(x, stability_threshold(p.t_c, p.t_d, p.phi));
        }
        out.overlays = {lower, upper, stab};
    }
    return out;
}

// ---------------------------------------------------------------- disorder

struct DisorderStats {
    double sigma;
    int n_sites;
    int realizations;
    double mean_gap;
    double stderr_gap;
    double mean_log_gain;    // log10 |alpha_N| for eps = e_1
    double stderr_log_gain;
    int gain_fallbacks;      // realisations where the direct solve replaced the edge route
};

inline int default_realizations(int n_sites) {
    return static_cast<int>(std::lround(1e5 / n_sites));
}

struct DisorderSample {
    double gap;
    double log_gain;
    bool fallback;
};

// Gap and log10 |alpha_N| (drive at site 1) of one realisation.
inline DisorderSample disorder_sample(const LatticeModel& clean, double sigma, std::uint64_t seed) {
    const CouplingMatrix cm = coupling_matrix(add_diagonal_disorder(clean, sigma, seed));
    const SvdResult r = svd(cm);
    const Eigen::Index n = r.size();
    const Drive d = Drive::at_site(n, 0);
    DisorderSample out{singular_gap(r), 0.0, false};
    try {
        out.log_gain = edge_rank1(cm, r, d, EdgeForm::automatic).log10_abs(n - 1);
    } catch (const NumericalError& e) {
        if (e.code() != error_code::no_edge_mode) throw;
        out.log_gain = steady_state_direct(cm, d).log10_abs(n - 1);
        out.fallback = true;
    }
    return out;
}

namespace detail {

// Mean and standard error about a shift; with every sample equal to the
// shift the result is exactly (shift, 0).
inline std::pair<double, double> shifted_stats(const std::vector<double>& x, double shift) {
    const std::size_t n = x.size();
    double sum = 0.0;
    for (double v : x) sum += v - shift;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : x) ss += (v - shift - mean) * (v - shift - mean);
    const double se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return {shift + mean, se};
}

} // namespace detail

// realizations <= 0 selects round(1e5/N). Seeds: (master, sigma index, N, r).
inline std::vector<DisorderStats> disorder_experiment(const ChainParams& base, const std::vector<double>& sigmas,
                                                      const std::vector<int>& n_list, std::uint64_t master_seed,
                                                      int threads = 1, int realizations = 0) {
    for (double s : sigmas)
        if (!(s >= 0.0)) throw ModelError("disorder sigmas must be >= 0");
    std::vector<DisorderStats> out;
    for (int n : n_list) {
        ChainParams p = base;
        p.n_sites = n;
        const LatticeModel clean = build_chain(p);
        const DisorderSample ref = disorder_sample(clean, 0.0, 0);
        const int count = realizations > 0 ? realizations : default_realizations(n);
        for (std::size_t si = 0; si < sigmas.size(); ++si) {
            std::vector<DisorderSample> samples(count);
            detail::parallel_for(samples.size(), threads, [&](std::size_t r) {
                const std::uint64_t seed = derive_seed({master_seed, static_cast<std::uint64_t>(si),
                                                        static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
                samples[r] = disorder_sample(clean, sigmas[si], seed);
            });
            std::vector<double> gaps(count), gains(count);
            int fallbacks = 0;
            for (int r = 0; r < count; ++r) {
                gaps[r] = samples[r].gap;
                gains[r] = samples[r].log_gain;
                fallbacks += samples[r].fallback;
            }
            const auto [mg, sg] = detail::shifted_stats(gaps, ref.gap);
            const auto [ml, sl] = detail::shifted_stats(gains, ref.log_gain);
            out.push_back({sigmas[si], n, count, mg, sg, ml, sl, fallbacks});
        }
    }
    return out;
}

} // namespace topamp
