#pragma once

// Closed-form decoherence factor of the phonon-mediated central-spin
// dephasing model: coherent and thermal phonon preparations, the short-time
// expansion, the large-N Gaussian law, and the spin-only limits. All
// evaluators run in O(modes x grid points).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dephasim/detail/parallel.hpp"
#include "dephasim/errors.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

enum class CothVariant { PaperCoth, HalfCoth };

inline const char* coth_variant_name(CothVariant v) {
    return v == CothVariant::PaperCoth ? "paper" : "half";
}

// coth(x) for x > 0 without overflow; exact -> 1 as x -> inf.
inline double coth_safe(double x) {
    return 1.0 + 2.0 / std::expm1(2.0 * x);
}

// <u|v> for coherent states: exp(-|u|^2/2 - |v|^2/2 + conj(u) v). The real
// part of the exponent equals -|u - v|^2/2, so the magnitude never exceeds 1.
inline Complex coherent_overlap(Complex u, Complex v) {
    const double mag = std::exp(-0.5 * std::norm(u - v));
    const double arg = std::imag(std::conj(u) * v);
    return {mag * std::cos(arg), mag * std::sin(arg)};
}

// Coherent-state eigenvalue of the sigma branch at time t:
// u^sigma(t) = (lambda + sigma w/W) e^{-iWt} - sigma w/W.
inline Complex branch_eigenvalue(const ModeParams& m, BranchSign sign, double t) {
    if (m.big_omega == 0.0)
        throw DegenerateMode("branch_eigenvalue: big_omega = 0");
    const double d = sigma_of(sign) * m.omega / m.big_omega;
    if (std::abs(d) > kMaxCouplingRatio)
        throw DegenerateMode("branch_eigenvalue: omega/big_omega out of range");
    const double th = m.big_omega * t;
    const Complex rot{std::cos(th), -std::sin(th)};
    return (m.lambda + d) * rot - d;
}

// Accumulated branch phase A^sigma(t); a pure phase.
inline Complex branch_phase(const ModeParams& m, BranchSign sign, double t) {
    if (m.big_omega == 0.0)
        throw DegenerateMode("branch_phase: big_omega = 0");
    const double s = sigma_of(sign);
    const double c = m.omega / m.big_omega;
    if (std::abs(c) > kMaxCouplingRatio)
        throw DegenerateMode("branch_phase: omega/big_omega out of range");
    const double th = m.big_omega * t;
    const double sin_th = std::sin(th);
    const double arg = (m.omega * m.omega / m.big_omega) * (t - sin_th / m.big_omega) -
                       s * m.omega0 * t -
                       s * c * (m.lambda.real() * sin_th +
                                m.lambda.imag() * (1.0 - std::cos(th)));
    return {std::cos(arg), std::sin(arg)};
}

namespace detail {

// Every closed-form per-mode factor has the shape
//   exp(env_cos (1 - cos Wt) + env_t2 t^2)
//     * [p e^{-i Phi(t)} + q e^{+i Phi(t)}],
//   Phi(t) = lin t + amp_sin sin(Wt) + amp_cos (1 - cos(Wt)),
// which the product accumulators evaluate either directly or, above
// kLogProductThreshold, in log-magnitude form with rotor recurrences.
struct FactorParams {
    double p = 1.0, q = 0.0;  // |alpha|^2, |beta|^2
    double big_omega = 0.0;
    double env_cos = 0.0;  // <= 0
    double env_t2 = 0.0;   // <= 0
    double lin = 0.0;
    double amp_sin = 0.0, amp_cos = 0.0;
};

struct ModeTerm {
    double log_env = 0.0;
    Complex mix{1.0, 0.0};  // |mix| <= p + q
};

// Envelope coefficients are kept finite: exp(c x) is identically 0 for any
// x > 0 once c is at the bottom of the double range, and clamping avoids the
// -inf * 0 = NaN at x = 0 for absurdly large couplings.
inline double finite_env(double c) {
    return std::max(c, std::numeric_limits<double>::lowest());
}

inline ModeTerm eval_term(const FactorParams& f, double t) {
    const double th = f.big_omega * t;
    const double s = std::sin(th);
    const double omc = 1.0 - std::cos(th);
    const double phase = f.lin * t + f.amp_sin * s + f.amp_cos * omc;
    return {f.env_cos * omc + f.env_t2 * t * t,
            {(f.p + f.q) * std::cos(phase), (f.q - f.p) * std::sin(phase)}};
}

inline FactorParams coherent_params(const ModeParams& m) {
    FactorParams f;
    f.p = std::norm(m.alpha);
    f.q = std::norm(m.beta);
    f.lin = 2.0 * m.omega0;
    if (m.big_omega == 0.0) {
        if (m.omega != 0.0)
            throw DegenerateMode("mode with big_omega = 0 and omega != 0");
        return f;  // spin-only factor
    }
    const double c = m.omega / m.big_omega;
    if (std::abs(c) > kMaxCouplingRatio)
        throw DegenerateMode("omega/big_omega ratio out of supported range");
    f.big_omega = m.big_omega;
    f.env_cos = finite_env(-4.0 * c * c);
    f.amp_sin = 4.0 * c * m.lambda.real();
    f.amp_cos = 4.0 * c * m.lambda.imag();
    return f;
}

inline FactorParams thermal_params(const ModeParams& m, double temperature,
                                   CothVariant variant) {
    const double x = variant == CothVariant::PaperCoth
                         ? m.big_omega / temperature
                         : m.big_omega / (2.0 * temperature);
    const double c = m.omega / m.big_omega;
    if (std::abs(c) > kMaxCouplingRatio)
        throw ConfigInvalid("omega/big_omega ratio out of supported range");
    FactorParams f;
    f.p = std::norm(m.alpha);
    f.q = std::norm(m.beta);
    f.big_omega = m.big_omega;
    f.env_cos = finite_env(-4.0 * c * c * coth_safe(x));
    f.lin = 2.0 * m.omega0;
    return f;
}

inline FactorParams short_time_params(const ModeParams& m) {
    FactorParams f;
    f.p = std::norm(m.alpha);
    f.q = std::norm(m.beta);
    f.env_t2 = finite_env(-2.0 * m.omega * m.omega);
    f.lin = 4.0 * m.omega * m.lambda.real() + 2.0 * m.omega0;
    return f;
}

inline FactorParams spin_only_params(const ModeParams& m) {
    FactorParams f;
    f.p = std::norm(m.alpha);
    f.q = std::norm(m.beta);
    f.lin = 2.0 * m.omega0;
    return f;
}

// Log-magnitude + direction accumulator for one grid point. The direction is
// flushed into the log only when its magnitude threatens to underflow.
struct LogAccumulator {
    double log_mag = 0.0;
    Complex dir{1.0, 0.0};

    void multiply(Complex mix) {
        dir *= mix;
        const double n2 = std::norm(dir);
        if (n2 < 1e-240) {
            if (n2 == 0.0) {
                log_mag = -std::numeric_limits<double>::infinity();
                dir = {1.0, 0.0};
            } else {
                log_mag += 0.5 * std::log(n2);
                dir /= std::sqrt(n2);
            }
        }
    }

    Complex value() const {
        const double n2 = std::norm(dir);
        if (n2 == 0.0) return {0.0, 0.0};
        return std::exp(log_mag + 0.5 * std::log(n2)) * dir / std::sqrt(n2);
    }
};

// One chunk [lo, hi) of grid points, all modes, in log form. sin/cos of the
// two per-mode angles advance by unit-rotor recurrence with a Newton
// renormalization each step and a direct refresh at every 32nd absolute grid
// index, so results do not depend on how points are chunked across threads.
inline void eval_log_chunk(const std::vector<FactorParams>& params,
                           const TimeGrid& grid, std::size_t lo, std::size_t hi,
                           std::vector<Complex>& out) {
    constexpr std::size_t kRefresh = 32;
    const std::size_t n = hi - lo;
    std::vector<LogAccumulator> acc(n);
    const double dt =
        grid.points > 1
            ? (grid.t_end - grid.t_start) / static_cast<double>(grid.points - 1)
            : 0.0;

    for (const FactorParams& f : params) {
        const Complex z_step{std::cos(f.big_omega * dt), std::sin(f.big_omega * dt)};
        const Complex w_step{std::cos(f.lin * dt), -std::sin(f.lin * dt)};
        Complex z, w;  // (cos Wt, sin Wt), e^{-i lin t}
        auto refresh = [&](std::size_t j) {
            const double t = grid.at(j);
            z = {std::cos(f.big_omega * t), std::sin(f.big_omega * t)};
            w = {std::cos(f.lin * t), -std::sin(f.lin * t)};
        };
        auto advance = [&] {
            z *= z_step;
            z *= 0.5 * (3.0 - std::norm(z));
            w *= w_step;
            w *= 0.5 * (3.0 - std::norm(w));
        };

        const std::size_t base = lo - lo % kRefresh;
        refresh(base);
        for (std::size_t j = base; j < hi; ++j) {
            if (j != base) {
                if (j % kRefresh == 0) refresh(j);
                else advance();
            }
            if (j < lo) continue;

            const double t = grid.at(j);
            double omc = 1.0 - z.real();
            if (omc < 0.0) omc = 0.0;
            double cphi = 1.0, sphi = 0.0;
            if (f.amp_sin != 0.0 || f.amp_cos != 0.0) {
                const double phi = f.amp_sin * z.imag() + f.amp_cos * omc;
                cphi = std::cos(phi);
                sphi = std::sin(phi);
            }
            // e^{-i Phi} = w (cphi - i sphi)
            const double ere = w.real() * cphi + w.imag() * sphi;
            const double eim = w.imag() * cphi - w.real() * sphi;
            LogAccumulator& a = acc[j - lo];
            a.log_mag += f.env_cos * omc + f.env_t2 * t * t;
            a.multiply({(f.p + f.q) * ere, (f.p - f.q) * eim});
        }
    }
    for (std::size_t j = lo; j < hi; ++j) out[j] = acc[j - lo].value();
}

template <class ParamFn>
DecoherenceSeries evaluate_product(const BathConfig& config, const TimeGrid& grid,
                                   Method method, ParamFn&& param_fn, int threads) {
    validate_config(config);
    validate_grid(grid);

    std::vector<FactorParams> params;
    params.reserve(config.modes.size());
    for (const ModeParams& m : config.modes) params.push_back(param_fn(m));

    DecoherenceSeries series;
    series.grid = grid;
    series.method = method;
    series.values.resize(grid.points);

    if (params.size() <= kLogProductThreshold) {
        parallel_for_index(grid.points, threads, [&](std::size_t i) {
            const double t = grid.at(i);
            Complex r{1.0, 0.0};
            for (const FactorParams& f : params) {
                const ModeTerm term = eval_term(f, t);
                r *= std::exp(term.log_env) * term.mix;
            }
            series.values[i] = r;
        });
    } else {
        const std::size_t chunks =
            std::min<std::size_t>(std::max(threads, 1), grid.points);
        parallel_for_index(chunks, threads, [&](std::size_t c) {
            const std::size_t lo = c * grid.points / chunks;
            const std::size_t hi = (c + 1) * grid.points / chunks;
            eval_log_chunk(params, grid, lo, hi, series.values);
        });
    }
    series.meta["method"] = method_name(method);
    return series;
}

}  // namespace detail

// Per-mode factor composed from branch phases and coherent-state overlaps:
// |alpha|^2 conj(A^-) A^+ <u^-|u^+> + |beta|^2 conj(A^+) A^- <u^+|u^->.
// Algebraically identical to the explicit product form used by
// decoherence_coherent (agreement within 1e-13 is a tested invariant).
inline Complex mode_factor_coherent(const ModeParams& m, double t) {
    const double p = std::norm(m.alpha);
    const double q = std::norm(m.beta);
    if (m.big_omega == 0.0) {
        if (m.omega != 0.0)
            throw DegenerateMode("mode_factor_coherent: big_omega = 0 with omega != 0");
        const double phase = 2.0 * m.omega0 * t;
        return {(p + q) * std::cos(phase), (q - p) * std::sin(phase)};
    }
    const Complex u_plus = branch_eigenvalue(m, BranchSign::Plus, t);
    const Complex u_minus = branch_eigenvalue(m, BranchSign::Minus, t);
    const Complex a_plus = branch_phase(m, BranchSign::Plus, t);
    const Complex a_minus = branch_phase(m, BranchSign::Minus, t);
    return p * std::conj(a_minus) * a_plus * coherent_overlap(u_minus, u_plus) +
           q * std::conj(a_plus) * a_minus * coherent_overlap(u_plus, u_minus);
}

// Per-mode thermal factor with the chosen coth argument: big_omega/T, or the
// independent-boson big_omega/(2T). See CothVariant; compare adjudicates.
inline Complex mode_factor_thermal(const ModeParams& m, double temperature,
                                   double t, CothVariant variant) {
    if (!(temperature > 0.0))
        throw ConfigInvalid("mode_factor_thermal: temperature must be > 0");
    if (!(m.big_omega > 0.0))
        throw ConfigInvalid("mode_factor_thermal: big_omega must be > 0");
    const detail::ModeTerm term =
        detail::eval_term(detail::thermal_params(m, temperature, variant), t);
    return std::exp(term.log_env) * term.mix;
}

inline DecoherenceSeries decoherence_coherent(const BathConfig& config,
                                              const TimeGrid& grid,
                                              int threads = 1) {
    if (config.phonons.kind != PhononKind::Coherent)
        throw ConfigInvalid("decoherence_coherent: phonon preparation must be coherent");
    return detail::evaluate_product(config, grid, Method::CoherentClosed,
                                    detail::coherent_params, threads);
}

// Thermal preparation carries no coherent displacement: every lambda field is
// ignored, and the result is invariant under changes to them.
inline DecoherenceSeries decoherence_thermal(const BathConfig& config,
                                             const TimeGrid& grid,
                                             CothVariant variant,
                                             int threads = 1) {
    if (config.phonons.kind != PhononKind::Thermal)
        throw ConfigInvalid("decoherence_thermal: phonon preparation must be thermal");
    const double temperature = config.phonons.temperature;
    if (!(temperature > 0.0))
        throw ConfigInvalid("decoherence_thermal: temperature must be > 0");
    for (std::size_t k = 0; k < config.modes.size(); ++k)
        if (!(config.modes[k].big_omega > 0.0))
            throw ConfigInvalid("mode " + std::to_string(k) +
                                ": thermal evaluation requires big_omega > 0");
    const Method method = variant == CothVariant::PaperCoth
                              ? Method::ThermalClosedPaperCoth
                              : Method::ThermalClosedHalfCoth;
    auto series = detail::evaluate_product(
        config, grid, method,
        [temperature, variant](const ModeParams& m) {
            return detail::thermal_params(m, temperature, variant);
        },
        threads);
    series.meta["coth_variant"] = coth_variant_name(variant);
    return series;
}

inline DecoherenceSeries decoherence_short_time(const BathConfig& config,
                                                const TimeGrid& grid,
                                                int threads = 1) {
    if (config.phonons.kind != PhononKind::Coherent)
        throw ConfigInvalid("decoherence_short_time: phonon preparation must be coherent");
    return detail::evaluate_product(config, grid, Method::ShortTime,
                                    detail::short_time_params, threads);
}

// r(t) = Pi_k (|alpha_k|^2 e^{-2i omega0_k t} + |beta_k|^2 e^{+2i omega0_k t});
// both the big_omega,omega -> 0 limit and the big_omega/omega -> inf limit.
inline DecoherenceSeries spin_only_factor(const BathConfig& config,
                                          const TimeGrid& grid,
                                          int threads = 1) {
    return detail::evaluate_product(config, grid, Method::SpinOnly,
                                    detail::spin_only_params, threads);
}

// Gamma^2 of the large-N Gaussian law |r| ~ exp(-Gamma^2 t^2).
inline double gaussian_rate(const BathConfig& config) {
    if (config.phonons.kind != PhononKind::Coherent)
        throw ConfigInvalid("gaussian_rate: phonon preparation must be coherent");
    validate_config(config);
    double rate = 0.0;
    for (const ModeParams& m : config.modes) {
        const double p = std::norm(m.alpha);
        const double q = std::norm(m.beta);
        const double f = 2.0 * m.omega * m.lambda.real() + m.omega0;
        rate += 8.0 * p * q * f * f + 2.0 * m.omega * m.omega;
    }
    return rate;
}

inline double gaussian_envelope(const BathConfig& config, double t) {
    if (t == 0.0) return 1.0;
    return std::exp(-gaussian_rate(config) * t * t);
}

inline DecoherenceSeries gaussian_series(const BathConfig& config,
                                         const TimeGrid& grid) {
    validate_grid(grid);
    const double rate = gaussian_rate(config);
    DecoherenceSeries series;
    series.grid = grid;
    series.method = Method::GaussianEnvelope;
    series.values.resize(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) {
        const double t = grid.at(i);
        series.values[i] = Complex(t == 0.0 ? 1.0 : std::exp(-rate * t * t), 0.0);
    }
    series.meta["method"] = method_name(Method::GaussianEnvelope);
    series.meta["gamma2"] = std::to_string(rate);
    return series;
}

// Reduced 2x2 density matrix of the central spin, row/column order (up, down).
using Density2x2 = std::array<std::array<Complex, 2>, 2>;

inline Density2x2 reduced_density(const CentralAmplitudes& central, Complex r) {
    detail::validate_pair_norm(central.c_up, central.c_down, "central");
    if (std::abs(r) > 1.0 + 1e-9)
        throw ConfigInvalid("reduced_density: |r| > 1");
    const Complex off = central.c_up * std::conj(central.c_down) * r;
    return {{{Complex(std::norm(central.c_up), 0.0), off},
             {std::conj(off), Complex(std::norm(central.c_down), 0.0)}}};
}

// Gibbs occupation of a bath spin with level splitting 2*epsilon:
// p_up = e^{epsilon/T} / (2 cosh(epsilon/T)), evaluated overflow-safe.
inline std::pair<double, double> thermal_spin_polarization(double epsilon,
                                                           double temperature) {
    if (!(temperature > 0.0))
        throw ConfigInvalid("thermal_spin_polarization: temperature must be > 0");
    const double x = epsilon / temperature;
    const double p_up = 1.0 / (1.0 + std::exp(-2.0 * x));
    return {p_up, 1.0 - p_up};
}

}  // namespace dephasim
