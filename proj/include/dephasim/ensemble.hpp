#pragma once

// Seeded random bath configurations and the Gaussian-decay fit.
//
// Stream layout: one mt19937_64 substream per mode (substream k+1 for mode k,
// substream 0 for the central amplitudes), each seeded by splitmix64 from the
// ensemble seed and the substream index. The engine stream is fully specified
// by the standard; the uniform/normal/disk mappings below are hand-rolled so
// configs do not depend on library distribution internals.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dephasim/closed_form.hpp"
#include "dephasim/detail/exact_norm.hpp"
#include "dephasim/errors.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

enum class SpinInit { UniformBloch, Polarized, GibbsThermal };

struct EnsembleSpec {
    std::size_t n_modes = 1;
    std::pair<double, double> omega0_range{0.5, 1.5};
    std::pair<double, double> omega_range{0.05, 0.3};
    std::pair<double, double> big_omega_range{0.8, 1.2};
    double lambda_radius = 1.0;
    SpinInit spin_init = SpinInit::UniformBloch;
    std::pair<double, double> epsilon_range{0.0, 1.0};  // GibbsThermal splittings
    double spin_temperature = 1.0;                      // GibbsThermal bath T
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class SubStream {
  public:
    SubStream(std::uint64_t seed, std::uint64_t index)
        : engine_(splitmix64(splitmix64(seed) ^ (index + 1))) {}

    double uniform01() {  // [0, 1), 53-bit
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    double normal() {  // Marsaglia polar
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    Complex disk(double radius) {  // uniform on |z| <= radius, by rejection
        if (radius == 0.0) return {0.0, 0.0};
        double x, y;
        do {
            x = 2.0 * uniform01() - 1.0;
            y = 2.0 * uniform01() - 1.0;
        } while (x * x + y * y > 1.0);
        return {radius * x, radius * y};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Haar-uniform single-spin state, exactly normalized.
inline std::pair<Complex, Complex> haar_pair(SubStream& rng) {
    Complex a{rng.normal(), rng.normal()};
    Complex b{rng.normal(), rng.normal()};
    normalize_pair_exact(a, b);
    return {a, b};
}

inline void validate_range(std::pair<double, double> r, const char* name) {
    if (!std::isfinite(r.first) || !std::isfinite(r.second) || r.first > r.second)
        throw SpecInvalid(std::string("ensemble: invalid range for ") + name);
}

}  // namespace detail

// Deterministic function of the spec: identical spec, identical config,
// bit for bit.
inline BathConfig sample_config(const EnsembleSpec& spec) {
    if (spec.n_modes == 0) throw SpecInvalid("ensemble: n_modes must be >= 1");
    detail::validate_range(spec.omega0_range, "omega0_range");
    detail::validate_range(spec.omega_range, "omega_range");
    detail::validate_range(spec.big_omega_range, "big_omega_range");
    if (!(spec.big_omega_range.first > 0.0))
        throw SpecInvalid("ensemble: big_omega_range must be > 0");
    if (!(spec.lambda_radius >= 0.0))
        throw SpecInvalid("ensemble: lambda_radius must be >= 0");
    if (spec.spin_init == SpinInit::GibbsThermal) {
        detail::validate_range(spec.epsilon_range, "epsilon_range");
        if (!(spec.spin_temperature > 0.0))
            throw SpecInvalid("ensemble: spin temperature must be > 0");
    }

    BathConfig config;
    {
        detail::SubStream central(spec.seed, 0);
        auto [up, down] = detail::haar_pair(central);
        config.central = {up, down};
    }
    config.modes.reserve(spec.n_modes);
    for (std::size_t k = 0; k < spec.n_modes; ++k) {
        detail::SubStream rng(spec.seed, k + 1);
        ModeParams m;
        m.omega0 = rng.uniform(spec.omega0_range.first, spec.omega0_range.second);
        m.omega = rng.uniform(spec.omega_range.first, spec.omega_range.second);
        m.big_omega =
            rng.uniform(spec.big_omega_range.first, spec.big_omega_range.second);
        m.lambda = rng.disk(spec.lambda_radius);
        switch (spec.spin_init) {
            case SpinInit::UniformBloch: {
                auto [a, b] = detail::haar_pair(rng);
                m.alpha = a;
                m.beta = b;
                break;
            }
            case SpinInit::Polarized:
                m.alpha = {1.0, 0.0};
                m.beta = {0.0, 0.0};
                break;
            case SpinInit::GibbsThermal: {
                const double eps =
                    rng.uniform(spec.epsilon_range.first, spec.epsilon_range.second);
                const auto [p_up, p_down] =
                    thermal_spin_polarization(eps, spec.spin_temperature);
                m.alpha = {std::sqrt(p_up), 0.0};
                m.beta = {std::sqrt(p_down), 0.0};
                detail::normalize_pair_exact(m.alpha, m.beta);
                break;
            }
        }
        config.modes.push_back(m);
    }
    config.phonons = PhononPrep::coherent();
    return config;
}

// Through-origin least squares of -ln|r(t)| against t^2 over 0 < t <= t_cut,
// skipping points with |r| <= 1e-12. Returns the fitted Gamma^2.
inline double fit_gaussian_rate(const DecoherenceSeries& series, double t_cut) {
    double num = 0.0, den = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double t = series.grid.at(i);
        if (!(t > 0.0) || t > t_cut) continue;
        const double mag = std::abs(series.values[i]);
        if (mag <= 1e-12) continue;
        const double x = t * t;
        num += x * (-std::log(mag));
        den += x * x;
        ++used;
    }
    if (used < 5)
        throw InsufficientData("fit_gaussian_rate: need >= 5 usable points, have " +
                               std::to_string(used));
    return num / den;
}

}  // namespace dephasim
