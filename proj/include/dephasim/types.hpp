#pragma once

// Domain types for the phonon-mediated central-spin dephasing model.
// Units: hbar = kB = 1; frequencies and temperatures share one inverse-time
// scale.

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dephasim/errors.hpp"

namespace dephasim {

using Complex = std::complex<double>;

// Tolerance for |alpha|^2 + |beta|^2 = 1 (and the central pair). Configs
// outside it are rejected, never renormalized.
inline constexpr double kNormTolerance = 1e-12;

// Supported magnitude range for frequencies, temperatures, eigenvalues and
// grid times, and for the omega/big_omega ratio. Inside these bounds every
// evaluator provably returns finite values; configs beyond them are rejected
// instead of silently producing inf/NaN.
inline constexpr double kMaxMagnitude = 1e50;
inline constexpr double kMaxCouplingRatio = 1e100;

// Above this mode count the product over modes is accumulated in
// log-magnitude + unit-phase form so |r| can underflow gracefully.
inline constexpr std::size_t kLogProductThreshold = 10000;

// Product of the central and bath spin z-eigenvalues; selects the per-mode
// branch Hamiltonian h^sigma.
enum class BranchSign : int { Plus = +1, Minus = -1 };

inline constexpr double sigma_of(BranchSign s) {
    return s == BranchSign::Plus ? 1.0 : -1.0;
}

struct ModeParams {
    double omega0 = 0.0;     // static spin-spin coupling
    double omega = 0.0;      // phonon-modulated coupling
    double big_omega = 1.0;  // phonon energy; > 0 unless omega == 0
    Complex lambda{0.0, 0.0};  // initial coherent-state eigenvalue
    Complex alpha{1.0, 0.0};   // bath spin-up amplitude
    Complex beta{0.0, 0.0};    // bath spin-down amplitude
};

struct CentralAmplitudes {
    Complex c_up{1.0, 0.0};
    Complex c_down{0.0, 0.0};
};

enum class PhononKind { Coherent, Thermal };

struct PhononPrep {
    PhononKind kind = PhononKind::Coherent;
    double temperature = 0.0;  // meaningful for Thermal only, > 0

    static PhononPrep coherent() { return {PhononKind::Coherent, 0.0}; }
    static PhononPrep thermal(double t) { return {PhononKind::Thermal, t}; }
};

struct BathConfig {
    CentralAmplitudes central;
    std::vector<ModeParams> modes;
    PhononPrep phonons;
};

// Uniform, endpoint-inclusive time grid.
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t points = 1;

    double at(std::size_t i) const {
        if (points <= 1) return t_start;
        if (i == points - 1) return t_end;  // endpoint-inclusive, bit-exact
        return t_start + static_cast<double>(i) * (t_end - t_start) /
                             static_cast<double>(points - 1);
    }

    std::vector<double> times() const {
        std::vector<double> t(points);
        for (std::size_t i = 0; i < points; ++i) t[i] = at(i);
        return t;
    }
};

enum class Method {
    CoherentClosed,
    ThermalClosedPaperCoth,
    ThermalClosedHalfCoth,
    ShortTime,
    GaussianEnvelope,
    SpinOnly,
    OracleCoherent,
    OracleThermal,
};

inline const char* method_name(Method m) {
    switch (m) {
        case Method::CoherentClosed: return "coherent_closed";
        case Method::ThermalClosedPaperCoth: return "thermal_closed_paper_coth";
        case Method::ThermalClosedHalfCoth: return "thermal_closed_half_coth";
        case Method::ShortTime: return "short_time";
        case Method::GaussianEnvelope: return "gaussian_envelope";
        case Method::SpinOnly: return "spin_only";
        case Method::OracleCoherent: return "oracle_coherent";
        case Method::OracleThermal: return "oracle_thermal";
    }
    return "unknown";
}

// One decoherence-factor trace r(t) with provenance.
struct DecoherenceSeries {
    TimeGrid grid;
    std::vector<Complex> values;  // values.size() == grid.points
    Method method = Method::CoherentClosed;
    std::map<std::string, std::string> meta;  // n_max, truncation bound, seed, ...
};

inline void validate_grid(const TimeGrid& grid) {
    if (!(grid.points >= 1)) throw ConfigInvalid("time grid: points must be >= 1");
    if (!std::isfinite(grid.t_start) || !std::isfinite(grid.t_end))
        throw ConfigInvalid("time grid: endpoints must be finite");
    if (std::abs(grid.t_start) > kMaxMagnitude ||
        std::abs(grid.t_end) > kMaxMagnitude)
        throw ConfigInvalid("time grid: endpoints out of supported range");
    if (!(grid.t_end >= grid.t_start))
        throw ConfigInvalid("time grid: t_end must be >= t_start");
}

namespace detail {

inline bool finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void validate_pair_norm(Complex a, Complex b, const std::string& what) {
    if (!finite(a) || !finite(b))
        throw ConfigInvalid(what + ": amplitudes must be finite");
    const double s = std::norm(a) + std::norm(b);
    if (std::abs(s - 1.0) > kNormTolerance)
        throw ConfigInvalid(what + ": amplitudes not normalized, |.|^2 sum = " +
                            std::to_string(s));
}

}  // namespace detail

inline void validate_mode(const ModeParams& m, std::size_t index) {
    const std::string where = "mode " + std::to_string(index);
    if (!std::isfinite(m.omega0) || !std::isfinite(m.omega) ||
        !std::isfinite(m.big_omega) || !detail::finite(m.lambda))
        throw ConfigInvalid(where + ": parameters must be finite");
    if (std::abs(m.omega0) > kMaxMagnitude || std::abs(m.omega) > kMaxMagnitude ||
        m.big_omega > kMaxMagnitude || std::abs(m.lambda) > kMaxMagnitude)
        throw ConfigInvalid(where + ": parameters out of supported range");
    if (m.big_omega < 0.0)
        throw ConfigInvalid(where + ": big_omega must be >= 0");
    detail::validate_pair_norm(m.alpha, m.beta, where);
}

inline void validate_config(const BathConfig& config) {
    if (config.modes.empty()) throw ConfigInvalid("config: modes must be non-empty");
    detail::validate_pair_norm(config.central.c_up, config.central.c_down, "central");
    for (std::size_t k = 0; k < config.modes.size(); ++k)
        validate_mode(config.modes[k], k);
    if (config.phonons.kind == PhononKind::Thermal) {
        if (!(config.phonons.temperature > 0.0))
            throw ConfigInvalid("phonons: thermal temperature must be > 0");
        if (config.phonons.temperature > kMaxMagnitude)
            throw ConfigInvalid("phonons: temperature out of supported range");
    }
}

}  // namespace dephasim
