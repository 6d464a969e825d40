#pragma once

// Brute-force decoherence factor in a truncated number-state basis. Each mode
// is propagated under its two branch Hamiltonians by full eigendecomposition
// of the real symmetric tridiagonal matrix (one factorization per mode and
// branch, reused for every grid time); r(t) is assembled from state overlaps
// (coherent preparation) or Gibbs-weighted echo amplitudes (thermal). No
// closed-form expression for r(t) enters anywhere in this header.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dephasim/detail/exact_norm.hpp"
#include "dephasim/detail/parallel.hpp"
#include "dephasim/errors.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

// Complex amplitudes over number states |0..n_max>.
struct FockVector {
    std::vector<Complex> amps;

    int n_max() const { return static_cast<int>(amps.size()) - 1; }

    double norm2() const {
        double s = 0.0;
        for (const Complex& z : amps) s += std::norm(z);
        return s;
    }
};

inline Complex overlap(const FockVector& a, const FockVector& b) {
    if (a.amps.size() != b.amps.size())
        throw ConfigInvalid("overlap: dimension mismatch");
    Complex s{0.0, 0.0};
    for (std::size_t n = 0; n < a.amps.size(); ++n)
        s += std::conj(a.amps[n]) * b.amps[n];
    return s;
}

// Single-mode branch Hamiltonian h^sigma = sigma omega0 + sigma omega (p^+ + p)
// + big_omega p^+ p restricted to the truncated basis:
// diag[n] = sigma omega0 + big_omega n, offdiag[n] = sigma omega sqrt(n+1).
struct TridiagonalHamiltonian {
    std::vector<double> diag;     // length n_max + 1
    std::vector<double> offdiag;  // length n_max
};

inline TridiagonalHamiltonian build_mode_hamiltonian(const ModeParams& m,
                                                     BranchSign sign, int n_max) {
    if (n_max < 1) throw ConfigInvalid("build_mode_hamiltonian: n_max must be >= 1");
    const double s = sigma_of(sign);
    TridiagonalHamiltonian h;
    h.diag.resize(n_max + 1);
    h.offdiag.resize(n_max);
    for (int n = 0; n <= n_max; ++n) h.diag[n] = s * m.omega0 + m.big_omega * n;
    for (int n = 0; n < n_max; ++n) h.offdiag[n] = s * m.omega * std::sqrt(n + 1.0);
    return h;
}

// Default basis cut for one mode: generous Poisson-tail headroom around the
// largest coherent displacement |lambda| + 2 omega/big_omega the branch
// trajectories reach. Thermal runs start from number states instead of
// |lambda>, so the displacement term alone sets the spread and the Gibbs
// cutoff is added on top by the caller.
inline int default_n_max(const ModeParams& m, PhononKind kind) {
    const double d = m.big_omega > 0.0 ? 2.0 * std::abs(m.omega) / m.big_omega : 0.0;
    const double s = kind == PhononKind::Coherent ? std::abs(m.lambda) + d : d;
    return static_cast<int>(std::ceil(s * s + 10.0 * s + 20.0));
}

// Smallest cutoff with discarded Gibbs weight e^{-big_omega (n+1)/T} < tail.
inline int gibbs_cutoff(double big_omega, double temperature, double tail) {
    const double n = temperature / big_omega * std::log(1.0 / tail) - 1.0;
    return std::max(0, static_cast<int>(std::ceil(n)));
}

// Truncated coherent state, amps[n] = e^{-|lambda|^2/2} lambda^n / sqrt(n!)
// via the stable recurrence amps[n] = amps[n-1] lambda / sqrt(n). The result
// is renormalized exactly so its self-overlap is 1.0 in double arithmetic.
inline FockVector coherent_vector(Complex lambda, int n_max,
                                  double tail_budget = 1e-12) {
    if (n_max < 1) throw ConfigInvalid("coherent_vector: n_max must be >= 1");
    FockVector psi;
    psi.amps.resize(n_max + 1);
    psi.amps[0] = Complex(std::exp(-0.5 * std::norm(lambda)), 0.0);
    for (int n = 1; n <= n_max; ++n)
        psi.amps[n] = psi.amps[n - 1] * lambda / std::sqrt(static_cast<double>(n));

    double top = 0.0;
    for (int n = std::max(0, n_max - 4); n <= n_max; ++n) top += std::norm(psi.amps[n]);
    const double deficit = std::abs(1.0 - psi.norm2());
    if (top > tail_budget || deficit > tail_budget)
        throw TruncationTooSmall("coherent_vector: |lambda| = " +
                                 std::to_string(std::abs(lambda)) +
                                 " needs n_max > " + std::to_string(n_max));
    detail::normalize_amps_exact(psi.amps);
    return psi;
}

// Eigendecomposition of one (mode, sigma) branch; immutable after
// construction, safe for concurrent reads.
class BranchPropagator {
  public:
    explicit BranchPropagator(const TridiagonalHamiltonian& h) {
        const int dim = static_cast<int>(h.diag.size());
        if (dim < 2 || h.offdiag.size() + 1 != h.diag.size())
            throw ConfigInvalid("BranchPropagator: inconsistent tridiagonal sizes");
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(h.diag.data(), dim);
        Eigen::VectorXd sub =
            Eigen::Map<const Eigen::VectorXd>(h.offdiag.data(), dim - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success)
            throw EigenFailure("symmetric tridiagonal eigensolver failed");
        evals_ = solver.eigenvalues();
        evecs_ = solver.eigenvectors();
    }

    int dim() const { return static_cast<int>(evals_.size()); }

    // e^{-i t h} psi0; t == 0 is the exact identity.
    FockVector evolve(const FockVector& psi0, double t) const {
        if (static_cast<int>(psi0.amps.size()) != dim())
            throw ConfigInvalid("propagate_fock: state dimension mismatch");
        if (t == 0.0) return psi0;
        Eigen::VectorXd re(dim()), im(dim());
        for (int n = 0; n < dim(); ++n) {
            re[n] = psi0.amps[n].real();
            im[n] = psi0.amps[n].imag();
        }
        const Eigen::VectorXd yr = evecs_.transpose() * re;
        const Eigen::VectorXd yi = evecs_.transpose() * im;
        return assemble(yr, yi, t);
    }

    // e^{-i t h} |n>.
    FockVector evolve_basis(int n, double t) const {
        if (n < 0 || n >= dim())
            throw ConfigInvalid("evolve_basis: index out of range");
        if (t == 0.0) {
            FockVector e;
            e.amps.assign(dim(), Complex(0.0, 0.0));
            e.amps[n] = Complex(1.0, 0.0);
            return e;
        }
        const Eigen::VectorXd yr = evecs_.row(n).transpose();
        return assemble(yr, Eigen::VectorXd::Zero(dim()), t);
    }

  private:
    FockVector assemble(const Eigen::VectorXd& yr, const Eigen::VectorXd& yi,
                        double t) const {
        Eigen::VectorXd zr(dim()), zi(dim());
        for (int j = 0; j < dim(); ++j) {
            const double c = std::cos(evals_[j] * t);
            const double s = std::sin(evals_[j] * t);
            // (yr + i yi) * e^{-i E t}
            zr[j] = yr[j] * c + yi[j] * s;
            zi[j] = yi[j] * c - yr[j] * s;
        }
        const Eigen::VectorXd outr = evecs_ * zr;
        const Eigen::VectorXd outi = evecs_ * zi;
        FockVector out;
        out.amps.resize(dim());
        for (int n = 0; n < dim(); ++n) out.amps[n] = Complex(outr[n], outi[n]);
        return out;
    }

    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
};

inline FockVector propagate_fock(const TridiagonalHamiltonian& h, double t,
                                 const FockVector& psi0) {
    return BranchPropagator(h).evolve(psi0, t);
}

namespace detail {

struct ModePropagators {
    BranchPropagator plus;
    BranchPropagator minus;

    ModePropagators(const ModeParams& m, int n_max)
        : plus(build_mode_hamiltonian(m, BranchSign::Plus, n_max)),
          minus(build_mode_hamiltonian(m, BranchSign::Minus, n_max)) {}
};

inline Complex weighted_echo(const ModeParams& m, Complex minus_plus_overlap) {
    return std::norm(m.alpha) * minus_plus_overlap +
           std::norm(m.beta) * std::conj(minus_plus_overlap);
}

inline Complex coherent_factor(const ModeParams& m, const ModePropagators& props,
                               const FockVector& psi0, double t) {
    const FockVector psi_plus = props.plus.evolve(psi0, t);
    const FockVector psi_minus = props.minus.evolve(psi0, t);
    return weighted_echo(m, overlap(psi_minus, psi_plus));
}

inline Complex thermal_factor(const ModeParams& m, const ModePropagators& props,
                              const std::vector<double>& weights, double t) {
    Complex acc{0.0, 0.0};
    for (std::size_t n = 0; n < weights.size(); ++n) {
        const FockVector psi_plus = props.plus.evolve_basis(static_cast<int>(n), t);
        const FockVector psi_minus = props.minus.evolve_basis(static_cast<int>(n), t);
        acc += weights[n] * weighted_echo(m, overlap(psi_minus, psi_plus));
    }
    return acc;
}

// Gibbs weights over the truncated set, renormalized to an exact unit sum.
inline std::vector<double> gibbs_weights(double big_omega, double temperature,
                                         double tail, int n_max) {
    const int cut = gibbs_cutoff(big_omega, temperature, tail);
    if (cut + 5 > n_max)
        throw TruncationTooSmall("thermal oracle: Gibbs cutoff " +
                                 std::to_string(cut) + " exceeds n_max " +
                                 std::to_string(n_max));
    std::vector<double> w(cut + 1);
    for (int n = 0; n <= cut; ++n)
        w[n] = std::exp(-big_omega * n / temperature);
    normalize_weights_exact(w);
    return w;
}

}  // namespace detail

// |alpha|^2 <psi^-(t)|psi^+(t)> + |beta|^2 <psi^+(t)|psi^-(t)> with
// psi^sigma(t) the truncated-basis propagation of |lambda>.
inline Complex oracle_mode_factor_coherent(const ModeParams& m, double t,
                                           int n_max) {
    const FockVector psi0 = coherent_vector(m.lambda, n_max);
    const detail::ModePropagators props(m, n_max);
    return detail::coherent_factor(m, props, psi0, t);
}

// Gibbs-weighted echo sum over number states |n>, truncated where the
// discarded geometric tail drops below gibbs_tail.
inline Complex oracle_mode_factor_thermal(const ModeParams& m, double temperature,
                                          double t, int n_max,
                                          double gibbs_tail = 1e-14) {
    if (!(temperature > 0.0))
        throw ConfigInvalid("oracle_mode_factor_thermal: temperature must be > 0");
    if (!(m.big_omega > 0.0))
        throw ConfigInvalid("oracle_mode_factor_thermal: big_omega must be > 0");
    const std::vector<double> w =
        detail::gibbs_weights(m.big_omega, temperature, gibbs_tail, n_max);
    const detail::ModePropagators props(m, n_max);
    return detail::thermal_factor(m, props, w, t);
}

// Conservative per-mode truncation error: evaluate the factor at n_max and at
// 2 n_max for the worst grid time and report the difference. A basis too
// small to even hold the state reports +inf.
inline double truncation_error_estimate(const ModeParams& m, const PhononPrep& prep,
                                        double t_max, int n_max,
                                        double gibbs_tail = 1e-14) {
    try {
        Complex coarse, fine;
        if (prep.kind == PhononKind::Coherent) {
            coarse = oracle_mode_factor_coherent(m, t_max, n_max);
            fine = oracle_mode_factor_coherent(m, t_max, 2 * n_max);
        } else {
            coarse = oracle_mode_factor_thermal(m, prep.temperature, t_max, n_max,
                                                gibbs_tail);
            fine = oracle_mode_factor_thermal(m, prep.temperature, t_max, 2 * n_max,
                                              gibbs_tail);
        }
        return std::abs(coarse - fine);
    } catch (const TruncationTooSmall&) {
        return std::numeric_limits<double>::infinity();
    }
}

struct TruncationPolicy {
    int n_max_override = 0;  // 0 = policy formula per mode
    int n_max_ceiling = 4096;
    double target_error = 1e-10;
    double gibbs_tail = 1e-14;
    std::size_t max_modes = 16;  // the oracle verifies, it does not sweep
};

inline DecoherenceSeries oracle_decoherence(const BathConfig& config,
                                            const TimeGrid& grid,
                                            const TruncationPolicy& policy = {},
                                            int threads = 1) {
    validate_config(config);
    validate_grid(grid);
    if (config.modes.size() > policy.max_modes)
        throw ConfigInvalid("oracle_decoherence: " +
                            std::to_string(config.modes.size()) +
                            " modes exceeds the oracle bound of " +
                            std::to_string(policy.max_modes));
    const bool thermal = config.phonons.kind == PhononKind::Thermal;
    const double t_max = std::max(std::abs(grid.t_start), std::abs(grid.t_end));

    DecoherenceSeries series;
    series.grid = grid;
    series.method = thermal ? Method::OracleThermal : Method::OracleCoherent;
    series.values.assign(grid.points, Complex(1.0, 0.0));

    std::string n_max_list;
    double bound = 0.0;
    for (std::size_t k = 0; k < config.modes.size(); ++k) {
        const ModeParams& m = config.modes[k];
        int n_max = policy.n_max_override > 0
                        ? policy.n_max_override
                        : default_n_max(m, config.phonons.kind);
        if (thermal)
            n_max += gibbs_cutoff(m.big_omega, config.phonons.temperature,
                                  policy.gibbs_tail);
        n_max = std::min(n_max, policy.n_max_ceiling);

        double est =
            truncation_error_estimate(m, config.phonons, t_max, n_max, policy.gibbs_tail);
        while (est > policy.target_error && n_max < policy.n_max_ceiling) {
            n_max = std::min(2 * n_max, policy.n_max_ceiling);
            est = truncation_error_estimate(m, config.phonons, t_max, n_max,
                                            policy.gibbs_tail);
        }
        if (est > policy.target_error)
            throw TruncationTooSmall(
                "mode " + std::to_string(k) + ": truncation error " +
                std::to_string(est) + " above target at the n_max ceiling " +
                std::to_string(policy.n_max_ceiling));

        const detail::ModePropagators props(m, n_max);
        if (thermal) {
            const std::vector<double> w = detail::gibbs_weights(
                m.big_omega, config.phonons.temperature, policy.gibbs_tail, n_max);
            detail::parallel_for_index(grid.points, threads, [&](std::size_t i) {
                series.values[i] *= detail::thermal_factor(m, props, w, grid.at(i));
            });
        } else {
            const FockVector psi0 = coherent_vector(m.lambda, n_max);
            detail::parallel_for_index(grid.points, threads, [&](std::size_t i) {
                series.values[i] *= detail::coherent_factor(m, props, psi0, grid.at(i));
            });
        }
        n_max_list += (k ? "," : "") + std::to_string(n_max);
        bound = std::max(bound, est);
    }
    series.meta["method"] = method_name(series.method);
    series.meta["n_max"] = n_max_list;
    series.meta["truncation_bound"] = std::to_string(bound);
    if (thermal) series.meta["gibbs_tail"] = std::to_string(policy.gibbs_tail);
    return series;
}

}  // namespace dephasim
