#pragma once

// Exact unit normalization in double arithmetic.
//
// The decoherence product evaluates to 1 at t = 0 only as exactly as each
// mode's |alpha|^2 + |beta|^2 (and the oracle's state norm / Gibbs weight sum)
// evaluates to 1. Plain rescaling leaves the computed sum one or two ulps off;
// after rescaling we therefore nudge the largest component by ulps until the
// double-precision sum, evaluated in the same order the evaluators use, is
// exactly 1.0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace dephasim::detail {

// Step x one ulp so that x^2 grows (away from zero) or shrinks (toward zero).
inline double step_magnitude(double x, bool grow) {
    const double inf = std::numeric_limits<double>::infinity();
    const double toward = grow ? std::copysign(inf, x) : 0.0;
    return std::nextafter(x, toward);
}

// Nudge slot until eval() == 1.0. eval must be strictly increasing in |slot|.
template <class Eval>
bool nudge_to_one(double& slot, Eval&& eval, int max_steps = 128) {
    if (slot == 0.0) return eval() == 1.0;
    for (int i = 0; i < max_steps; ++i) {
        const double s = eval();
        if (s == 1.0) return true;
        slot = step_magnitude(slot, s < 1.0);
    }
    return eval() == 1.0;
}

// Rescale w so its sequential double sum is exactly 1.0 (best effort; the
// residual is at most an ulp if the nudge stalls). Elements must be >= 0 with
// a positive sum.
inline void normalize_weights_exact(std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += x;
    for (double& x : w) x /= s;

    std::vector<std::size_t> order(w.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });

    auto sum = [&] {
        double acc = 0.0;
        for (double x : w) acc += x;
        return acc;
    };
    for (std::size_t idx : order) {
        double slot = w[idx];
        const bool ok = nudge_to_one(slot, [&] {
            w[idx] = slot;
            return sum();
        });
        w[idx] = slot;
        if (ok) return;
    }
}

// Rescale (a, b) so std::norm(a) + std::norm(b) == 1.0 exactly (best effort).
inline void normalize_pair_exact(std::complex<double>& a, std::complex<double>& b) {
    const double s = std::sqrt(std::norm(a) + std::norm(b));
    a /= s;
    b /= s;

    double* slots[4] = {nullptr, nullptr, nullptr, nullptr};
    double are = a.real(), aim = a.imag(), bre = b.real(), bim = b.imag();
    slots[0] = &are; slots[1] = &aim; slots[2] = &bre; slots[3] = &bim;
    std::sort(std::begin(slots), std::end(slots),
              [](const double* x, const double* y) { return std::abs(*x) > std::abs(*y); });

    auto sum = [&] {
        const std::complex<double> aa(are, aim), bb(bre, bim);
        return std::norm(aa) + std::norm(bb);
    };
    for (double* slot : slots) {
        if (nudge_to_one(*slot, sum)) break;
    }
    a = {are, aim};
    b = {bre, bim};
}

// Rescale amps so the sequential sum of std::norm(amps[n]) == 1.0 (best
// effort). Used for truncated states whose self-overlap should be exact.
inline void normalize_amps_exact(std::vector<std::complex<double>>& amps) {
    double s = 0.0;
    for (const auto& z : amps) s += std::norm(z);
    const double scale = 1.0 / std::sqrt(s);
    for (auto& z : amps) z *= scale;

    auto sum = [&] {
        double acc = 0.0;
        for (const auto& z : amps) acc += std::norm(z);
        return acc;
    };

    // Largest component first, then progressively finer ones.
    std::vector<std::size_t> order(amps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::norm(amps[x]) > std::norm(amps[y]);
    });
    const std::size_t tries = std::min<std::size_t>(order.size(), 6);
    for (std::size_t i = 0; i < tries; ++i) {
        auto& z = amps[order[i]];
        double re = z.real();
        const bool ok = nudge_to_one(re, [&] {
            z = {re, z.imag()};
            return sum();
        });
        z = {re, z.imag()};
        if (ok) return;
    }
}

}  // namespace dephasim::detail
