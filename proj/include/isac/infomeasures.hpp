#pragma once

// Entropy, mutual information and divergences in bits. 0 log 0 = 0 and
// 0 log(0/0) = 0; an absolute-continuity failure yields +infinity.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "isac/model.hpp"

namespace isac {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h < 0.0 ? 0.0 : h;
}

inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return kInfinity;
        d += p[i] * std::log2(p[i] / q[i]);
    }
    return d < 0.0 ? 0.0 : d;
}

/// Output pmf sum_x p_x(x) w(.|x).
inline Pmf output_distribution(std::span<const double> p_x, const InputConditional& w) {
    if (p_x.size() != w.nx()) throw std::invalid_argument("output_distribution: input length mismatch");
    Pmf q(w.no(), 0.0);
    for (std::size_t x = 0; x < w.nx(); ++x) {
        if (p_x[x] == 0.0) continue;
        for (std::size_t o = 0; o < w.no(); ++o) q[o] += p_x[x] * w(x, o);
    }
    return q;
}

/// I(X;Y) for input p_x over the channel w(y|x).
inline double mutual_information(std::span<const double> p_x, const InputConditional& w) {
    const Pmf q = output_distribution(p_x, w);
    double mi = entropy(q);
    for (std::size_t x = 0; x < w.nx(); ++x)
        if (p_x[x] > 0.0) mi -= p_x[x] * entropy(w.row(x));
    return mi < 0.0 ? 0.0 : mi;
}

/// e(x) = D(p(.|x) || q(.|x)) for every input letter.
inline std::vector<double> row_divergences(const InputConditional& p, const InputConditional& q) {
    if (p.nx() != q.nx() || p.no() != q.no()) throw std::invalid_argument("row_divergences: table shape mismatch");
    std::vector<double> e(p.nx());
    for (std::size_t x = 0; x < p.nx(); ++x) e[x] = kl_divergence(p.row(x), q.row(x));
    return e;
}

/// E_{P_X}[ D(p(.|X) || q(.|X)) ]; infinite iff some x with positive mass has an infinite row.
inline double expected_kl(std::span<const double> p_x, const InputConditional& p, const InputConditional& q) {
    if (p_x.size() != p.nx()) throw std::invalid_argument("expected_kl: input length mismatch");
    const std::vector<double> e = row_divergences(p, q);
    double sum = 0.0;
    for (std::size_t x = 0; x < e.size(); ++x) {
        if (p_x[x] <= 0.0) continue;
        if (std::isinf(e[x])) return kInfinity;
        sum += p_x[x] * e[x];
    }
    return sum;
}

} // namespace isac
