#pragma once

// Joint types (empirical pmfs of symbol tuples) and strong typicality.
// Counts are exact integers; the empirical pmf is derived on demand.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

#include "isac/model.hpp"

namespace isac {

/// Slack on |n(a)/n - P(a)| <= mu comparisons, absorbing rounding only.
inline constexpr double kTypicalitySlack = 1e-12;

class JointType {
public:
    JointType(std::vector<std::size_t> dims, std::vector<std::uint64_t> counts, std::uint64_t n)
        : dims_(std::move(dims)), counts_(std::move(counts)), n_(n) {}

    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t cells() const noexcept { return counts_.size(); }
    std::uint64_t length() const noexcept { return n_; }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

    /// Row-major cell index of a symbol tuple.
    std::size_t cell(std::span<const std::size_t> symbols) const {
        if (symbols.size() != dims_.size()) throw std::invalid_argument("JointType: tuple arity mismatch");
        std::size_t idx = 0;
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (symbols[i] >= dims_[i]) throw std::out_of_range("JointType: symbol outside alphabet");
            idx = idx * dims_[i] + symbols[i];
        }
        return idx;
    }
    std::size_t cell(std::initializer_list<std::size_t> symbols) const {
        return cell(std::span<const std::size_t>(symbols.begin(), symbols.size()));
    }

    std::uint64_t count(std::initializer_list<std::size_t> symbols) const { return counts_[cell(symbols)]; }

    /// Empirical probability of a cell.
    double pi(std::size_t cell_index) const {
        return static_cast<double>(counts_[cell_index]) / static_cast<double>(n_);
    }
    double pi(std::initializer_list<std::size_t> symbols) const { return pi(cell(symbols)); }

    Pmf empirical() const {
        Pmf p(counts_.size());
        for (std::size_t i = 0; i < counts_.size(); ++i) p[i] = pi(i);
        return p;
    }

    /// Type of the concatenation of the underlying sequences.
    JointType concatenated(const JointType& other) const {
        if (other.dims_ != dims_) throw std::invalid_argument("JointType: alphabet mismatch");
        std::vector<std::uint64_t> c = counts_;
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += other.counts_[i];
        return JointType(dims_, std::move(c), n_ + other.n_);
    }

    friend bool operator==(const JointType&, const JointType&) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_;
};

/// Joint type of k in {1,2,3} equal-length sequences over alphabets of the given sizes.
inline JointType joint_type(std::span<const std::span<const std::size_t>> seqs, std::span<const std::size_t> sizes) {
    if (seqs.empty() || seqs.size() > 3) throw std::invalid_argument("joint_type: between 1 and 3 sequences");
    if (sizes.size() != seqs.size()) throw std::invalid_argument("joint_type: one alphabet size per sequence");
    const std::size_t n = seqs.front().size();
    if (n == 0) throw std::invalid_argument("joint_type: empty sequence");
    for (auto s : seqs)
        if (s.size() != n) throw std::invalid_argument("sequence length mismatch");

    std::size_t cells = 1;
    for (std::size_t d : sizes) cells *= d;
    std::vector<std::uint64_t> counts(cells, 0);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            const std::size_t a = seqs[i][t];
            if (a >= sizes[i]) throw std::out_of_range("joint_type: symbol outside alphabet");
            idx = idx * sizes[i] + a;
        }
        ++counts[idx];
    }
    return JointType(std::vector<std::size_t>(sizes.begin(), sizes.end()), std::move(counts), n);
}

inline JointType joint_type(std::span<const std::size_t> x, std::size_t nx) {
    const std::span<const std::size_t> seqs[] = {x};
    const std::size_t sizes[] = {nx};
    return joint_type(seqs, sizes);
}

inline JointType joint_type(std::span<const std::size_t> x, std::size_t nx, std::span<const std::size_t> y,
                            std::size_t ny) {
    const std::span<const std::size_t> seqs[] = {x, y};
    const std::size_t sizes[] = {nx, ny};
    return joint_type(seqs, sizes);
}

inline JointType joint_type(std::span<const std::size_t> x, std::size_t nx, std::span<const std::size_t> y,
                            std::size_t ny, std::span<const std::size_t> z, std::size_t nz) {
    const std::span<const std::size_t> seqs[] = {x, y, z};
    const std::size_t sizes[] = {nx, ny, nz};
    return joint_type(seqs, sizes);
}

/// Membership in the strongly typical set T_mu(P): every cell within mu of
/// P, and no occurrences of zero-probability cells.
inline bool is_strongly_typical(const JointType& type, std::span<const double> target, double mu) {
    if (mu < 0.0) throw std::invalid_argument("typicality parameter must be >= 0");
    if (target.size() != type.cells()) throw std::invalid_argument("target pmf does not match the product alphabet");
    for (std::size_t c = 0; c < type.cells(); ++c) {
        if (target[c] == 0.0 && type.counts()[c] != 0) return false;
        if (std::abs(type.pi(c) - target[c]) > mu + kTypicalitySlack) return false;
    }
    return true;
}

inline bool is_strongly_typical(std::span<const std::size_t> x, std::span<const double> target, double mu) {
    return is_strongly_typical(joint_type(x, target.size()), target, mu);
}

/// Membership of y^n in the conditionally typical set T_mu(W, x^n).
inline bool is_conditionally_typical(std::span<const std::size_t> y_seq, std::span<const std::size_t> x_seq,
                                     const InputConditional& w, double mu) {
    if (mu < 0.0) throw std::invalid_argument("typicality parameter must be >= 0");
    if (y_seq.size() != x_seq.size()) throw std::invalid_argument("sequence length mismatch");
    const JointType joint = joint_type(x_seq, w.nx(), y_seq, w.no());
    const double n = static_cast<double>(joint.length());
    for (std::size_t a = 0; a < w.nx(); ++a) {
        std::uint64_t na = 0;
        for (std::size_t b = 0; b < w.no(); ++b) na += joint.count({a, b});
        for (std::size_t b = 0; b < w.no(); ++b) {
            const std::uint64_t nab = joint.count({a, b});
            if (w(a, b) == 0.0 && nab != 0) return false;
            const double dev = static_cast<double>(nab) / n - static_cast<double>(na) / n * w(a, b);
            if (std::abs(dev) > mu + kTypicalitySlack) return false;
        }
    }
    return true;
}

/// Chebyshev/union lower bound 1 - cells / (4 mu^2 n) on the i.i.d. mass of
/// the typical set. May be <= 0 (vacuous); the caller decides.
inline double typicality_lower_bound(double mu, std::size_t n, std::size_t cells) {
    if (!(mu > 0.0)) throw std::invalid_argument("bound undefined for mu <= 0");
    if (n == 0) throw std::invalid_argument("bound undefined for n = 0");
    return 1.0 - static_cast<double>(cells) / (4.0 * mu * mu * static_cast<double>(n));
}

} // namespace isac
