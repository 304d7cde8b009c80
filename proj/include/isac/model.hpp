#pragma once

// Problem instances for memoryless state-dependent channels with a
// bi-static sensing receiver: alphabets, the joint law P(y,z | x,s), state
// priors, and a distortion table. Everything numeric is index-based; labels
// are carried only for I/O.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "isac/error.hpp"

namespace isac {

/// Absolute per-row tolerance for "sums to one".
inline constexpr double kStochasticTol = 1e-9;

using Pmf = std::vector<double>;
using StatePrior = Pmf;
using InputDistribution = Pmf;

struct Alphabet {
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return labels.size(); }

    /// Alphabet {"0", "1", ..., "n-1"}.
    static Alphabet indexed(std::size_t n) {
        Alphabet a;
        a.labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) a.labels.push_back(std::to_string(i));
        return a;
    }

    friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

/// Conditional law P(o | x, s), stored row-major as [x][s][o].
class StateConditional {
public:
    StateConditional() = default;
    StateConditional(std::size_t nx, std::size_t ns, std::size_t no)
        : nx_(nx), ns_(ns), no_(no), p_(nx * ns * no, 0.0) {}

    std::size_t nx() const noexcept { return nx_; }
    std::size_t ns() const noexcept { return ns_; }
    std::size_t no() const noexcept { return no_; }

    double operator()(std::size_t x, std::size_t s, std::size_t o) const { return p_[index(x, s, o)]; }
    double& operator()(std::size_t x, std::size_t s, std::size_t o) { return p_[index(x, s, o)]; }

    std::span<const double> row(std::size_t x, std::size_t s) const {
        return std::span<const double>(p_).subspan(index(x, s, 0), no_);
    }

    friend bool operator==(const StateConditional&, const StateConditional&) = default;

private:
    std::size_t index(std::size_t x, std::size_t s, std::size_t o) const { return (x * ns_ + s) * no_ + o; }

    std::size_t nx_ = 0, ns_ = 0, no_ = 0;
    std::vector<double> p_;
};

/// Conditional law P(o | x), stored row-major as [x][o].
class InputConditional {
public:
    InputConditional() = default;
    InputConditional(std::size_t nx, std::size_t no) : nx_(nx), no_(no), p_(nx * no, 0.0) {}
    InputConditional(std::size_t nx, std::size_t no, std::vector<double> values)
        : nx_(nx), no_(no), p_(std::move(values)) {
        if (p_.size() != nx_ * no_) throw std::invalid_argument("InputConditional: size mismatch");
    }

    std::size_t nx() const noexcept { return nx_; }
    std::size_t no() const noexcept { return no_; }

    double operator()(std::size_t x, std::size_t o) const { return p_[x * no_ + o]; }
    double& operator()(std::size_t x, std::size_t o) { return p_[x * no_ + o]; }

    std::span<const double> row(std::size_t x) const {
        return std::span<const double>(p_).subspan(x * no_, no_);
    }

    friend bool operator==(const InputConditional&, const InputConditional&) = default;

private:
    std::size_t nx_ = 0, no_ = 0;
    std::vector<double> p_;
};

/// Stationary transition law w[x][s][y][z] = P(y, z | x, s).
class ChannelModel {
public:
    ChannelModel() = default;
    ChannelModel(Alphabet x, Alphabet s, Alphabet y, Alphabet z, std::vector<double> w)
        : x_(std::move(x)), s_(std::move(s)), y_(std::move(y)), z_(std::move(z)), w_(std::move(w)) {
        if (w_.size() != nx() * ns() * ny() * nz()) {
            std::ostringstream os;
            os << "channel tensor has " << w_.size() << " entries, expected " << nx() << "x" << ns() << "x"
               << ny() << "x" << nz();
            throw ModelError(os.str());
        }
    }

    const Alphabet& x() const noexcept { return x_; }
    const Alphabet& s() const noexcept { return s_; }
    const Alphabet& y() const noexcept { return y_; }
    const Alphabet& z() const noexcept { return z_; }

    std::size_t nx() const noexcept { return x_.size(); }
    std::size_t ns() const noexcept { return s_.size(); }
    std::size_t ny() const noexcept { return y_.size(); }
    std::size_t nz() const noexcept { return z_.size(); }

    double operator()(std::size_t x, std::size_t s, std::size_t y, std::size_t z) const {
        return w_[((x * ns() + s) * ny() + y) * nz() + z];
    }

    /// The (y,z) block for input x and state s, flattened as [y][z].
    std::span<const double> block(std::size_t x, std::size_t s) const {
        return std::span<const double>(w_).subspan((x * ns() + s) * ny() * nz(), ny() * nz());
    }

    const std::vector<double>& tensor() const noexcept { return w_; }

private:
    Alphabet x_, s_, y_, z_;
    std::vector<double> w_;
};

/// Build a channel from a callable f(x, s, y, z) -> probability.
template <typename F>
ChannelModel make_channel(Alphabet x, Alphabet s, Alphabet y, Alphabet z, F&& f) {
    std::vector<double> w;
    w.reserve(x.size() * s.size() * y.size() * z.size());
    for (std::size_t a = 0; a < x.size(); ++a)
        for (std::size_t b = 0; b < s.size(); ++b)
            for (std::size_t c = 0; c < y.size(); ++c)
                for (std::size_t d = 0; d < z.size(); ++d) w.push_back(static_cast<double>(f(a, b, c, d)));
    return ChannelModel(std::move(x), std::move(s), std::move(y), std::move(z), std::move(w));
}

template <typename F>
ChannelModel make_channel(std::size_t nx, std::size_t ns, std::size_t ny, std::size_t nz, F&& f) {
    return make_channel(Alphabet::indexed(nx), Alphabet::indexed(ns), Alphabet::indexed(ny), Alphabet::indexed(nz),
                        std::forward<F>(f));
}

/// Bounded distortion d[s_hat][s] over a reconstruction alphabet.
class DistortionSpec {
public:
    DistortionSpec() = default;
    DistortionSpec(Alphabet s_hat, std::size_t ns, std::vector<double> d)
        : s_hat_(std::move(s_hat)), ns_(ns), d_(std::move(d)) {
        if (d_.size() != s_hat_.size() * ns_) {
            std::ostringstream os;
            os << "distortion table has " << d_.size() << " entries, expected " << s_hat_.size() << "x" << ns_;
            throw ModelError(os.str());
        }
    }

    /// Hamming distortion with the reconstruction alphabet equal to the state alphabet.
    static DistortionSpec hamming(const Alphabet& s) {
        const std::size_t n = s.size();
        std::vector<double> d(n * n, 1.0);
        for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
        return DistortionSpec(s, n, std::move(d));
    }

    const Alphabet& s_hat() const noexcept { return s_hat_; }
    std::size_t n_shat() const noexcept { return s_hat_.size(); }
    std::size_t ns() const noexcept { return ns_; }

    double operator()(std::size_t shat, std::size_t s) const { return d_[shat * ns_ + s]; }
    const std::vector<double>& table() const noexcept { return d_; }

    double max_value() const {
        double m = 0.0;
        for (double v : d_) m = std::max(m, v);
        return m;
    }

private:
    Alphabet s_hat_;
    std::size_t ns_ = 0;
    std::vector<double> d_;
};

struct ProblemInstance {
    ChannelModel channel;
    StatePrior p_s;
    std::optional<StatePrior> q_s;
    std::optional<DistortionSpec> distortion;
};

struct Violation {
    std::string field;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

namespace detail {

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline void check_alphabet(const Alphabet& a, const std::string& name, ValidationReport& out) {
    if (a.size() == 0) {
        out.push_back({name, "alphabet must contain at least one symbol"});
        return;
    }
    std::unordered_set<std::string> seen;
    for (const auto& l : a.labels) {
        if (!seen.insert(l).second) out.push_back({name, "duplicate symbol label '" + l + "'"});
    }
}

inline void check_pmf(std::span<const double> p, std::size_t expected_len, const std::string& name,
                      ValidationReport& out) {
    if (p.size() != expected_len) {
        out.push_back({name, "length " + std::to_string(p.size()) + " does not match state alphabet size " +
                                 std::to_string(expected_len)});
        return;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || p[i] < 0.0) {
            out.push_back({name + "[" + std::to_string(i) + "]", "entry " + fmt_double(p[i]) + " is not >= 0"});
            return;
        }
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > kStochasticTol)
        out.push_back({name, "prior sum != 1 (sums to " + fmt_double(sum) + ")"});
}

} // namespace detail

/// Every broken invariant of the instance; empty means valid.
inline ValidationReport validate_model(const ProblemInstance& inst) {
    ValidationReport out;
    const ChannelModel& ch = inst.channel;
    detail::check_alphabet(ch.x(), "x", out);
    detail::check_alphabet(ch.s(), "s", out);
    detail::check_alphabet(ch.y(), "y", out);
    detail::check_alphabet(ch.z(), "z", out);

    for (std::size_t x = 0; x < ch.nx(); ++x) {
        for (std::size_t s = 0; s < ch.ns(); ++s) {
            const std::string where = "channel[x=" + ch.x().labels[x] + "][s=" + ch.s().labels[s] + "]";
            double sum = 0.0;
            bool bad_entry = false;
            for (double v : ch.block(x, s)) {
                if (!std::isfinite(v) || v < 0.0 || v > 1.0) bad_entry = true;
                sum += v;
            }
            if (bad_entry) out.push_back({where, "entries must lie in [0, 1]"});
            else if (std::abs(sum - 1.0) > kStochasticTol)
                out.push_back({where, "row sums to " + detail::fmt_double(sum) + ", expected 1"});
        }
    }

    detail::check_pmf(inst.p_s, ch.ns(), "p_s", out);
    if (inst.q_s) detail::check_pmf(*inst.q_s, ch.ns(), "q_s", out);

    if (inst.distortion) {
        const DistortionSpec& d = *inst.distortion;
        detail::check_alphabet(d.s_hat(), "s_hat", out);
        if (d.ns() != ch.ns()) {
            out.push_back({"distortion", "state dimension " + std::to_string(d.ns()) +
                                             " does not match state alphabet size " + std::to_string(ch.ns())});
        }
        for (std::size_t i = 0; i < d.table().size(); ++i) {
            const double v = d.table()[i];
            if (!std::isfinite(v) || v < 0.0) {
                out.push_back({"distortion", "entries must be finite and >= 0"});
                break;
            }
        }
    }
    return out;
}

/// Coordinate marginals P(y | x,s) and P(z | x,s) of the joint law.
inline std::pair<StateConditional, StateConditional> split_marginals(const ChannelModel& ch) {
    StateConditional py(ch.nx(), ch.ns(), ch.ny());
    StateConditional pz(ch.nx(), ch.ns(), ch.nz());
    for (std::size_t x = 0; x < ch.nx(); ++x)
        for (std::size_t s = 0; s < ch.ns(); ++s)
            for (std::size_t y = 0; y < ch.ny(); ++y)
                for (std::size_t z = 0; z < ch.nz(); ++z) {
                    const double v = ch(x, s, y, z);
                    py(x, s, y) += v;
                    pz(x, s, z) += v;
                }
    return {std::move(py), std::move(pz)};
}

/// Average a state-dependent law over a prior: out(o|x) = sum_s prior(s) cond(o|x,s).
inline InputConditional mix_over_state(const StateConditional& cond, std::span<const double> prior) {
    if (prior.size() != cond.ns()) throw std::invalid_argument("mix_over_state: prior length does not match states");
    InputConditional out(cond.nx(), cond.no());
    for (std::size_t x = 0; x < cond.nx(); ++x)
        for (std::size_t s = 0; s < cond.ns(); ++s) {
            if (prior[s] == 0.0) continue;
            for (std::size_t o = 0; o < cond.no(); ++o) out(x, o) += prior[s] * cond(x, s, o);
        }
    return out;
}

/// P(y|x) under a given state prior.
inline InputConditional comm_channel(const ChannelModel& ch, std::span<const double> prior) {
    return mix_over_state(split_marginals(ch).first, prior);
}

/// P(z|x) under a given state prior.
inline InputConditional echo_channel(const ChannelModel& ch, std::span<const double> prior) {
    return mix_over_state(split_marginals(ch).second, prior);
}

} // namespace isac
