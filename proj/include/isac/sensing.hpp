#pragma once

// Radar-side estimation: the Bayes posterior of the state given the channel
// input and its echo, the per-symbol minimum-risk reconstruction, and the
// distortion it incurs.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "isac/model.hpp"

namespace isac {

using Sequence = std::vector<std::size_t>;

/// P(s | x, z). Columns (x,z) with zero echo probability are uniform and
/// marked unsupported.
class PosteriorTable {
public:
    PosteriorTable(std::size_t ns, std::size_t nx, std::size_t nz)
        : ns_(ns), nx_(nx), nz_(nz), q_(ns * nx * nz, 0.0), supported_(nx * nz, false) {}

    std::size_t ns() const noexcept { return ns_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t nz() const noexcept { return nz_; }

    double operator()(std::size_t s, std::size_t x, std::size_t z) const { return q_[(x * nz_ + z) * ns_ + s]; }
    double& operator()(std::size_t s, std::size_t x, std::size_t z) { return q_[(x * nz_ + z) * ns_ + s]; }

    /// The pmf over states for one (x,z) column.
    std::span<const double> column(std::size_t x, std::size_t z) const {
        return std::span<const double>(q_).subspan((x * nz_ + z) * ns_, ns_);
    }

    bool supported(std::size_t x, std::size_t z) const { return supported_[x * nz_ + z]; }
    void set_supported(std::size_t x, std::size_t z, bool v) { supported_[x * nz_ + z] = v; }

private:
    std::size_t ns_, nx_, nz_;
    std::vector<double> q_;
    std::vector<bool> supported_;
};

/// Reconstruction index shat[x][z].
class EstimatorTable {
public:
    EstimatorTable(std::size_t nx, std::size_t nz, std::size_t fill = 0) : nx_(nx), nz_(nz), shat_(nx * nz, fill) {}

    std::size_t nx() const noexcept { return nx_; }
    std::size_t nz() const noexcept { return nz_; }

    std::size_t operator()(std::size_t x, std::size_t z) const { return shat_[x * nz_ + z]; }
    std::size_t& operator()(std::size_t x, std::size_t z) { return shat_[x * nz_ + z]; }

    const std::vector<std::size_t>& entries() const noexcept { return shat_; }

    friend bool operator==(const EstimatorTable&, const EstimatorTable&) = default;

private:
    std::size_t nx_, nz_;
    std::vector<std::size_t> shat_;
};

inline PosteriorTable posterior(const ChannelModel& ch, std::span<const double> prior) {
    if (prior.size() != ch.ns()) throw std::invalid_argument("posterior: prior length does not match states");
    const StateConditional pz = split_marginals(ch).second;
    PosteriorTable q(ch.ns(), ch.nx(), ch.nz());
    for (std::size_t x = 0; x < ch.nx(); ++x) {
        for (std::size_t z = 0; z < ch.nz(); ++z) {
            double norm = 0.0;
            for (std::size_t s = 0; s < ch.ns(); ++s) norm += prior[s] * pz(x, s, z);
            const bool ok = norm > 0.0;
            q.set_supported(x, z, ok);
            for (std::size_t s = 0; s < ch.ns(); ++s)
                q(s, x, z) = ok ? prior[s] * pz(x, s, z) / norm : 1.0 / static_cast<double>(ch.ns());
        }
    }
    return q;
}

/// Posterior-risk minimizer per (x,z); ties go to the smallest reconstruction index.
inline EstimatorTable optimal_estimator(const PosteriorTable& q, const DistortionSpec& d) {
    if (d.ns() != q.ns()) throw std::invalid_argument("optimal_estimator: distortion/state dimension mismatch");
    EstimatorTable est(q.nx(), q.nz());
    for (std::size_t x = 0; x < q.nx(); ++x) {
        for (std::size_t z = 0; z < q.nz(); ++z) {
            std::size_t best = 0;
            double best_risk = 0.0;
            for (std::size_t sh = 0; sh < d.n_shat(); ++sh) {
                double risk = 0.0;
                for (std::size_t s = 0; s < q.ns(); ++s) risk += q(s, x, z) * d(sh, s);
                if (sh == 0 || risk < best_risk) {
                    best = sh;
                    best_risk = risk;
                }
            }
            est(x, z) = best;
        }
    }
    return est;
}

/// c(x) = sum_{s,z} P_S(s) P(z|x,s) d(shat(x,z), s) for a given estimator table.
inline std::vector<double> estimator_cost(const ChannelModel& ch, std::span<const double> prior,
                                          const DistortionSpec& d, const EstimatorTable& est) {
    const StateConditional pz = split_marginals(ch).second;
    std::vector<double> c(ch.nx(), 0.0);
    for (std::size_t x = 0; x < ch.nx(); ++x)
        for (std::size_t s = 0; s < ch.ns(); ++s) {
            if (prior[s] == 0.0) continue;
            for (std::size_t z = 0; z < ch.nz(); ++z) c[x] += prior[s] * pz(x, s, z) * d(est(x, z), s);
        }
    return c;
}

/// Expected distortion per input letter under the optimal per-symbol estimator.
inline std::vector<double> per_input_cost(const ChannelModel& ch, std::span<const double> prior,
                                          const DistortionSpec& d) {
    return estimator_cost(ch, prior, d, optimal_estimator(posterior(ch, prior), d));
}

inline double expected_distortion(std::span<const double> p_x, std::span<const double> cost) {
    if (p_x.size() != cost.size()) throw std::invalid_argument("expected_distortion: length mismatch");
    double e = 0.0;
    for (std::size_t x = 0; x < cost.size(); ++x) e += p_x[x] * cost[x];
    return e;
}

/// Blockwise estimate (shat(x_1,z_1), ..., shat(x_n,z_n)).
inline Sequence apply_estimator(const EstimatorTable& est, std::span<const std::size_t> x_seq,
                                std::span<const std::size_t> z_seq) {
    if (x_seq.size() != z_seq.size()) throw std::invalid_argument("sequence length mismatch");
    Sequence out(x_seq.size());
    for (std::size_t t = 0; t < x_seq.size(); ++t) out[t] = est(x_seq[t], z_seq[t]);
    return out;
}

/// (1/n) sum_t d(shat_t, s_t).
inline double sequence_distortion(const DistortionSpec& d, std::span<const std::size_t> shat_seq,
                                  std::span<const std::size_t> s_seq) {
    if (shat_seq.empty() || s_seq.empty()) throw std::invalid_argument("empty sequence");
    if (shat_seq.size() != s_seq.size()) throw std::invalid_argument("sequence length mismatch");
    double sum = 0.0;
    for (std::size_t t = 0; t < s_seq.size(); ++t) sum += d(shat_seq[t], s_seq[t]);
    return sum / static_cast<double>(s_seq.size());
}

} // namespace isac
