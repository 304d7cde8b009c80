#pragma once

// Desk-scale achievability checks. Communication: random codebooks drawn
// i.i.d. from P_X, transmission through the state-dependent channel, and
// maximum-likelihood decoding on the state-averaged channel P_{Y|X}.
// Sensing: per-symbol estimation for distortion, and a Neyman-Pearson test
// on the echo log-likelihood ratio whose error probabilities are computed
// either exactly (iterated convolution of the per-symbol LLR laws) or by
// Monte-Carlo.
//
// Every random draw comes from a std::mt19937_64 stream keyed by
// (seed, purpose, index), so results do not depend on the worker count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "isac/frontier.hpp"
#include "isac/infomeasures.hpp"
#include "isac/model.hpp"
#include "isac/sensing.hpp"

namespace isac {

// ---------------------------------------------------------------------------
// Random streams

enum class StreamPurpose : std::uint32_t {
    codebook = 1,
    ensemble_codebook = 2,
    rd_trial = 3,
    ht_input = 4,
    ht_null = 5,
    ht_alternative = 6,
    channel = 7,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// A fresh 64-bit seed derived from (seed, purpose, index).
inline std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
    return make_stream(seed, purpose, index)();
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw from a pmf; never returns a zero-mass index.
inline std::size_t sample_index(std::span<const double> pmf, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        if (pmf[i] <= 0.0) continue;
        last = i;
        acc += pmf[i];
        if (u < acc) return i;
    }
    return last;
}

inline Sequence sample_sequence(std::span<const double> pmf, std::size_t n, std::mt19937_64& rng) {
    Sequence out(n);
    for (auto& v : out) v = sample_index(pmf, rng);
    return out;
}

// ---------------------------------------------------------------------------
// Codebooks

/// Largest codebook generate_codebook() will build.
inline constexpr std::size_t kMaxMessages = std::size_t{1} << 20;

class Codebook {
public:
    Codebook(std::size_t n, std::size_t num_messages, std::uint64_t seed)
        : n_(n), messages_(num_messages), seed_(seed), words_(n * num_messages, 0) {}

    std::size_t blocklength() const noexcept { return n_; }
    std::size_t num_messages() const noexcept { return messages_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const std::size_t> word(std::size_t m) const {
        return std::span<const std::size_t>(words_).subspan(m * n_, n_);
    }
    std::span<std::size_t> word(std::size_t m) { return std::span<std::size_t>(words_).subspan(m * n_, n_); }

    friend bool operator==(const Codebook&, const Codebook&) = default;

private:
    std::size_t n_, messages_;
    std::uint64_t seed_;
    std::vector<std::size_t> words_;
};

/// ceil(2^{nR}) with a guard against the desk-scale limit.
inline std::size_t codebook_size(std::size_t n, double rate) {
    if (n == 0) throw std::invalid_argument("blocklength must be >= 1");
    if (!(rate > 0.0)) throw std::invalid_argument("rate must be > 0");
    const double bits = static_cast<double>(n) * rate;
    if (bits > 20.0 + 1e-9)
        throw std::invalid_argument("codebook size 2^(nR) exceeds the limit of 2^20 = 1048576 messages");
    const auto m = static_cast<std::size_t>(std::ceil(std::exp2(bits) - 1e-9));
    return std::max<std::size_t>(m, 2);
}

/// Random codebook with entries i.i.d. from p_x; each message row has its own
/// stream keyed by (seed, message) and consumed position by position.
inline Codebook generate_codebook(std::span<const double> p_x, std::size_t n, double rate, std::uint64_t seed) {
    const std::size_t m = codebook_size(n, rate);
    Codebook cb(n, m, seed);
    for (std::size_t msg = 0; msg < m; ++msg) {
        auto rng = make_stream(seed, StreamPurpose::codebook, msg);
        for (auto& v : cb.word(msg)) v = sample_index(p_x, rng);
    }
    return cb;
}

// ---------------------------------------------------------------------------
// Channel

enum class Hypothesis { h0, h1 };

struct ChannelOutput {
    Sequence s, y, z;
};

inline const StatePrior& hypothesis_prior(const ProblemInstance& inst, Hypothesis h) {
    if (h == Hypothesis::h0) return inst.p_s;
    if (!inst.q_s) throw ModelError("alternative hypothesis prior required");
    return *inst.q_s;
}

inline ChannelOutput channel_sample(const ProblemInstance& inst, std::span<const std::size_t> x_seq, Hypothesis h,
                                    std::mt19937_64& rng) {
    const StatePrior& prior = hypothesis_prior(inst, h);
    const ChannelModel& ch = inst.channel;
    ChannelOutput out;
    out.s.resize(x_seq.size());
    out.y.resize(x_seq.size());
    out.z.resize(x_seq.size());
    for (std::size_t t = 0; t < x_seq.size(); ++t) {
        const std::size_t s = sample_index(prior, rng);
        const std::size_t yz = sample_index(ch.block(x_seq[t], s), rng);
        out.s[t] = s;
        out.y[t] = yz / ch.nz();
        out.z[t] = yz % ch.nz();
    }
    return out;
}

inline ChannelOutput channel_sample(const ProblemInstance& inst, std::span<const std::size_t> x_seq, Hypothesis h,
                                    std::uint64_t seed) {
    auto rng = make_stream(seed, StreamPurpose::channel);
    return channel_sample(inst, x_seq, h, rng);
}

// ---------------------------------------------------------------------------
// Decoding

struct DecodeResult {
    std::size_t message = 0;
    bool all_impossible = false;  // y has zero likelihood under every codeword
};

/// argmax_m sum_t log2 w(y_t | x_m,t); ties go to the smallest index.
inline DecodeResult ml_decode(std::span<const std::size_t> y_seq, const Codebook& cb, const InputConditional& w) {
    if (y_seq.size() != cb.blocklength()) throw std::invalid_argument("sequence length mismatch");
    std::vector<double> logw(w.nx() * w.no());
    for (std::size_t x = 0; x < w.nx(); ++x)
        for (std::size_t y = 0; y < w.no(); ++y) logw[x * w.no() + y] = w(x, y) > 0.0 ? std::log2(w(x, y)) : -kInfinity;

    DecodeResult r;
    double best = -kInfinity;
    bool found = false;
    for (std::size_t m = 0; m < cb.num_messages(); ++m) {
        const auto word = cb.word(m);
        double ll = 0.0;
        for (std::size_t t = 0; t < y_seq.size() && ll > -kInfinity; ++t) ll += logw[word[t] * w.no() + y_seq[t]];
        if (ll > best) {
            best = ll;
            r.message = m;
            found = true;
        }
    }
    r.all_impossible = !found;
    return r;
}

// ---------------------------------------------------------------------------
// Neyman-Pearson testing on the echo LLR

/// Decision rule: accept H0 iff LLR >= tau - kThresholdTol. The slack only
/// absorbs rounding between different summation orders of the same atoms.
inline constexpr double kThresholdTol = 1e-9;
inline constexpr std::size_t kMaxLlrAtoms = 1000000;

/// sum_t log2( P(z_t|x_t) / Q(z_t|x_t) ), with +-inf when one side has zero mass.
inline double llr_statistic(std::span<const std::size_t> x_seq, std::span<const std::size_t> z_seq,
                            const InputConditional& p_zx, const InputConditional& q_zx) {
    if (x_seq.size() != z_seq.size()) throw std::invalid_argument("sequence length mismatch");
    double sum = 0.0;
    bool pos_inf = false, neg_inf = false;
    for (std::size_t t = 0; t < x_seq.size(); ++t) {
        const double p = p_zx(x_seq[t], z_seq[t]);
        const double q = q_zx(x_seq[t], z_seq[t]);
        if (p <= 0.0 && q <= 0.0) throw std::invalid_argument("symbol outside both supports");
        if (q <= 0.0) pos_inf = true;
        else if (p <= 0.0) neg_inf = true;
        else sum += std::log2(p / q);
    }
    if (pos_inf && neg_inf) throw std::invalid_argument("sequence impossible under both hypotheses");
    if (pos_inf) return kInfinity;
    if (neg_inf) return -kInfinity;
    return sum;
}

struct LlrAtom {
    double value;
    double mass;
};

/// Law of the LLR statistic under one hypothesis: finite atoms sorted by
/// value, plus separate masses at +-infinity.
struct LlrDistribution {
    std::vector<LlrAtom> atoms;
    double mass_pos_inf = 0.0;
    double mass_neg_inf = 0.0;

    double total_mass() const {
        double m = mass_pos_inf + mass_neg_inf;
        for (const auto& a : atoms) m += a.mass;
        return m;
    }

    /// Mass of {LLR < tau} under the decision-rule tolerance.
    double mass_below(double tau) const {
        if (tau == -kInfinity) return 0.0;
        double m = mass_neg_inf;
        for (const auto& a : atoms) {
            if (a.value < tau - kThresholdTol) m += a.mass;
            else break;
        }
        return m;
    }

    /// Mass of {LLR >= tau}.
    double mass_at_least(double tau) const {
        if (tau == -kInfinity) return total_mass();
        double m = mass_pos_inf;
        if (tau == kInfinity) return m;
        for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
            if (it->value >= tau - kThresholdTol) m += it->mass;
            else break;
        }
        return m;
    }
};

namespace detail {

/// Merge runs of atoms whose values lie within `bin_width` of the run's first
/// value into one atom at their mass-weighted mean.
inline std::vector<LlrAtom> bin_atoms(const std::vector<LlrAtom>& sorted, double bin_width) {
    std::vector<LlrAtom> out;
    out.reserve(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double start = sorted[i].value;
        double mass = 0.0, offset = 0.0;
        std::size_t j = i;
        for (; j < sorted.size() && sorted[j].value - start <= bin_width; ++j) {
            mass += sorted[j].mass;
            offset += sorted[j].mass * (sorted[j].value - start);
        }
        // Offsets from the run start stay ordered even when masses are subnormal.
        const double value = j - i == 1 ? start : std::clamp(start + offset / mass, start, sorted[j - 1].value);
        if (mass > 0.0) out.push_back({value, mass});
        i = j;
    }
    return out;
}

} // namespace detail

/// Exact law of the n-fold LLR sum for a fixed input sequence, by iterated
/// convolution of the per-symbol laws.
inline LlrDistribution exact_llr_law(std::span<const std::size_t> x_seq, const InputConditional& p_zx,
                                     const InputConditional& q_zx, Hypothesis h, double bin_width = 1e-9) {
    if (bin_width < 0.0) throw std::invalid_argument("bin_width must be >= 0");
    if (p_zx.nx() != q_zx.nx() || p_zx.no() != q_zx.no()) throw std::invalid_argument("table shape mismatch");
    const InputConditional& law = h == Hypothesis::h0 ? p_zx : q_zx;

    struct SymbolLaw {
        std::vector<LlrAtom> finite;  // sorted by value
        double pos_inf = 0.0, neg_inf = 0.0;
    };
    std::vector<SymbolLaw> per_letter(p_zx.nx());
    for (std::size_t x = 0; x < p_zx.nx(); ++x) {
        SymbolLaw& sl = per_letter[x];
        for (std::size_t z = 0; z < p_zx.no(); ++z) {
            const double m = law(x, z);
            if (m <= 0.0) continue;
            const double p = p_zx(x, z), q = q_zx(x, z);
            if (q <= 0.0) sl.pos_inf += m;
            else if (p <= 0.0) sl.neg_inf += m;
            else sl.finite.push_back({std::log2(p / q), m});
        }
        std::sort(sl.finite.begin(), sl.finite.end(), [](const LlrAtom& a, const LlrAtom& b) { return a.value < b.value; });
        sl.finite = detail::bin_atoms(sl.finite, bin_width);
    }

    LlrDistribution d;
    d.atoms.push_back({0.0, 1.0});
    std::vector<LlrAtom> merged, shifted, scratch;
    const auto by_value = [](const LlrAtom& a, const LlrAtom& b) { return a.value < b.value; };
    for (std::size_t x : x_seq) {
        if (x >= per_letter.size()) throw std::out_of_range("input symbol outside alphabet");
        const SymbolLaw& sl = per_letter[x];
        double finite_mass = 0.0;
        for (const auto& a : d.atoms) finite_mass += a.mass;
        d.mass_pos_inf += finite_mass * sl.pos_inf;
        d.mass_neg_inf += finite_mass * sl.neg_inf;

        merged.clear();
        for (const auto& u : sl.finite) {
            shifted.clear();
            for (const auto& a : d.atoms) shifted.push_back({a.value + u.value, a.mass * u.mass});
            scratch.clear();
            std::merge(merged.begin(), merged.end(), shifted.begin(), shifted.end(), std::back_inserter(scratch),
                       by_value);
            merged.swap(scratch);
        }
        d.atoms = detail::bin_atoms(merged, bin_width);
        if (d.atoms.size() > kMaxLlrAtoms)
            throw std::runtime_error("LLR support exceeds 10^6 atoms after binning; use a larger bin_width");
    }
    if (d.mass_pos_inf > 0.0 && d.mass_neg_inf > 0.0)
        throw std::runtime_error("LLR law has mass at both +inf and -inf");
    return d;
}

/// Largest tau in {support} u {-inf} whose type-I error P0(LLR < tau) stays
/// within alpha_target. Deterministic test, no randomization at the threshold.
inline double np_threshold(const LlrDistribution& law_h0, double alpha_target) {
    if (!(alpha_target > 0.0 && alpha_target < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    double tau = -kInfinity;
    double below = law_h0.mass_neg_inf;  // mass strictly below atoms[i] under the tolerance
    std::size_t j = 0;
    for (const auto& a : law_h0.atoms) {
        for (; j < law_h0.atoms.size() && law_h0.atoms[j].value < a.value - kThresholdTol; ++j)
            below += law_h0.atoms[j].mass;
        if (below <= alpha_target) tau = a.value;
        else break;
    }
    if (law_h0.mass_pos_inf > 0.0 && law_h0.mass_below(kInfinity) <= alpha_target) tau = kInfinity;
    // Thresholding at the lowest atom accepts everything; report it as -inf.
    if (law_h0.mass_neg_inf == 0.0 && !law_h0.atoms.empty() && tau == law_h0.atoms.front().value) tau = -kInfinity;
    return tau;
}

inline double type_one_error(const LlrDistribution& law_h0, double tau) { return law_h0.mass_below(tau); }

/// P1(LLR >= tau): probability of accepting H0 when H1 holds.
inline double exact_beta(const LlrDistribution& law_h1, double tau) { return law_h1.mass_at_least(tau); }

// ---------------------------------------------------------------------------
// Experiments

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Wilson score interval at 95%.
inline Interval wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
    return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

enum class SimMode { monte_carlo, exact_dp };
enum class CodebookMode { ensemble, fixed };
enum class InputDraw { iid, fixed_type };

inline const char* to_string(SimMode m) { return m == SimMode::monte_carlo ? "monte_carlo" : "exact_dp"; }
inline const char* to_string(CodebookMode m) { return m == CodebookMode::ensemble ? "ensemble" : "fixed"; }
inline const char* to_string(InputDraw d) { return d == InputDraw::iid ? "iid" : "fixed_type"; }

struct SimulationReport {
    std::string experiment;  // "rd" or "ht"
    SimMode mode = SimMode::monte_carlo;
    std::optional<std::uint64_t> seed;  // empty when nothing was random
    std::size_t n = 0;
    std::size_t trials = 0;
    InputDistribution p_x;

    // rd
    std::optional<double> rate;
    std::optional<double> distortion;
    std::optional<std::size_t> num_messages;
    std::optional<CodebookMode> codebook;
    std::optional<double> p_error_hat;
    std::optional<Interval> p_error_ci;
    std::optional<double> excess_distortion_hat;
    std::optional<Interval> excess_distortion_ci;
    std::size_t undecodable = 0;  // outputs impossible under every codeword

    // ht
    std::optional<InputDraw> input;
    std::optional<double> alpha_target;
    std::optional<double> bin_width;
    std::optional<double> threshold;
    std::optional<double> alpha_exact;  // size of the deterministic test
    std::optional<double> alpha_hat;
    std::optional<Interval> alpha_ci;
    std::optional<double> beta;
    std::optional<Interval> beta_ci;
    std::optional<double> exponent_hat;
    std::optional<double> stein_limit;  // (1/n) sum_t e(x_t)
    bool infinite_llr = false;          // some per-symbol LLR was +-inf

    friend bool operator==(const SimulationReport&, const SimulationReport&) = default;
};

namespace detail {

/// Runs body(trial) for trial in [0, trials) on `workers` threads, each
/// returning per-trial counters; sums are order independent.
template <std::size_t K, typename Body>
std::array<std::size_t, K> count_trials(std::size_t trials, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, trials));
    std::vector<std::array<std::size_t, K>> partial(workers, std::array<std::size_t, K>{});
    auto run = [&](std::size_t w) {
        for (std::size_t t = w; t < trials; t += workers) {
            const auto c = body(t);
            for (std::size_t k = 0; k < K; ++k) partial[w][k] += c[k];
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    std::array<std::size_t, K> total{};
    for (const auto& p : partial)
        for (std::size_t k = 0; k < K; ++k) total[k] += p[k];
    return total;
}

} // namespace detail

struct RdOptions {
    std::size_t workers = 1;
    CodebookMode codebook = CodebookMode::ensemble;
    SolverConfig solver{};
};

/// Per trial: uniform message, transmission, ML decoding, per-symbol state
/// estimation; counts decoding errors and blocks with distortion above D.
/// The codebook input law is the capacity-distortion maximizer at D.
inline SimulationReport run_rd_experiment(const ProblemInstance& inst, double rate, double max_distortion,
                                          std::size_t n, std::size_t trials, std::uint64_t seed,
                                          const RdOptions& opt = {}) {
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
    const DistortionSpec& dist = detail::require_distortion(inst);
    const std::size_t messages = codebook_size(n, rate);
    const InputDistribution p_x = capacity_under_cost(inst, max_distortion, opt.solver).p_x;
    const InputConditional w = comm_channel(inst.channel, inst.p_s);
    const EstimatorTable est = optimal_estimator(posterior(inst.channel, inst.p_s), dist);

    std::optional<Codebook> fixed;
    if (opt.codebook == CodebookMode::fixed) fixed = generate_codebook(p_x, n, rate, seed);

    const auto counts = detail::count_trials<3>(trials, opt.workers, [&](std::size_t trial) {
        std::optional<Codebook> own;
        if (!fixed) own = generate_codebook(p_x, n, rate, derive_seed(seed, StreamPurpose::ensemble_codebook, trial));
        const Codebook& cb = fixed ? *fixed : *own;
        auto rng = make_stream(seed, StreamPurpose::rd_trial, trial);
        const auto msg = std::min(messages - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(messages)));
        const auto out = channel_sample(inst, cb.word(msg), Hypothesis::h0, rng);
        const DecodeResult dec = ml_decode(out.y, cb, w);
        const Sequence shat = apply_estimator(est, cb.word(msg), out.z);
        const bool excess = sequence_distortion(dist, shat, out.s) > max_distortion;
        return std::array<std::size_t, 3>{dec.message != msg ? 1u : 0u, excess ? 1u : 0u,
                                          dec.all_impossible ? 1u : 0u};
    });

    SimulationReport r;
    r.experiment = "rd";
    r.mode = SimMode::monte_carlo;
    r.seed = seed;
    r.n = n;
    r.trials = trials;
    r.p_x = p_x;
    r.rate = rate;
    r.distortion = max_distortion;
    r.num_messages = messages;
    r.codebook = opt.codebook;
    r.p_error_hat = static_cast<double>(counts[0]) / static_cast<double>(trials);
    r.p_error_ci = wilson_interval(counts[0], trials);
    r.excess_distortion_hat = static_cast<double>(counts[1]) / static_cast<double>(trials);
    r.excess_distortion_ci = wilson_interval(counts[1], trials);
    r.undecodable = counts[2];
    return r;
}

struct HtOptions {
    std::size_t workers = 1;
    double bin_width = 1e-9;
    InputDraw input = InputDraw::iid;
};

/// Deterministic x^n whose counts are the largest-remainder rounding of
/// n p_x (ties to the smaller letter), laid out in letter order.
inline Sequence fixed_type_sequence(std::span<const double> p_x, std::size_t n) {
    const std::size_t k = p_x.size();
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> rem(k);
    std::size_t used = 0;
    for (std::size_t a = 0; a < k; ++a) {
        const double share = p_x[a] * static_cast<double>(n);
        counts[a] = static_cast<std::size_t>(std::floor(share));
        used += counts[a];
        rem[a] = {share - std::floor(share), a};
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    for (std::size_t i = 0; used < n && i < k; ++i, ++used) ++counts[rem[i].second];
    Sequence x;
    x.reserve(n);
    for (std::size_t a = 0; a < k; ++a) x.insert(x.end(), counts[a], a);
    return x;
}

inline double exponent_from_beta(double beta, std::size_t n) {
    return beta > 0.0 ? -std::log2(beta) / static_cast<double>(n) : kInfinity;
}

/// Draws x^n i.i.d. from p_x once (or fixes it to a sequence of type close
/// to p_x), then evaluates the Neyman-Pearson test at
/// level alpha_target on the echo LLR: exactly (exact_dp) or over `trials`
/// Monte-Carlo draws per hypothesis (monte_carlo).
inline SimulationReport run_ht_experiment(const ProblemInstance& inst, std::span<const double> p_x, std::size_t n,
                                          double alpha_target, SimMode mode, std::size_t trials, std::uint64_t seed,
                                          const HtOptions& opt = {}) {
    const StatePrior& q_s = hypothesis_prior(inst, Hypothesis::h1);
    if (n == 0) throw std::invalid_argument("blocklength must be >= 1");
    if (p_x.size() != inst.channel.nx()) throw std::invalid_argument("input pmf length does not match x alphabet");
    if (mode == SimMode::monte_carlo && trials == 0) throw std::invalid_argument("trials must be >= 1");

    const auto pz = split_marginals(inst.channel).second;
    const InputConditional p_zx = mix_over_state(pz, inst.p_s);
    const InputConditional q_zx = mix_over_state(pz, q_s);

    Sequence x;
    if (opt.input == InputDraw::iid) {
        auto input_rng = make_stream(seed, StreamPurpose::ht_input);
        x = sample_sequence(p_x, n, input_rng);
    } else {
        x = fixed_type_sequence(p_x, n);
    }

    const LlrDistribution law0 = exact_llr_law(x, p_zx, q_zx, Hypothesis::h0, opt.bin_width);
    const double tau = np_threshold(law0, alpha_target);

    SimulationReport r;
    r.experiment = "ht";
    r.mode = mode;
    if (opt.input == InputDraw::iid || mode == SimMode::monte_carlo) r.seed = seed;
    r.n = n;
    r.trials = mode == SimMode::exact_dp ? 0 : trials;
    r.input = opt.input;
    r.p_x.assign(p_x.begin(), p_x.end());
    r.alpha_target = alpha_target;
    r.bin_width = opt.bin_width;
    r.threshold = tau;
    r.alpha_exact = type_one_error(law0, tau);

    const std::vector<double> e = row_divergences(p_zx, q_zx);
    double limit = 0.0;
    for (std::size_t t : x) limit += e[t];
    r.stein_limit = limit / static_cast<double>(n);
    for (std::size_t a = 0; a < p_zx.nx(); ++a)
        for (std::size_t z = 0; z < p_zx.no(); ++z)
            if ((p_zx(a, z) > 0.0) != (q_zx(a, z) > 0.0)) r.infinite_llr = true;

    if (mode == SimMode::exact_dp) {
        const LlrDistribution law1 = exact_llr_law(x, p_zx, q_zx, Hypothesis::h1, opt.bin_width);
        r.alpha_hat = r.alpha_exact;
        r.beta = exact_beta(law1, tau);
        r.exponent_hat = exponent_from_beta(*r.beta, n);
        return r;
    }

    const auto counts = detail::count_trials<2>(trials, opt.workers, [&](std::size_t trial) {
        auto rng0 = make_stream(seed, StreamPurpose::ht_null, trial);
        auto rng1 = make_stream(seed, StreamPurpose::ht_alternative, trial);
        const auto out0 = channel_sample(inst, x, Hypothesis::h0, rng0);
        const auto out1 = channel_sample(inst, x, Hypothesis::h1, rng1);
        const double l0 = llr_statistic(x, out0.z, p_zx, q_zx);
        const double l1 = llr_statistic(x, out1.z, p_zx, q_zx);
        return std::array<std::size_t, 2>{l0 < tau - kThresholdTol ? 1u : 0u, l1 >= tau - kThresholdTol ? 1u : 0u};
    });
    r.alpha_hat = static_cast<double>(counts[0]) / static_cast<double>(trials);
    r.alpha_ci = wilson_interval(counts[0], trials);
    r.beta = static_cast<double>(counts[1]) / static_cast<double>(trials);
    r.beta_ci = wilson_interval(counts[1], trials);
    r.exponent_hat = exponent_from_beta(*r.beta, n);
    return r;
}

} // namespace isac
