#pragma once

// Boundaries of the two tradeoff regions, obtained by optimizing the input
// pmf P_X:
//
//   capacity-distortion:  C(D) = max { I_P(X;Y) : sum_x P_X(x) c(x) <= D }
//   rate-exponent:        R(E) = max { min(I_P(X;Y), I_Q(X;Y)) : sum_x P_X(x) e(x) >= E }
//
// where c(x) is the per-input expected distortion of the optimal per-symbol
// estimator and e(x) = D(P_{Z|X}(.|x) || Q_{Z|X}(.|x)). The first problem is
// solved with a cost-penalized Blahut-Arimoto iteration and bisection on the
// multiplier; the second with exponentiated subgradient ascent, where the
// linear constraint is enforced by a KL projection (exponential tilting).
// grid_oracle() is an independent brute-force check for small input alphabets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isac/error.hpp"
#include "isac/infomeasures.hpp"
#include "isac/model.hpp"
#include "isac/sensing.hpp"

namespace isac {

struct SolverConfig {
    std::size_t max_iterations = 50000;
    double convergence_tol = 1e-9;  // bits
    double bisection_tol = 1e-6;
    double kl_clamp = 60.0;  // bits
    double grid_step = 1.0 / 200.0;

    void validate() const {
        if (max_iterations == 0 || !(convergence_tol > 0.0) || !(bisection_tol > 0.0) || !(kl_clamp > 0.0) ||
            !(grid_step > 0.0))
            throw std::invalid_argument("solver configuration values must all be positive");
    }
};

struct FrontierPoint {
    double target = 0.0;     // requested D or E
    double rate = 0.0;       // bits
    double objective = 0.0;  // achieved distortion (rd) or exponent (re)
    InputDistribution p_x;
    bool converged = false;
    std::size_t iterations = 0;
    bool clamped = false;  // some e(x) was infinite and replaced by kl_clamp
};

namespace detail {

/// Number of ascent iterations over which the objective must improve by at
/// least convergence_tol to keep going.
inline constexpr std::size_t kStallWindow = 100;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// D(w(.|x) || q) for every x; letters outside `allowed` get -inf.
inline std::vector<double> letter_divergences(const InputConditional& w, std::span<const double> q,
                                              const std::vector<bool>& allowed) {
    std::vector<double> d(w.nx(), -kInfinity);
    for (std::size_t x = 0; x < w.nx(); ++x)
        if (allowed[x]) d[x] = kl_divergence(w.row(x), q);
    return d;
}

inline void normalize_log2(std::vector<double>& logp, const std::vector<bool>& allowed, Pmf& p) {
    double mx = -kInfinity;
    for (std::size_t x = 0; x < logp.size(); ++x)
        if (allowed[x]) mx = std::max(mx, logp[x]);
    double z = 0.0;
    for (std::size_t x = 0; x < logp.size(); ++x) {
        p[x] = allowed[x] ? std::exp2(logp[x] - mx) : 0.0;
        z += p[x];
    }
    for (std::size_t x = 0; x < logp.size(); ++x) {
        p[x] /= z;
        logp[x] = p[x] > 0.0 ? std::log2(p[x]) : -kInfinity;
    }
}

struct AscentResult {
    Pmf p;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Maximizes I(p) - lambda * sum_x p(x) cost(x) over pmfs supported on `allowed`.
inline AscentResult penalized_blahut_arimoto(const InputConditional& w, std::span<const double> cost, double lambda,
                                             const std::vector<bool>& allowed, const SolverConfig& cfg) {
    const std::size_t nx = w.nx();
    std::size_t support = 0;
    for (bool a : allowed) support += a ? 1 : 0;

    AscentResult r;
    r.p.assign(nx, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        if (allowed[x]) r.p[x] = 1.0 / static_cast<double>(support);
    std::vector<double> logp(nx);
    for (std::size_t x = 0; x < nx; ++x) logp[x] = r.p[x] > 0.0 ? std::log2(r.p[x]) : -kInfinity;

    std::vector<double> history;
    history.reserve(std::min<std::size_t>(cfg.max_iterations, 1 << 16));
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        const Pmf q = output_distribution(r.p, w);
        const std::vector<double> d = letter_divergences(w, q, allowed);

        // Lagrangian value and its Blahut-Arimoto upper bound at the current iterate.
        double value = 0.0, upper = -kInfinity;
        for (std::size_t x = 0; x < nx; ++x) {
            if (!allowed[x]) continue;
            const double g = d[x] - lambda * cost[x];
            value += r.p[x] * g;
            upper = std::max(upper, g);
        }
        r.iterations = it + 1;
        history.push_back(value);
        if (upper - value < cfg.convergence_tol) {
            r.converged = true;
            break;
        }
        if (history.size() > kStallWindow &&
            history.back() - history[history.size() - 1 - kStallWindow] < cfg.convergence_tol) {
            r.converged = true;
            break;
        }
        for (std::size_t x = 0; x < nx; ++x)
            if (allowed[x]) logp[x] += d[x] - lambda * cost[x];
        normalize_log2(logp, allowed, r.p);
    }
    return r;
}

inline std::vector<bool> all_letters(std::size_t n) { return std::vector<bool>(n, true); }

/// Letters whose value is within `tol` of the extreme (min if lowest, else max).
inline std::vector<bool> extreme_letters(std::span<const double> v, bool lowest, double tol = 1e-12) {
    const double ref = lowest ? *std::min_element(v.begin(), v.end()) : *std::max_element(v.begin(), v.end());
    std::vector<bool> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = lowest ? v[i] <= ref + tol : v[i] >= ref - tol;
    return out;
}

inline const DistortionSpec& require_distortion(const ProblemInstance& inst) {
    if (!inst.distortion) throw ModelError("distortion specification required");
    return *inst.distortion;
}

inline const StatePrior& require_alternative(const ProblemInstance& inst) {
    if (!inst.q_s) throw ModelError("alternative hypothesis prior required");
    return *inst.q_s;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

} // namespace detail

/// Plain Blahut-Arimoto capacity of w(y|x).
inline FrontierPoint channel_capacity(const InputConditional& w, const SolverConfig& cfg = {}) {
    cfg.validate();
    const std::vector<double> zero(w.nx(), 0.0);
    auto r = detail::penalized_blahut_arimoto(w, zero, 0.0, detail::all_letters(w.nx()), cfg);
    FrontierPoint pt;
    pt.rate = mutual_information(r.p, w);
    pt.p_x = std::move(r.p);
    pt.converged = r.converged;
    pt.iterations = r.iterations;
    return pt;
}

/// Per-input cost c(x) of the instance (optimal estimator under P_S).
inline std::vector<double> sensing_costs(const ProblemInstance& inst) {
    return per_input_cost(inst.channel, inst.p_s, detail::require_distortion(inst));
}

/// C(D) by cost-penalized Blahut-Arimoto with bisection on the multiplier.
inline FrontierPoint capacity_under_cost(const ProblemInstance& inst, double max_distortion,
                                         const SolverConfig& cfg = {}) {
    cfg.validate();
    const std::vector<double> cost = sensing_costs(inst);
    const InputConditional w = comm_channel(inst.channel, inst.p_s);
    const double cmin = *std::min_element(cost.begin(), cost.end());
    if (max_distortion < cmin - 1e-12) {
        throw InfeasibleError("distortion below minimum achievable: D = " + detail::fmt(max_distortion) +
                              " < min_x c(x) = " + detail::fmt(cmin));
    }

    std::size_t total_iterations = 0;
    auto solve = [&](double lambda, const std::vector<bool>& allowed) {
        auto r = detail::penalized_blahut_arimoto(w, cost, lambda, allowed, cfg);
        total_iterations += r.iterations;
        return r;
    };
    auto finish = [&](Pmf p, bool converged) {
        FrontierPoint pt;
        pt.target = max_distortion;
        pt.rate = mutual_information(p, w);
        pt.objective = expected_distortion(p, cost);
        pt.p_x = std::move(p);
        pt.converged = converged;
        pt.iterations = total_iterations;
        return pt;
    };

    const auto all = detail::all_letters(cost.size());
    if (max_distortion <= cmin + 1e-12) {
        auto r = solve(0.0, detail::extreme_letters(cost, true));
        return finish(std::move(r.p), r.converged);
    }

    auto lo = solve(0.0, all);
    if (expected_distortion(lo.p, cost) <= max_distortion) return finish(std::move(lo.p), lo.converged);

    double lam_lo = 0.0, lam_hi = 1.0;
    auto hi = solve(lam_hi, all);
    while (expected_distortion(hi.p, cost) > max_distortion) {
        lam_lo = lam_hi;
        lo = std::move(hi);
        lam_hi *= 2.0;
        if (lam_hi > 1e12) {
            // Penalty this large pins the solution onto the cheapest letters.
            hi = solve(0.0, detail::extreme_letters(cost, true));
            break;
        }
        hi = solve(lam_hi, all);
    }

    while (max_distortion - expected_distortion(hi.p, cost) > cfg.bisection_tol) {
        if (lam_hi - lam_lo <= 1e-13 * std::max(1.0, lam_hi)) {
            // The cost jumps across D at a single multiplier: both endpoints
            // maximize the same Lagrangian, so does any mixture of them.
            const double c_lo = expected_distortion(lo.p, cost);
            const double c_hi = expected_distortion(hi.p, cost);
            const double theta = (max_distortion - c_hi) / (c_lo - c_hi);
            Pmf mix(cost.size());
            for (std::size_t x = 0; x < mix.size(); ++x) mix[x] = theta * lo.p[x] + (1.0 - theta) * hi.p[x];
            return finish(std::move(mix), lo.converged && hi.converged);
        }
        const double mid = 0.5 * (lam_lo + lam_hi);
        auto r = solve(mid, all);
        if (expected_distortion(r.p, cost) > max_distortion) {
            lam_lo = mid;
            lo = std::move(r);
        } else {
            lam_hi = mid;
            hi = std::move(r);
        }
    }
    return finish(std::move(hi.p), hi.converged);
}

/// Capacity-distortion boundary with D swept linearly from min_x c(x) to the
/// cost of the unconstrained capacity achiever.
inline std::vector<FrontierPoint> rd_frontier(const ProblemInstance& inst, std::size_t n_points,
                                              const SolverConfig& cfg = {}) {
    if (n_points < 2) throw std::invalid_argument("frontier needs at least 2 points");
    cfg.validate();
    const std::vector<double> cost = sensing_costs(inst);
    const InputConditional w = comm_channel(inst.channel, inst.p_s);
    const double d_min = *std::min_element(cost.begin(), cost.end());
    const FrontierPoint unconstrained = channel_capacity(w, cfg);
    const double d_max = std::max(d_min, expected_distortion(unconstrained.p_x, cost));

    std::vector<FrontierPoint> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n_points - 1);
        const double target = i + 1 == n_points ? d_max : d_min + frac * (d_max - d_min);
        FrontierPoint pt = capacity_under_cost(inst, target, cfg);
        // The previous point stays feasible at a larger D.
        if (!out.empty() && out.back().rate > pt.rate) {
            const FrontierPoint& prev = out.back();
            pt.rate = prev.rate;
            pt.objective = prev.objective;
            pt.p_x = prev.p_x;
            pt.converged = prev.converged;
        }
        out.push_back(std::move(pt));
    }
    return out;
}

/// e(x) with infinite entries replaced by cfg.kl_clamp.
struct ExponentTable {
    std::vector<double> e;
    bool clamped = false;
};

inline ExponentTable sensing_exponents(const ProblemInstance& inst, const SolverConfig& cfg = {}) {
    const StatePrior& q_s = detail::require_alternative(inst);
    const auto pz = split_marginals(inst.channel).second;
    ExponentTable t;
    t.e = row_divergences(mix_over_state(pz, inst.p_s), mix_over_state(pz, q_s));
    for (double& v : t.e) {
        if (std::isinf(v)) {
            v = cfg.kl_clamp;
            t.clamped = true;
        }
    }
    return t;
}

namespace detail {

/// KL projection of p onto {q : sum_x q(x) e(x) >= target}: exponential tilt
/// q ~ p 2^{nu e} with the smallest nu >= 0 that meets the target.
inline Pmf tilt_to_exponent(const Pmf& p, std::span<const double> e, double target) {
    if (dot(p, e) >= target) return p;
    std::vector<bool> support(p.size());
    double emax = -kInfinity;
    for (std::size_t x = 0; x < p.size(); ++x) {
        support[x] = p[x] > 0.0;
        if (support[x]) emax = std::max(emax, e[x]);
    }
    auto tilted = [&](double nu) {
        Pmf q(p.size(), 0.0);
        double z = 0.0;
        for (std::size_t x = 0; x < p.size(); ++x) {
            if (!support[x]) continue;
            q[x] = p[x] * std::exp2(nu * (e[x] - emax));
            z += q[x];
        }
        for (double& v : q) v /= z;
        return q;
    };
    if (target >= emax - 1e-12) {
        Pmf q(p.size(), 0.0);
        double z = 0.0;
        for (std::size_t x = 0; x < p.size(); ++x)
            if (support[x] && e[x] >= emax - 1e-12) z += (q[x] = p[x]);
        for (double& v : q) v /= z;
        return q;
    }
    double lo = 0.0, hi = 1.0;
    while (dot(tilted(hi), e) < target) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dot(tilted(mid), e) < target ? lo : hi) = mid;
    }
    return tilted(hi);
}

inline double min_rate(std::span<const double> p, const InputConditional& wp, const InputConditional& wq) {
    return std::min(mutual_information(p, wp), mutual_information(p, wq));
}

} // namespace detail

/// R(E) for one exponent target by exponentiated subgradient ascent on
/// min(I_P, I_Q), starting from the tilted uniform pmf. Returns the best
/// feasible point among the iterates and their running average.
inline FrontierPoint rate_under_exponent(const ProblemInstance& inst, double min_exponent,
                                         const SolverConfig& cfg = {}) {
    cfg.validate();
    const StatePrior& q_s = detail::require_alternative(inst);
    const ExponentTable et = sensing_exponents(inst, cfg);
    const std::vector<double>& e = et.e;
    const double emax = *std::max_element(e.begin(), e.end());
    if (min_exponent > emax + 1e-12) {
        throw InfeasibleError("exponent above maximum achievable: E = " + detail::fmt(min_exponent) +
                              " > max_x e(x) = " + detail::fmt(emax));
    }
    const InputConditional wp = comm_channel(inst.channel, inst.p_s);
    const InputConditional wq = comm_channel(inst.channel, q_s);
    const std::size_t nx = e.size();

    Pmf p = detail::tilt_to_exponent(Pmf(nx, 1.0 / static_cast<double>(nx)), e, min_exponent);

    Pmf avg = p;
    Pmf best = p;
    double best_value = detail::min_rate(p, wp, wq);
    std::vector<double> history{best_value};
    const auto all = detail::all_letters(nx);
    bool converged = false;
    std::size_t it = 0;
    while (it < cfg.max_iterations) {
        ++it;
        const double ip = mutual_information(p, wp);
        const double iq = mutual_information(p, wq);
        const InputConditional& active = ip <= iq ? wp : wq;
        const std::vector<double> grad = detail::letter_divergences(active, output_distribution(p, active), all);

        const double step = 1.0 / std::sqrt(static_cast<double>(it));
        std::vector<double> logp(nx);
        for (std::size_t x = 0; x < nx; ++x) logp[x] = p[x] > 0.0 ? std::log2(p[x]) + step * grad[x] : -kInfinity;
        std::vector<bool> support(nx);
        for (std::size_t x = 0; x < nx; ++x) support[x] = p[x] > 0.0;
        detail::normalize_log2(logp, support, p);
        p = detail::tilt_to_exponent(p, e, min_exponent);

        const double w_new = 1.0 / static_cast<double>(it + 1);
        for (std::size_t x = 0; x < nx; ++x) avg[x] = (1.0 - w_new) * avg[x] + w_new * p[x];

        for (const Pmf* cand : {&avg, &p}) {
            if (detail::dot(*cand, e) < min_exponent - 1e-12) continue;
            const double v = detail::min_rate(*cand, wp, wq);
            if (v > best_value) {
                best_value = v;
                best = *cand;
            }
        }
        history.push_back(best_value);
        if (history.size() > detail::kStallWindow &&
            history.back() - history[history.size() - 1 - detail::kStallWindow] < cfg.convergence_tol) {
            converged = true;
            break;
        }
    }

    FrontierPoint pt;
    pt.target = min_exponent;
    pt.rate = best_value;
    pt.objective = detail::dot(best, e);
    pt.p_x = std::move(best);
    pt.converged = converged;
    pt.iterations = it;
    pt.clamped = et.clamped;
    return pt;
}

/// Rate-exponent boundary with E swept linearly over [0, max_x e(x)].
inline std::vector<FrontierPoint> re_frontier(const ProblemInstance& inst, std::size_t n_points,
                                              const SolverConfig& cfg = {}) {
    if (n_points < 2) throw std::invalid_argument("frontier needs at least 2 points");
    cfg.validate();
    const ExponentTable et = sensing_exponents(inst, cfg);
    const double emax = *std::max_element(et.e.begin(), et.e.end());

    // Solved from the largest target down; a neighbour's solution stays
    // feasible for every smaller target.
    std::vector<FrontierPoint> out(n_points);
    for (std::size_t k = n_points; k-- > 0;) {
        const double frac = static_cast<double>(k) / static_cast<double>(n_points - 1);
        const double target = k + 1 == n_points ? emax : frac * emax;
        FrontierPoint pt = rate_under_exponent(inst, target, cfg);
        if (k + 1 < n_points && out[k + 1].rate > pt.rate) {
            const FrontierPoint& next = out[k + 1];
            pt.rate = next.rate;
            pt.objective = next.objective;
            pt.p_x = next.p_x;
        }
        out[k] = std::move(pt);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

/// Calls f(point) for every pmf on nx letters whose entries are multiples of
/// 1/divisions, in increasing lexicographic order.
template <typename F>
void for_each_simplex_point(std::size_t nx, std::size_t divisions, F&& f) {
    if (nx == 0) return;
    std::vector<std::size_t> k(nx, 0);
    k[nx - 1] = divisions;
    Pmf p(nx);
    const double inv = 1.0 / static_cast<double>(divisions);
    while (true) {
        for (std::size_t i = 0; i < nx; ++i) p[i] = static_cast<double>(k[i]) * inv;
        f(std::as_const(p));
        // Lexicographic successor: bump the rightmost non-final position with
        // mass to its right and move that mass, minus one unit, to the end.
        std::size_t tail = 0;
        bool advanced = false;
        for (std::size_t j = nx - 1; j-- > 0;) {
            tail += k[j + 1];
            if (tail > 0) {
                ++k[j];
                for (std::size_t m = j + 1; m < nx; ++m) k[m] = 0;
                k[nx - 1] = tail - 1;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
}

enum class OracleConstraint { cost_at_most, exponent_at_least };
enum class OracleObjective { rate_p, min_rate };

inline constexpr std::size_t kOracleMaxInputs = 4;

inline FrontierPoint grid_oracle(const ProblemInstance& inst, OracleConstraint kind, double bound,
                                 OracleObjective objective, double step) {
    const std::size_t nx = inst.channel.nx();
    if (nx > kOracleMaxInputs) throw std::invalid_argument("oracle restricted to small alphabets");
    if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("oracle step must lie in (0, 1]");
    const auto divisions = static_cast<std::size_t>(std::llround(1.0 / step));

    std::vector<double> weights;
    bool clamped = false;
    if (kind == OracleConstraint::cost_at_most) {
        weights = sensing_costs(inst);
    } else {
        const ExponentTable et = sensing_exponents(inst);
        weights = et.e;
        clamped = et.clamped;
    }
    const InputConditional wp = comm_channel(inst.channel, inst.p_s);
    std::optional<InputConditional> wq;
    if (objective == OracleObjective::min_rate) wq = comm_channel(inst.channel, detail::require_alternative(inst));

    FrontierPoint best;
    best.target = bound;
    best.rate = -kInfinity;
    best.clamped = clamped;
    std::size_t evaluated = 0;
    for_each_simplex_point(nx, divisions, [&](const Pmf& p) {
        ++evaluated;
        const double g = detail::dot(p, weights);
        const bool feasible = kind == OracleConstraint::cost_at_most ? g <= bound + 1e-12 : g >= bound - 1e-12;
        if (!feasible) return;
        const double v = wq ? detail::min_rate(p, wp, *wq) : mutual_information(p, wp);
        if (v > best.rate) {
            best.rate = v;
            best.objective = g;
            best.p_x = p;
        }
    });
    if (best.p_x.empty()) throw InfeasibleError("no grid point satisfies the constraint");
    best.converged = true;
    best.iterations = evaluated;
    return best;
}

} // namespace isac
