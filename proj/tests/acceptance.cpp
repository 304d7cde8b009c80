// Acceptance run: one PASS/FAIL line per criterion, with its runtime.
// Reference values come from oracles written here, not from the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isac/isac.hpp"
#include "support/random_instance.hpp"

using namespace isac;
using isac::testing::random_instance;
using isac::testing::random_pmf;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail << "; failed: ";
            else detail << ", ";
            detail << what;
            pass = false;
        }
    }
};

// ---------------------------------------------------------------------------
// Oracles

double log2_safe(double p) { return p > 0.0 ? std::log2(p) : 0.0; }

/// P(y|x) summed straight from the tensor under a prior.
std::vector<std::vector<double>> comm_law(const ProblemInstance& inst, const Pmf& prior) {
    const auto& ch = inst.channel;
    std::vector<std::vector<double>> w(ch.nx(), std::vector<double>(ch.ny(), 0.0));
    for (std::size_t x = 0; x < ch.nx(); ++x)
        for (std::size_t s = 0; s < ch.ns(); ++s)
            for (std::size_t y = 0; y < ch.ny(); ++y)
                for (std::size_t z = 0; z < ch.nz(); ++z) w[x][y] += prior[s] * ch(x, s, y, z);
    return w;
}

/// I(X;Y) = H(X) + H(Y) - H(X,Y).
double mi(const Pmf& px, const std::vector<std::vector<double>>& w) {
    double hx = 0.0, hy = 0.0, hxy = 0.0;
    std::vector<double> py(w.front().size(), 0.0);
    for (std::size_t x = 0; x < px.size(); ++x) {
        hx -= px[x] * log2_safe(px[x]);
        for (std::size_t y = 0; y < py.size(); ++y) {
            const double j = px[x] * w[x][y];
            hxy -= j * log2_safe(j);
            py[y] += j;
        }
    }
    for (double v : py) hy -= v * log2_safe(v);
    return hx + hy - hxy;
}

/// Risk table A[x][z][sh] = sum_{s,y} P_S(s) w(x,s,y,z) d(sh,s).
std::vector<std::vector<std::vector<double>>> risk_table(const ProblemInstance& inst) {
    const auto& ch = inst.channel;
    const auto& d = *inst.distortion;
    std::vector A(ch.nx(), std::vector(ch.nz(), std::vector<double>(d.n_shat(), 0.0)));
    for (std::size_t x = 0; x < ch.nx(); ++x)
        for (std::size_t z = 0; z < ch.nz(); ++z)
            for (std::size_t sh = 0; sh < d.n_shat(); ++sh)
                for (std::size_t s = 0; s < ch.ns(); ++s)
                    for (std::size_t y = 0; y < ch.ny(); ++y) A[x][z][sh] += inst.p_s[s] * ch(x, s, y, z) * d(sh, s);
    return A;
}

/// Least achievable c(x): best reconstruction per (x,z) from the risk table.
std::vector<double> best_costs(const ProblemInstance& inst) {
    const auto A = risk_table(inst);
    std::vector<double> c(A.size(), 0.0);
    for (std::size_t x = 0; x < A.size(); ++x)
        for (const auto& row : A[x]) c[x] += *std::min_element(row.begin(), row.end());
    return c;
}

/// Every pmf on k letters with entries in multiples of 1/div.
void simplex_grid(std::size_t k, std::size_t div, const std::function<void(const Pmf&)>& f) {
    Pmf p(k);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == k) {
            p[i] = static_cast<double>(left) / static_cast<double>(div);
            f(p);
            return;
        }
        for (std::size_t m = 0; m <= left; ++m) {
            p[i] = static_cast<double>(m) / static_cast<double>(div);
            rec(i + 1, left - m);
        }
    };
    rec(0, div);
}

struct GridBest {
    double value = -1.0;
    Pmf p;
};

/// max objective(p) over the grid subject to feasible(p).
GridBest grid_max(std::size_t k, std::size_t div, const std::function<bool(const Pmf&)>& feasible,
                  const std::function<double(const Pmf&)>& objective) {
    GridBest best;
    simplex_grid(k, div, [&](const Pmf& p) {
        if (!feasible(p)) return;
        const double v = objective(p);
        if (v > best.value) best = {v, p};
    });
    return best;
}

double dotp(const std::vector<double>& a, const Pmf& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += a[i] * p[i];
    return s;
}

double kl_direct(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) d += p[i] * std::log2(p[i] / q[i]);
    return d;
}

/// Echo divergences e(x) straight from the tensor.
std::vector<double> echo_divergences(const ProblemInstance& inst) {
    const auto& ch = inst.channel;
    std::vector<double> e(ch.nx());
    for (std::size_t x = 0; x < ch.nx(); ++x) {
        std::vector<double> p(ch.nz(), 0.0), q(ch.nz(), 0.0);
        for (std::size_t s = 0; s < ch.ns(); ++s)
            for (std::size_t y = 0; y < ch.ny(); ++y)
                for (std::size_t z = 0; z < ch.nz(); ++z) {
                    p[z] += inst.p_s[s] * ch(x, s, y, z);
                    q[z] += (*inst.q_s)[s] * ch(x, s, y, z);
                }
        e[x] = kl_direct(p, q);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome estimator_optimality() {
    Outcome o;
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<std::size_t> dim(2, 3);
    std::size_t tables = 0;
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const isac::testing::Dims d{dim(rng), dim(rng), dim(rng), dim(rng), dim(rng)};
        const auto inst = random_instance(rng, d, false);
        const auto A = risk_table(inst);
        const auto c = per_input_cost(inst.channel, inst.p_s, *inst.distortion);

        // All |S_hat|^(|X||Z|) tables; entry k of the table is (x,z) = (k / nz, k % nz).
        const std::size_t cellsn = d.x * d.z;
        std::size_t count = 1;
        for (std::size_t k = 0; k < cellsn; ++k) count *= d.s_hat;
        std::vector<std::vector<double>> table_costs;
        table_costs.reserve(count);
        std::vector<std::size_t> t(cellsn, 0);
        for (std::size_t code = 0; code < count; ++code) {
            std::size_t rest = code;
            for (auto& v : t) v = rest % d.s_hat, rest /= d.s_hat;
            std::vector<double> ct(d.x, 0.0);
            for (std::size_t k = 0; k < cellsn; ++k) ct[k / d.z] += A[k / d.z][k % d.z][t[k]];
            table_costs.push_back(std::move(ct));
        }
        tables += count;
        simplex_grid(d.x, 8, [&](const Pmf& p) {
            const double mine = dotp(c, p);
            double brute = mine + 1.0;
            for (const auto& ct : table_costs) brute = std::min(brute, dotp(ct, p));
            worst = std::max(worst, mine - brute);
        });
    }
    o.require(worst <= 1e-12, "exhaustive table beats estimator");
    o.detail << "20 instances, " << tables << " tables; worst excess " << worst;
    return o;
}

Outcome capacity_vs_oracle() {
    Outcome o;
    std::mt19937_64 rng(2002);
    std::vector<ProblemInstance> instances;
    for (int i = 0; i < 20; ++i) instances.push_back(random_instance(rng));
    instances.push_back(isac::testing::sc1());
    double worst = 0.0, worst_lib = 0.0;
    for (const auto& inst : instances) {
        const auto c = best_costs(inst);
        const auto w = comm_law(inst, inst.p_s);
        const double dmin = *std::min_element(c.begin(), c.end());
        const auto unconstrained = grid_max(2, 200, [](const Pmf&) { return true; }, [&](const Pmf& p) { return mi(p, w); });
        const double dmax = std::max(dmin, dotp(c, unconstrained.p));
        for (double D : {dmin, 0.5 * (dmin + dmax), dmax}) {
            const double got = capacity_under_cost(inst, D).rate;
            const auto ref = grid_max(2, 200, [&](const Pmf& p) { return dotp(c, p) <= D + 1e-12; },
                                      [&](const Pmf& p) { return mi(p, w); });
            worst = std::max(worst, std::abs(got - ref.value));
            const double lib =
                grid_oracle(inst, OracleConstraint::cost_at_most, D, OracleObjective::rate_p, 1.0 / 200).rate;
            worst_lib = std::max(worst_lib, std::abs(lib - ref.value));
        }
    }
    o.require(worst <= 2e-3, "solver vs grid beyond 2e-3");
    o.require(worst_lib <= 1e-9, "library grid_oracle disagrees with test grid");

    const auto sc1 = isac::testing::sc1();
    const auto pt = capacity_under_cost(sc1, 0.1);
    // Closed form: binding constraint 0.5 P_X(0) = 0.1, BSC(0.1) output Ber(0.2*0.1 + 0.8*0.9).
    const double q1 = 0.2 * 0.1 + 0.8 * 0.9;
    const double h = [](double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }(0.1);
    const double closed = -q1 * std::log2(q1) - (1 - q1) * std::log2(1 - q1) - h;
    o.require(std::abs(pt.rate - 0.35775) <= 1e-3 && std::abs(pt.rate - closed) <= 1e-3, "SC-1 C(0.1)");
    o.require(std::abs(pt.p_x[0] - 0.200) <= 1e-3, "SC-1 P_X(0)");
    o.detail << "21 instances x 3 D; worst |solver - grid| " << worst << "; SC-1 C(0.1) = " << pt.rate
             << " (closed form " << closed << ") at P_X(0) = " << pt.p_x[0];
    return o;
}

Outcome exponent_vs_oracle() {
    Outcome o;
    const auto inst = isac::testing::sc1();
    const auto e = echo_divergences(inst);
    const auto wp = comm_law(inst, inst.p_s), wq = comm_law(inst, *inst.q_s);
    const auto ref = grid_max(2, 500, [&](const Pmf& p) { return dotp(e, p) >= 0.5 - 1e-12; },
                              [&](const Pmf& p) { return std::min(mi(p, wp), mi(p, wq)); });
    const auto pt = rate_under_exponent(inst, 0.5);
    o.require(std::abs(pt.rate - 0.47131) <= 2e-3, "rate at E=0.5");
    o.require(std::abs(pt.p_x[1] - 0.6785) <= 2e-3, "P_X(1) at E=0.5");
    o.require(std::abs(pt.rate - ref.value) <= 2e-3, "rate vs grid oracle");

    const double emax_ref = kl_direct({0.5, 0.5}, {0.1, 0.9});
    const auto last = re_frontier(inst, 5).back();
    o.require(std::abs(last.objective - 0.73697) <= 1e-3 && std::abs(last.objective - emax_ref) <= 1e-3,
              "maximum exponent");
    o.require(std::abs(last.p_x[1] - 1.0) <= 1e-9, "P_X(1)=1 at maximum exponent");
    o.detail << "E=0.5: R = " << pt.rate << " at P_X(1) = " << pt.p_x[1] << " (grid 1/500: " << ref.value << " at "
             << ref.p[1] << "); E_max = " << last.objective << " at P_X(1) = " << last.p_x[1];
    return o;
}

Outcome corollary_reduction() {
    Outcome o;
    std::mt19937_64 rng(4004);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        auto inst = random_instance(rng, {3, 2, 2, 3, 2});
        inst.p_s = {1.0, 0.0};
        inst.q_s = Pmf{0.0, 1.0};
        const Pmf px = random_pmf(rng, 3);
        const auto pz = split_marginals(inst.channel).second;
        const double got = expected_kl(px, mix_over_state(pz, inst.p_s), mix_over_state(pz, *inst.q_s));
        double ref = 0.0;
        for (std::size_t x = 0; x < 3; ++x) {
            std::vector<double> a(3, 0.0), b(3, 0.0);
            for (std::size_t y = 0; y < 2; ++y)
                for (std::size_t z = 0; z < 3; ++z) a[z] += inst.channel(x, 0, y, z), b[z] += inst.channel(x, 1, y, z);
            ref += px[x] * kl_direct(a, b);
        }
        worst = std::max(worst, std::abs(got - ref));
    }
    o.require(worst <= 1e-12, "expected_kl differs from per-state divergence");
    o.detail << "20 instances; worst difference " << worst;
    return o;
}

constexpr std::uint64_t kSteinSeed = 5005;
constexpr std::uint64_t kCodingSeed = 7007;

std::vector<SimulationReport> stein_runs(std::size_t workers) {
    const auto inst = isac::testing::xor_state_echo(0.1, 0.4);
    HtOptions opt;
    opt.workers = workers;
    std::vector<SimulationReport> out;
    for (std::size_t n : {250u, 500u, 1000u, 2000u})
        out.push_back(run_ht_experiment(inst, Pmf{0.5, 0.5}, n, 0.1, SimMode::exact_dp, 0, kSteinSeed, opt));
    return out;
}

Outcome stein_achievability() {
    Outcome o;
    const double limit = kl_direct({0.9, 0.1}, {0.6, 0.4});
    const auto runs = stein_runs(1);
    const double e500 = *runs[1].exponent_hat;
    o.require(e500 >= 0.26 && e500 <= 0.32647, "exponent(500) outside [0.26, 0.32647]");
    for (std::size_t i = 1; i < runs.size(); ++i)
        o.require(*runs[i].exponent_hat > *runs[i - 1].exponent_hat, "not strictly increasing");
    for (const auto& r : runs) {
        o.require(std::abs(*r.stein_limit - 0.32647) <= 1e-4 && std::abs(*r.stein_limit - limit) <= 1e-12,
                  "limit E");
        o.require(*r.alpha_exact <= 0.1, "type-I level");
    }
    o.detail << "exponent_hat(250, 500, 1000, 2000) =";
    for (const auto& r : runs) o.detail << ' ' << *r.exponent_hat;
    o.detail << "; E = " << *runs[0].stein_limit;
    return o;
}

Outcome typicality_mass() {
    Outcome o;
    std::mt19937_64 rng(6006);
    std::size_t checked = 0, vacuous = 0;
    double min_margin = 1.0;
    // Single binary sequences (2 cells) and binary pairs (4 cells).
    for (std::size_t k : {1u, 2u}) {
        const std::size_t cells = k == 1 ? 2 : 4;
        std::vector<Pmf> laws = {Pmf(cells, 1.0 / static_cast<double>(cells))};
        for (int i = 0; i < 4; ++i) laws.push_back(random_pmf(rng, cells));
        for (std::size_t n : {8u, 10u, 12u})
            for (double mu : {0.15, 0.2, 0.25}) {
                const double bound = typicality_lower_bound(mu, n, cells);
                if (bound <= 0.0) {
                    vacuous += laws.size();
                    continue;
                }
                for (const auto& p : laws) {
                    // Enumerate every sequence of cell indices.
                    double mass = 0.0;
                    const std::size_t total = static_cast<std::size_t>(std::llround(std::pow(cells, n)));
                    Sequence seq(n);
                    for (std::size_t code = 0; code < total; ++code) {
                        std::size_t rest = code;
                        double pr = 1.0;
                        for (auto& v : seq) v = rest % cells, rest /= cells, pr *= p[v];
                        if (is_strongly_typical(joint_type(seq, cells), p, mu)) mass += pr;
                    }
                    o.require(mass >= bound, "mass below bound at n=" + std::to_string(n));
                    min_margin = std::min(min_margin, mass - bound);
                    ++checked;
                }
            }
    }
    o.require(checked > 0, "no non-vacuous case");
    o.detail << checked << " non-vacuous cases checked (" << vacuous << " vacuous skipped); smallest margin "
             << min_margin;
    return o;
}

std::vector<SimulationReport> coding_runs(std::size_t workers) {
    RdOptions opt;
    opt.workers = workers;
    const auto inst = isac::testing::sc1();
    return {run_rd_experiment(inst, 0.25, 0.25, 8, 2000, kCodingSeed, opt),
            run_rd_experiment(inst, 0.25, 0.25, 16, 2000, kCodingSeed, opt)};
}

Outcome coding_sanity() {
    Outcome o;
    const auto runs = coding_runs(1);
    o.require(*runs[1].p_error_hat < 0.5, "p_error(16) >= 0.5");
    o.require(*runs[1].p_error_hat < *runs[0].p_error_hat, "not decreasing 8 -> 16");
    o.detail << "p_error_hat(n=8) = " << *runs[0].p_error_hat << ", p_error_hat(n=16) = " << *runs[1].p_error_hat
             << " (Wilson [" << runs[1].p_error_ci->lo << ", " << runs[1].p_error_ci->hi << "])";
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto s1 = stein_runs(1), s8 = stein_runs(8);
    const auto c1 = coding_runs(1), c8 = coding_runs(8);
    o.require(s1 == s8, "Stein reports differ");
    o.require(c1 == c8, "coding reports differ");
    bool json_equal = true;
    for (std::size_t i = 0; i < s1.size(); ++i) json_equal &= to_json(s1[i]).dump() == to_json(s8[i]).dump();
    for (std::size_t i = 0; i < c1.size(); ++i) json_equal &= to_json(c1[i]).dump() == to_json(c8[i]).dump();
    o.require(json_equal, "serialized reports differ");
    o.detail << "criteria 5 and 7 rerun with 1 and 8 workers; " << s1.size() + c1.size() << " reports compared";
    return o;
}

Outcome info_measures() {
    Outcome o;
    const double h = entropy(std::vector<double>{0.1, 0.9});
    const double m = mutual_information(std::vector<double>{0.5, 0.5}, InputConditional(2, 2, {0.9, 0.1, 0.1, 0.9}));
    const double d = kl_divergence(std::vector<double>{0.1, 0.9}, std::vector<double>{0.4, 0.6});
    o.require(std::abs(h - 0.46900) <= 1e-4, "entropy");
    o.require(std::abs(m - 0.53100) <= 1e-4, "BSC mutual information");
    o.require(std::abs(d - 0.32647) <= 1e-4, "KL divergence");

    std::mt19937_64 rng(9009);
    std::size_t checks = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t nx = 2 + i % 2, ny = 2 + (i / 2) % 2;
        std::vector<double> rows;
        for (std::size_t x = 0; x < nx; ++x) {
            const Pmf r = random_pmf(rng, ny);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        const InputConditional w(nx, ny, rows);
        const Pmf p = random_pmf(rng, nx), q = random_pmf(rng, nx);
        for (double a : {0.25, 0.5, 0.75}) {
            Pmf mix(nx);
            for (std::size_t x = 0; x < nx; ++x) mix[x] = a * p[x] + (1 - a) * q[x];
            o.require(mutual_information(mix, w) >= a * mutual_information(p, w) + (1 - a) * mutual_information(q, w) - 1e-10,
                      "concavity");
            ++checks;
        }
    }
    o.detail << "h(0.1) = " << h << ", I_BSC = " << m << ", D = " << d << "; " << checks << " concavity checks";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 = no runtime bound
    Outcome (*run)();
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {1, "estimator optimality", 10, estimator_optimality},
        {2, "capacity-distortion vs oracle", 60, capacity_vs_oracle},
        {3, "rate-exponent vs oracle", 60, exponent_vs_oracle},
        {4, "degenerate-prior reduction", 0, corollary_reduction},
        {5, "Stein-exponent achievability", 30, stein_achievability},
        {6, "typicality mass bound", 20, typicality_mass},
        {7, "communication achievability", 30, coding_sanity},
        {8, "determinism across workers", 0, determinism},
        {9, "information measures", 0, info_measures},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0 && secs >= c.limit_s) out.require(false, "runtime over limit");
        failures += out.pass ? 0 : 1;
        char timing[64];
        if (c.limit_s > 0) std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", secs, c.limit_s);
        else std::snprintf(timing, sizeof timing, "%.2f s", secs);
        std::printf("%s  [%d] %s (%s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, timing,
                    out.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
