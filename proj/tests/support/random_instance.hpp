#pragma once

// Random problem instances for property tests. Rows of the channel tensor,
// priors and input pmfs are uniform on the simplex (Dirichlet(1)); distortion
// entries are uniform on [0, 1].

#include <cstddef>
#include <random>

#include "isac/model.hpp"

namespace isac::testing {

inline Pmf random_pmf(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> expo(1.0);
    Pmf p(n);
    double sum = 0.0;
    for (auto& v : p) sum += (v = expo(rng));
    for (auto& v : p) v /= sum;
    return p;
}

struct Dims {
    std::size_t x = 2, s = 2, y = 2, z = 2, s_hat = 2;
};

inline ProblemInstance random_instance(std::mt19937_64& rng, Dims d = {}, bool with_alternative = true) {
    std::vector<double> w;
    for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t s = 0; s < d.s; ++s) {
            const Pmf row = random_pmf(rng, d.y * d.z);
            w.insert(w.end(), row.begin(), row.end());
        }
    ProblemInstance inst{ChannelModel(Alphabet::indexed(d.x), Alphabet::indexed(d.s), Alphabet::indexed(d.y),
                                      Alphabet::indexed(d.z), std::move(w)),
                         random_pmf(rng, d.s), std::nullopt, std::nullopt};
    if (with_alternative) inst.q_s = random_pmf(rng, d.s);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> dist(d.s_hat * d.s);
    for (auto& v : dist) v = unit(rng);
    inst.distortion = DistortionSpec(Alphabet::indexed(d.s_hat), d.s, std::move(dist));
    return inst;
}

/// Y = X xor S, Z = S on binary alphabets, Hamming distortion.
inline ProblemInstance xor_state_echo(double p1, double q1) {
    auto ch = make_channel(2, 2, 2, 2, [](std::size_t x, std::size_t s, std::size_t y, std::size_t z) {
        return (y == (x ^ s) ? 1.0 : 0.0) * (z == s ? 1.0 : 0.0);
    });
    const Alphabet s = ch.s();
    return ProblemInstance{std::move(ch), {1.0 - p1, p1}, Pmf{1.0 - q1, q1}, DistortionSpec::hamming(s)};
}

/// Y = X xor N (N ~ Ber(0.1), independent of S); Z = S when x = 1 and a fair
/// coin when x = 0; P_S = Ber(0.5), Q_S = Ber(0.9).
inline ProblemInstance sc1() {
    auto ch = make_channel(2, 2, 2, 2, [](std::size_t x, std::size_t s, std::size_t y, std::size_t z) {
        const double py = y == x ? 0.9 : 0.1;
        const double pz = x == 1 ? (z == s ? 1.0 : 0.0) : 0.5;
        return py * pz;
    });
    const Alphabet s = ch.s();
    return ProblemInstance{std::move(ch), {0.5, 0.5}, Pmf{0.1, 0.9}, DistortionSpec::hamming(s)};
}

} // namespace isac::testing
