// rng.hpp — seeded random sampling used by the randomized checks and experiments

#pragma once

#include <cstdint>
#include <random>

#include "qcollide/linalg.hpp"

namespace qcollide {

using Rng = std::mt19937_64;

// 53-bit uniform in [0,1); identical across standard libraries for a given engine.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

// Haar-random single-qubit unitary: |a| = cos(eta) with sin^2(eta) uniform,
// two uniform phases for a and b, and a uniform global phase.
Mat2 haar_qubit_unitary(Rng& rng);

// Uniformly random pure state of the given dimension (normalized complex Gaussian).
VecX random_pure_state(int dim, Rng& rng);

// Random mixed state from a Ginibre matrix G: G G^H / Tr(G G^H).
MatX random_density(int dim, Rng& rng);

// Derive an independent stream for trial `index` of a run seeded with `seed`.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qcollide
