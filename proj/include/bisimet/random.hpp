#pragma once

#include <cstdint>
#include <random>

#include "bisimet/model.hpp"

namespace bisimet {

/**
 * Deterministic random source for test instances.
 *
 * The generator is the standard 64-bit Mersenne Twister (mt19937_64) and the
 * unit-interval mapping is fixed as (next() >> 11) * 2^-53, so any
 * implementation of the same generator reproduces identical instances from
 * the same seed; nothing here depends on library-specific distributions.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform draw from [0,1).
    Scalar uniform01() {
        return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform draw from [lo,hi).
    Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer from {lo, ..., hi}, by rejection-free scaling of a
    /// unit draw (exact enough for instance generation).
    Eigen::Index uniform_index(Eigen::Index lo, Eigen::Index hi) {
        return lo + static_cast<Eigen::Index>(uniform01() * static_cast<Scalar>(hi - lo + 1));
    }

  private:
    std::mt19937_64 gen_;
};

/// Random distribution over `n` states. Draws below 0.25 are zeroed before
/// normalization so zero-probability states occur routinely.
Dist random_dist(Rng& rng, Eigen::Index n);

/// Random model with the given shape: kernels from `random_dist`, rewards
/// uniform in [0,1], states named s0..s{n-1} and actions a0..a{k-1}.
Mdp random_mdp(Rng& rng, Eigen::Index n_states, Eigen::Index n_actions);

/// Random 1-bounded pseudometric: a symmetric uniform matrix with zero
/// diagonal, closed under the triangle inequality by min-plus relaxation.
PMetric random_pmetric(Rng& rng, Eigen::Index n);

/// Random predicate with entries uniform in [0,1].
Predicate random_predicate(Rng& rng, Eigen::Index n);

}  // namespace bisimet
