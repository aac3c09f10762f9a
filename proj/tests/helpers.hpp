#pragma once

#include "rkpod/masked_matrix.hpp"
#include "rkpod/rng.hpp"

#include <vector>

namespace rkpod::test {

inline Matrix random_matrix(Index n, Index p, Rng& rng, double scale = 1.0) {
    Matrix m(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

inline BoolMatrix random_mask(Index n, Index p, double observe_prob, Rng& rng) {
    BoolMatrix mask(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) mask(i, j) = rng.uniform() < observe_prob;
    }
    return mask;
}

inline Membership random_membership(Index n, int k, Rng& rng) {
    Membership u(n);
    for (Index i = 0; i < n; ++i) u(i) = rng.uniform_int(k);
    return u;
}

// Ensures each cluster has at least one row so cluster means exist.
inline Membership random_membership_all_nonempty(Index n, int k, Rng& rng) {
    Membership u = random_membership(n, k, rng);
    for (int l = 0; l < k && l < n; ++l) u(l) = l;
    return u;
}

}  // namespace rkpod::test
