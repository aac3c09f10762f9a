#pragma once

#include "rkpod/masked_matrix.hpp"
#include "rkpod/rng.hpp"

#include <vector>

namespace rkpod {

struct InitPair {
    Membership membership;
    Centers centers;
};

// Complete-case initialization: k-means++ on the fully observed rows, then
// assign every row to its nearest center using only that row's observed
// features. Throws when fewer than k complete rows exist; callers should fall
// back to init_impt.
InitPair init_comp(const MaskedMatrix& m, int k, Rng& rng);

// Imputation-based initialization: pre-impute by column-wise observed means,
// sample k rows of the imputed matrix as centers (jittering duplicates to
// distinctness), assign by full Euclidean distance on the imputed matrix.
InitPair init_impt(const MaskedMatrix& m, int k, Rng& rng);

// Sparse initialization: for each fraction f, keep the ceil(f*p) columns of
// the pilot centers with the largest l2 norm and zero the rest.
std::vector<Centers> init_sparse(const Centers& pilot_centers, const std::vector<double>& fractions);

// Leading 1%, 2%, 5%, 10%, 15%, 20%, 30%, 40%, 50%, 100% of the features.
std::vector<double> sparse_fractions_default();

// Variant for low-dimensional data: 10%, 20%, ..., 100%.
std::vector<double> sparse_fractions_low_dim();

}  // namespace rkpod
