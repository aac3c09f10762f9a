#pragma once

#include "rkpod/pipeline.hpp"

#include <functional>
#include <vector>

namespace rkpod {

// kpod_loss + log(n) * k * d, with d the number of active center columns.
double bic(const MaskedMatrix& m, const FitResult& fit);

// Probability over unordered pairs that exactly one of the two partitions
// puts the pair in the same cluster. Symmetric, in [0, 1], invariant to label
// permutations.
double clustering_distance(const Membership& a, const Membership& b);

enum class SplitScheme { Tripartition, Bootstrap };

// Labels the rows it is given; produced by an ArmFitter from one training set.
using Predictor = std::function<Membership(const MaskedMatrix& rows)>;
using ArmFitter = std::function<Predictor(const MaskedMatrix& train, std::uint64_t seed)>;

// Average disagreement between validation labelings predicted from two
// independently trained fits, over B random splits. Tripartition draws two
// disjoint training sets of floor(n/3) rows and validates on the rest;
// Bootstrap draws the training sets with replacement and validates on all
// rows. Arm streams derive from (seed, repetition, arm): deterministic for
// any worker count.
double instability(const MaskedMatrix& m, const ArmFitter& fitter, int B, SplitScheme scheme,
                   std::uint64_t seed, int workers = 1);

// Standard arm: run the configured method on the training rows, then label
// validation rows by nearest center over their observed features.
ArmFitter make_arm_fitter(int k, const FitConfig& cfg);

enum class Criterion { Instability, Bic };

struct TuneOpts {
    int B = 30;
    SplitScheme scheme = SplitScheme::Tripartition;
    // By default instability arms are self-contained: each training split
    // runs its own pilot for adaptive weights. Setting this reuses the
    // full-data pilot's weights inside every arm instead.
    bool share_pilot_weights = false;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct TuningResult {
    std::vector<double> grid;
    std::vector<double> criterion_values;
    std::vector<int> active_counts;  // from the full-data fit at each lambda
    int chosen_index = -1;
    double chosen_lambda = 0.0;
    Criterion criterion = Criterion::Instability;
    MethodFit chosen_fit;
};

// The 20-point log grid 10^(-3 + 4s/19), s = 0..19.
std::vector<double> default_lambda_grid();

// Evaluates the criterion over the grid and returns the argmin (ties to the
// smallest lambda) together with the full-data fit at the chosen value.
// base.method must be RegGl or RegL0; the pilot k-POD stage for adaptive
// weights is computed once and shared across the grid, while instability arms
// recompute their own pilots per training split.
TuningResult select_lambda(const MaskedMatrix& m, int k, const FitConfig& base,
                           const std::vector<double>& grid, Criterion criterion,
                           const TuneOpts& opts);

}  // namespace rkpod
