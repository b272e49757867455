#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ekma/features.hpp"

namespace ekma {

// Per-column training mean and population standard deviation. Zero
// deviations are stored as 1 so standardization never divides by zero.
struct StandardizationStats {
  std::vector<std::string> feature_names;
  std::vector<double> means;
  std::vector<double> stds;
};

StandardizationStats compute_standardization(const FeatureMatrix& train);

// (z - mean) / std per cell; missing cells stay missing.
FeatureMatrix standardize(const FeatureMatrix& m, const StandardizationStats& stats);

// Fills missing cells of `target` from its k nearest rows in the fully
// observed `pool`. Both matrices are given in raw units; distances use the
// standardized values over the target row's observed coordinates, scaled by
// sqrt(p / observed), and each gap is filled with the plain mean of the
// neighbours' raw values. Ties in distance go to the lower pool index.
// Passing the same object as target and pool excludes self-matches.
FeatureMatrix knn_impute(const FeatureMatrix& target, const FeatureMatrix& pool, const StandardizationStats& stats,
                         int k);

// Completes the training matrix against itself. For each missing cell only
// rows observed in that column are donors; distances use coordinates
// observed in both rows, scaled by sqrt(p / common). Values come from the
// original observations, so the result does not depend on row order.
FeatureMatrix impute_training_pool(const FeatureMatrix& train, const StandardizationStats& stats, int k);

namespace reference {

// Single-threaded, full-sort versions of the kernels above.
FeatureMatrix knn_impute(const FeatureMatrix& target, const FeatureMatrix& pool, const StandardizationStats& stats,
                         int k);
FeatureMatrix impute_training_pool(const FeatureMatrix& train, const StandardizationStats& stats, int k);

}  // namespace reference

void write_standardization(std::ostream& out, const StandardizationStats& stats);
StandardizationStats read_standardization(std::istream& in);

}  // namespace ekma
