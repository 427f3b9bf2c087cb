#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrc/costs.hpp"

namespace nrc {

enum class TaskKind { Classification, Regression };

/// Examples x features table plus one label/target per example.
/// Classification labels are -1 or +1.
struct Dataset {
  Mat features;
  Vec targets;
  std::vector<std::string> feature_names;
  TaskKind kind = TaskKind::Classification;
  int blank_lines_skipped = 0;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
};

/// The 57 attribute names of the UCI spambase table, in file order.
const std::vector<std::string>& spambase_columns();

/// Comma-separated UCI spambase rows (57 attributes, then a 0/1 label).
/// `features` accepts either full attribute names ("word_freq_make") or the
/// bare word ("make"). Labels map 0 -> -1 and 1 -> +1.
Dataset load_spambase(const std::string& path, const std::vector<std::string>& features);

/// Column names of the UCI housing table; MEDV (index 13) is the target.
const std::vector<std::string>& housing_columns();

/// Whitespace- or comma-separated UCI housing rows (14 columns); picks the
/// feature columns by index and uses MEDV as target.
Dataset load_housing(const std::string& path, const std::vector<int>& feature_columns);

/// Column-wise z-scoring of the features (constant columns are only centered).
void standardize(Dataset& ds);

/// Seeded shuffle, then contiguous blocks whose sizes differ by at most one.
std::vector<Dataset> partition(const Dataset& ds, int agents, std::uint64_t seed);

struct LossParams {
  double gamma = 1.0;  ///< ridge weight on the non-intercept coefficients
  double beta = 50.0;  ///< smooth Huber scale (regression only)
};

/// One local cost per part: binomial deviance for classification, smooth
/// Huber for regression.
CostSet to_costs(const std::vector<Dataset>& parts, const LossParams& params);

}  // namespace nrc
