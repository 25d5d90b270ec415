#pragma once

// Common / individual feature separation for ensembles stacked along the
// third mode, plus two matrix baselines: PCA of the vertically stacked blocks
// and an alternating search for directions shared by every block's column
// space.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tdcif/decomp.hpp"
#include "tdcif/tensor.hpp"

namespace tdcif {

/// slices[k] = A_k diag(lambda_k) B_k^T; mixing(:, k) = c_k >= 0.
struct CommonFeatureBank {
  std::vector<Matrix> slices;
  Matrix mixing;  // Q x K

  void validate() const;
  std::size_t size() const noexcept { return slices.size(); }
  /// O*P x K design with one vectorized slice per column.
  Matrix design() const;
};

/// K_n = {k : C(n, k) > tau * max_j C(n, j)}, weights alpha_k = C(n, k).
struct SubsetRule {
  double tau = 0.0;
};

struct FeatureSplit {
  std::vector<Matrix> common;
  std::vector<Matrix> individual;
  std::vector<std::vector<std::size_t>> subsets;  // K_n per observation
  SubsetRule rule;
};

CommonFeatureBank build_feature_bank(const LL1Factors& f);

/// Concatenates the slices of several banks (mixing is left empty).
CommonFeatureBank merge_banks(std::span<const CommonFeatureBank> banks);

/// Subtracts each observation's weighted common features. common[n] +
/// individual[n] reproduces slice n bit for bit wherever the common entry is
/// no larger in magnitude than the data entry; elsewhere to within one
/// rounding of the common entry.
FeatureSplit split_features(const DenseTensor& t, const CommonFeatureBank& bank,
                            SubsetRule rule = {});

/// Individual part of an unseen observation: NNLS weights against the bank
/// slices, weighted sum subtracted. `weights`, when given, receives them.
Matrix individual_part(const Matrix& observation, const CommonFeatureBank& bank,
                       Vector* weights = nullptr);

/// Writes dir/common.dtf1, dir/individual.dtf1 (O x P x Q stacks) and
/// dir/manifest.json with the subset rule.
void save_split(const std::filesystem::path& dir, const FeatureSplit& split);

// --- matrix baselines -------------------------------------------------------------

/// Rank-M truncated SVD of [X_1; X_2; ...; X_N]: loadings (J x M) span the
/// common subspace, scores (sum I_n x M) hold the stacked coefficients.
struct StackedPca {
  Matrix loadings;
  Matrix scores;
  Vector singular_values;  // all of them, descending
};

StackedPca stacked_pca(std::span<const Matrix> xs, std::size_t rank);

struct CommonBasisConfig {
  std::size_t max_components = 1;
  double threshold = -1.0;  // negative: 0.01 * N
  int max_iterations = 200;
  double rel_tol = 1e-9;
  std::uint64_t seed = 0;
};

/// Accepted common directions a_m (orthonormal columns) and their final costs
/// sum_n |Q_n z_n - a_m|^2; `cost_histories` holds every candidate's cost per
/// iteration, including the rejected last one.
struct CommonBasis {
  Matrix basis;
  Vector residual_costs;
  std::vector<std::vector<double>> cost_histories;
};

/// Q_n from the QR of each X_n (I x J_n, I >= J_n). Alternates z_n = Q_n^T a
/// and a = normalized mean of Q_n z_n; accepts while the cost is below the
/// threshold, deflating every Q_n by the accepted direction.
CommonBasis common_basis_qr(std::span<const Matrix> xs, const CommonBasisConfig& cfg);

}  // namespace tdcif
