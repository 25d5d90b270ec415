#pragma once

// Tensor decompositions for order-3 data:
//   * CPD by alternating least squares (Kruskal form),
//   * truncated HOSVD (orthogonal Tucker form),
//   * the rank-(L_k, L_k, 1) block-term decomposition with a non-negative
//     third-mode factor, fitted by block-wise alternating least squares.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tdcif/tensor.hpp"

namespace tdcif {

enum class InitMethod { Random, Hosvd };

struct DecompConfig {
  int max_sweeps = 500;
  double rel_tol = 1e-8;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::Random;

  /// Throws InvalidArgument unless max_sweeps >= 1 and rel_tol > 0.
  void validate() const;
};

/// A relative error at or below this counts as an exact fit and stops the
/// sweeps even when the relative change is still noisy.
inline constexpr double kExactFitFloor = 1e-12;

/// Per-run diagnostics shared by the iterative decompositions.
struct RunInfo {
  std::vector<double> fit_history;  // relative Frobenius error after each sweep
  int sweeps = 0;
  bool converged = false;
  int degenerate_columns = 0;  // zero-norm columns replaced during normalization
  int zero_c_entries = 0;      // exact zeros in the non-negative mode (LL1 only)
  bool rank_flagged = false;   // CPD rank exceeds the smallest extent
  std::uint64_t seed = 0;

  double final_fit() const { return fit_history.empty() ? 1.0 : fit_history.back(); }
};

struct KruskalFactors {
  std::vector<Matrix> factors;  // mode n: I_n x R, unit-norm columns
  Vector weights;               // R non-negative weights
  RunInfo info;

  std::size_t rank() const noexcept { return weights.size(); }
};

struct TuckerFactors {
  DenseTensor core;
  std::vector<Matrix> factors;  // orthonormal columns
};

/// One rank-(L, L, 1) term: (A diag(lambda) B^T) o c.
struct BlockTerm {
  Matrix a;       // O x L, unit-norm columns
  Matrix b;       // P x L, unit-norm columns
  Vector c;       // Q, unit norm, >= 0
  Vector lambda;  // L non-negative scales

  std::size_t rank() const noexcept { return lambda.size(); }
  /// A diag(lambda) B^T, the O x P pattern this term contributes.
  Matrix slice() const;
};

struct LL1Factors {
  std::vector<BlockTerm> terms;
  RunInfo info;

  std::vector<std::size_t> ranks() const;
  Shape shape() const;
};

KruskalFactors cpd_als(const DenseTensor& t, std::size_t rank, const DecompConfig& cfg);

/// HOSVD truncated to `mlrank` (one entry per mode): factors are leading left
/// singular vectors of each unfolding and core = t x_n A_n^T.
TuckerFactors hosvd(const DenseTensor& t, std::span<const std::size_t> mlrank);

/// Non-negative LL1 fit of an order-3 tensor, one entry of `ranks` per term.
LL1Factors ll1_nn(const DenseTensor& t, std::span<const std::size_t> ranks,
                  const DecompConfig& cfg);

/// Runs `restarts` independent fits (seeds derived from cfg.seed) and keeps
/// the lowest final fit, lowest restart index on ties. Restarts run
/// concurrently; the result is independent of the thread count.
KruskalFactors cpd_als_best(const DenseTensor& t, std::size_t rank, const DecompConfig& cfg,
                            int restarts);
LL1Factors ll1_nn_best(const DenseTensor& t, std::span<const std::size_t> ranks,
                       const DecompConfig& cfg, int restarts);

DenseTensor reconstruct(const KruskalFactors& f);
DenseTensor reconstruct(const TuckerFactors& f);
DenseTensor reconstruct(const LL1Factors& f);

/// |t - model|_F / |t|_F, or the absolute error when t is all zeros.
double relative_error(const DenseTensor& t, const DenseTensor& model);
double fit_error(const DenseTensor& t, const KruskalFactors& f);
double fit_error(const DenseTensor& t, const TuckerFactors& f);
double fit_error(const DenseTensor& t, const LL1Factors& f);

/// Mode-n MTTKRP of an order-3 tensor: X_(n) times the Khatri-Rao product of
/// the other two factors (later mode on the left). `factors[mode]` is ignored.
Matrix mttkrp(const DenseTensor& t, std::span<const Matrix> factors, std::size_t mode);

}  // namespace tdcif
