#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <span>
#include <vector>

#include "tdcif/decomp.hpp"
#include "tdcif/error.hpp"
#include "tdcif/rng.hpp"

namespace tdcif::detail {

Matrix random_normal(std::size_t rows, std::size_t cols, Rng& rng);

/// Overwrites `col` with a random unit vector; non-negative entries when
/// `nonnegative` is set.
void fill_random_unit(std::span<double> col, Rng& rng, bool nonnegative);

/// Scales column j to unit norm and returns the norms. A zero column is
/// replaced by a random unit column with norm reported as 0; `degenerate`
/// counts those.
Vector normalize_columns(Matrix& m, Rng& rng, int& degenerate, bool nonnegative = false);

/// Stopping rule: relative change in fit below rel_tol, or an exact fit.
bool fit_converged(double previous, double current, double rel_tol);

/// Leading `count` left singular vectors of the mode-n unfolding; columns
/// beyond the unfolding's rank are filled from `rng`.
Matrix leading_left_vectors(const DenseTensor& t, std::size_t mode, std::size_t count, Rng& rng);

void require_order3(const DenseTensor& t, const char* what);

/// Runs fit(seed_i) for i < restarts concurrently and returns the run with
/// the smallest final fit (lowest index on ties). `Fit` returns a type with
/// an `info` member.
template <typename Fit>
auto best_of(std::uint64_t seed, int restarts, Fit&& fit) -> decltype(fit(seed)) {
  using Result = decltype(fit(seed));
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  std::vector<std::optional<Result>> runs(static_cast<std::size_t>(restarts));
  std::vector<std::exception_ptr> errors(runs.size());
#pragma omp parallel for schedule(dynamic) if (restarts > 1)
  for (int i = 0; i < restarts; ++i) {
    try {
      const std::uint64_t s =
          restarts == 1 ? seed : stream_seed(seed, "restart", static_cast<std::uint64_t>(i));
      runs[static_cast<std::size_t>(i)].emplace(fit(s));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  std::size_t best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i]) continue;
    if (best == runs.size() || runs[i]->info.final_fit() < runs[best]->info.final_fit()) best = i;
  }
  if (best == runs.size())
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  return std::move(*runs[best]);
}

}  // namespace tdcif::detail
