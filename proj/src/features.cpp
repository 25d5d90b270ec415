#include "tdcif/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tdcif/dtf1.hpp"
#include "tdcif/error.hpp"
#include "tdcif/linalg.hpp"
#include "tdcif/rng.hpp"

namespace tdcif {

namespace {

// Adjusts `common` so that fl(common + individual) == x, given
// individual = fl(x - common). Always succeeds when |common| <= |x|; when
// common dominates x no such pair exists on the grid of common, and the
// unadjusted pair is kept.
double make_additive(double x, double common, double& individual) {
  const double original = common;
  individual = x - common;
  for (int i = 0; i < 4; ++i) {
    if (common + individual == x) return common;
    common = x - individual;
    if (common + individual == x) return common;
    individual = x - common;
  }
  individual = x - original;
  return original;
}

}  // namespace

void CommonFeatureBank::validate() const {
  if (slices.empty()) throw InvalidArgument("feature bank is empty");
  for (const auto& s : slices)
    if (s.rows() != slices[0].rows() || s.cols() != slices[0].cols())
      throw InvalidArgument("feature bank slices differ in size");
  if (!mixing.empty()) {
    if (mixing.cols() != slices.size())
      throw InvalidArgument("feature bank: mixing has " + std::to_string(mixing.cols()) +
                            " columns for " + std::to_string(slices.size()) + " slices");
    for (double v : mixing.data())
      if (v < 0.0) throw InvalidArgument("feature bank: negative mixing weight");
  }
}

Matrix CommonFeatureBank::design() const {
  validate();
  Matrix m(slices[0].size(), slices.size());
  for (std::size_t k = 0; k < slices.size(); ++k)
    std::copy(slices[k].data().begin(), slices[k].data().end(), m.col(k).begin());
  return m;
}

CommonFeatureBank build_feature_bank(const LL1Factors& f) {
  if (f.terms.empty()) throw InvalidArgument("build_feature_bank: no block terms");
  const std::size_t q = f.terms[0].c.size();
  CommonFeatureBank bank;
  bank.mixing = Matrix(q, f.terms.size());
  for (std::size_t k = 0; k < f.terms.size(); ++k) {
    const auto& t = f.terms[k];
    if (t.c.size() != q) throw InvalidArgument("build_feature_bank: inconsistent term sizes");
    bank.slices.push_back(t.slice());
    std::copy(t.c.begin(), t.c.end(), bank.mixing.col(k).begin());
  }
  bank.validate();
  return bank;
}

CommonFeatureBank merge_banks(std::span<const CommonFeatureBank> banks) {
  CommonFeatureBank out;
  for (const auto& b : banks) out.slices.insert(out.slices.end(), b.slices.begin(), b.slices.end());
  out.validate();
  return out;
}

FeatureSplit split_features(const DenseTensor& t, const CommonFeatureBank& bank,
                            SubsetRule rule) {
  bank.validate();
  if (t.order() != 3) throw InvalidArgument("split_features: expects an order-3 tensor");
  if (t.extent(0) != bank.slices[0].rows() || t.extent(1) != bank.slices[0].cols())
    throw InvalidArgument("split_features: slice shape does not match the feature bank");
  if (bank.mixing.rows() != t.extent(2))
    throw InvalidArgument("split_features: tensor has " + std::to_string(t.extent(2)) +
                          " observations, mixing has " + std::to_string(bank.mixing.rows()) +
                          " rows");
  if (!(rule.tau >= 0.0)) throw InvalidArgument("split_features: tau must be >= 0");

  FeatureSplit out;
  out.rule = rule;
  const std::size_t q = t.extent(2);
  out.common.resize(q);
  out.individual.resize(q);
  out.subsets.resize(q);
  const auto nq = static_cast<std::ptrdiff_t>(q);
#pragma omp parallel for schedule(static) if (nq > 1)
  for (std::ptrdiff_t ni = 0; ni < nq; ++ni) {
    const auto n = static_cast<std::size_t>(ni);
    const Matrix x = frontal_slice(t, n);
    double row_max = 0.0;
    for (std::size_t k = 0; k < bank.size(); ++k) row_max = std::max(row_max, bank.mixing(n, k));
    Matrix common(x.rows(), x.cols());
    for (std::size_t k = 0; k < bank.size(); ++k) {
      const double alpha = bank.mixing(n, k);
      if (!(alpha > rule.tau * row_max) || alpha <= 0.0) continue;
      out.subsets[n].push_back(k);
      auto src = bank.slices[k].data();
      auto dst = common.data();
      for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += alpha * src[e];
    }
    Matrix individual(x.rows(), x.cols());
    for (std::size_t e = 0; e < x.size(); ++e)
      common.data()[e] = make_additive(x.data()[e], common.data()[e], individual.data()[e]);
    out.common[n] = std::move(common);
    out.individual[n] = std::move(individual);
  }
  return out;
}

Matrix individual_part(const Matrix& observation, const CommonFeatureBank& bank, Vector* weights) {
  const Matrix design = bank.design();
  if (observation.size() != design.rows())
    throw InvalidArgument("individual_part: observation size does not match the bank");
  const Vector w = nnls(design, observation.data());
  const Vector common = matvec(design, w);
  Matrix out = observation;
  for (std::size_t e = 0; e < out.size(); ++e) out.data()[e] -= common[e];
  if (weights) *weights = w;
  return out;
}

void save_split(const std::filesystem::path& dir, const FeatureSplit& split) {
  std::filesystem::create_directories(dir);
  dtf1::write(dir / "common.dtf1", stack_frontal(split.common));
  dtf1::write(dir / "individual.dtf1", stack_frontal(split.individual));
  const nlohmann::json manifest = {
      {"type", "feature-split"},
      {"observations", split.common.size()},
      {"shape", {split.common.at(0).rows(), split.common.at(0).cols(), split.common.size()}},
      {"subset_rule", {{"tau", split.rule.tau}, {"alpha", "mixing"}}},
      {"subsets", split.subsets}};
  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw IoError("cannot write " + (dir / "manifest.json").string());
  f << manifest.dump(2) << "\n";
}

// --- baselines ---------------------------------------------------------------------

StackedPca stacked_pca(std::span<const Matrix> xs, std::size_t rank) {
  if (xs.empty()) throw InvalidArgument("stacked_pca: no blocks");
  if (rank < 1) throw InvalidArgument("stacked_pca: rank must be >= 1");
  const std::size_t cols = xs[0].cols();
  std::size_t rows = 0;
  for (const auto& x : xs) {
    if (x.cols() != cols)
      throw InvalidArgument("stacked_pca: blocks must share their column count");
    rows += x.rows();
  }
  Matrix stacked(rows, cols);
  std::size_t offset = 0;
  for (const auto& x : xs) {
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < x.rows(); ++i) stacked(offset + i, j) = x(i, j);
    offset += x.rows();
  }
  const SvdResult d = svd(stacked);
  if (rank > d.s.size())
    throw InvalidArgument("stacked_pca: rank " + std::to_string(rank) + " exceeds " +
                          std::to_string(d.s.size()));
  StackedPca out{Matrix(cols, rank), Matrix(rows, rank), d.s};
  for (std::size_t j = 0; j < rank; ++j) {
    std::copy(d.v.col(j).begin(), d.v.col(j).end(), out.loadings.col(j).begin());
    for (std::size_t i = 0; i < rows; ++i) out.scores(i, j) = d.u(i, j) * d.s[j];
  }
  return out;
}

CommonBasis common_basis_qr(std::span<const Matrix> xs, const CommonBasisConfig& cfg) {
  if (xs.empty()) throw InvalidArgument("common_basis_qr: no blocks");
  if (cfg.max_components < 1) throw InvalidArgument("common_basis_qr: max_components >= 1");
  const std::size_t dim = xs[0].rows();
  std::vector<Matrix> bases;
  for (const auto& x : xs) {
    if (x.rows() != dim)
      throw InvalidArgument("common_basis_qr: blocks must share their row count");
    bases.push_back(qr(x).q);
  }
  const double nblocks = static_cast<double>(xs.size());
  const double threshold = cfg.threshold < 0.0 ? 0.01 * nblocks : cfg.threshold;

  auto cost_of = [&](const Vector& a, Vector* mean) {
    double cost = 0.0;
    if (mean) mean->assign(dim, 0.0);
    for (const auto& q : bases) {
      const Vector p = q.cols() ? matvec(q, matvec_t(q, a)) : Vector(dim, 0.0);
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = p[i] - a[i];
        cost += d * d;
        if (mean) (*mean)[i] += p[i] / nblocks;
      }
    }
    return cost;
  };

  CommonBasis out;
  std::vector<Vector> accepted;
  for (std::size_t m = 0; m < cfg.max_components && m < dim; ++m) {
    Rng rng = make_rng(cfg.seed, "common-basis/start", m);
    std::normal_distribution<double> n01(0.0, 1.0);
    Vector a(dim);
    for (double& v : a) v = n01(rng);
    const double an = norm2(a);
    for (double& v : a) v /= an;

    std::vector<double> history;
    Vector mean;
    double cost = cost_of(a, &mean);
    history.push_back(cost);
    for (int it = 0; it < cfg.max_iterations; ++it) {
      const double mn = norm2(mean);
      if (mn == 0.0) break;
      for (std::size_t i = 0; i < dim; ++i) a[i] = mean[i] / mn;
      const double next = cost_of(a, &mean);
      history.push_back(next);
      const bool done = std::abs(cost - next) <= cfg.rel_tol * std::max(cost, 1e-300) ||
                        next <= 1e-15 * nblocks;
      cost = next;
      if (done) break;
    }
    out.cost_histories.push_back(history);
    if (!(cost < threshold)) break;
    accepted.push_back(a);
    out.residual_costs.push_back(cost);
    // Remove the accepted direction from every block's column space. A block
    // that holds a well loses the direction of Q^T a inside its own span, so
    // the new Q stays orthonormal and exactly orthogonal to a.
    for (auto& q : bases) {
      if (q.cols() == 0) continue;
      Vector z = matvec_t(q, a);
      const double zn = norm2(z);
      if (zn * zn > 0.5) {
        for (double& v : z) v /= zn;
        const Matrix w = orthonormal_extend(Matrix::column(z), q.cols());
        Matrix rest(q.cols(), q.cols() - 1);
        for (std::size_t j = 1; j < q.cols(); ++j)
          std::copy(w.col(j).begin(), w.col(j).end(), rest.col(j - 1).begin());
        q = matmul(q, rest);
      } else {
        Matrix projected = q;
        for (std::size_t j = 0; j < q.cols(); ++j) {
          const double c = z[j];
          for (std::size_t i = 0; i < dim; ++i) projected(i, j) -= c * a[i];
        }
        q = qr(projected).q;
      }
    }
  }
  out.basis = Matrix(dim, accepted.size());
  for (std::size_t j = 0; j < accepted.size(); ++j)
    std::copy(accepted[j].begin(), accepted[j].end(), out.basis.col(j).begin());
  return out;
}

}  // namespace tdcif
