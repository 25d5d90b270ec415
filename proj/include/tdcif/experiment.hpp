#pragma once

// Train/test evaluation of raw pixels against decomposition-driven individual
// features, repeated over seeded group splits.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdcif/classify.hpp"
#include "tdcif/dataset.hpp"
#include "tdcif/decomp.hpp"

namespace tdcif {

enum class FeatureMethod { Raw, Cpd, Ll1 };
enum class ClassifierKind { Knn, Centroid };

std::string to_string(FeatureMethod m);
std::string to_string(ClassifierKind c);
FeatureMethod parse_feature_method(const std::string& s);
ClassifierKind parse_classifier(const std::string& s);

/// Where the ensemble comes from: "face-fixture" (generated from seed and
/// fixture), "orl" (path = ORL root) or "dataset" (path = saved dataset dir).
struct DatasetSource {
  std::string kind = "face-fixture";
  std::string path;
  std::uint64_t seed = 0;
  FaceFixtureParams fixture;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<FeatureMethod> methods = {FeatureMethod::Raw, FeatureMethod::Cpd, FeatureMethod::Ll1};
  std::vector<ClassifierKind> classifiers = {ClassifierKind::Knn, ClassifierKind::Centroid};
  std::size_t knn_k = 1;
  std::size_t groups = 10;
  std::size_t train_groups = 6;
  int realizations = 100;
  std::uint64_t seed = 0;
  std::vector<std::size_t> ll1_ranks = {2, 2};
  std::size_t cpd_rank = 2;  // number of rank-1 terms with non-negative c
  double tau = 0.0;
  int max_sweeps = 500;
  double rel_tol = 1e-8;
  int restarts = 1;
  std::string output_dir;  // empty: caller picks a default

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  /// Decomposition ranks for a method (empty for raw).
  std::vector<std::size_t> ranks_for(FeatureMethod m) const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Strict: unknown keys and wrong types raise InvalidArgument with the field path.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
/// Parses a config file; syntax errors report line and column.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

EnsembleDataset load_source(const DatasetSource& src);

struct FeatureSet {
  LabeledVectors train;
  LabeledVectors test;
  int degenerate_columns = 0;
  int unconverged_fits = 0;
};

/// Features for one split. raw: vectorized images. cpd/ll1: every training
/// group is decomposed on its own and contributes its individual parts; test
/// images lose their NNLS-weighted projection onto the merged training bank.
FeatureSet extract_features(const EnsembleDataset& ds, const SplitPlan& plan, FeatureMethod method,
                            const ExperimentConfig& cfg);

EvalReport classify(const FeatureSet& features, ClassifierKind classifier, std::size_t k);

/// One split, one method, one classifier.
EvalReport run_experiment(const EnsembleDataset& ds, const SplitPlan& plan, FeatureMethod method,
                          ClassifierKind classifier, const ExperimentConfig& cfg);

struct ExperimentCell {
  FeatureMethod method;
  ClassifierKind classifier;
  EvalReport report;  // aggregated over realizations
  std::vector<EvalReport> runs;
};

struct ExperimentResult {
  std::vector<std::uint64_t> plan_seeds;
  std::vector<ExperimentCell> cells;  // methods major, classifiers minor
  int unconverged_fits = 0;

  const ExperimentCell& cell(FeatureMethod m, ClassifierKind c) const;
};

/// Split seed of realization r.
std::uint64_t realization_seed(const ExperimentConfig& cfg, int r);

/// Every (method, classifier) cell over cfg.realizations splits. Realizations
/// run concurrently; results do not depend on the thread count.
ExperimentResult run_experiments(const EnsembleDataset& ds, const ExperimentConfig& cfg);

/// realization,plan_seed,method,classifier,accuracy,correct,total
std::string results_csv(const ExperimentResult& r);
/// Method x classifier grid of mean/stddev/pooled accuracy.
nlohmann::json summary_json(const ExperimentResult& r, const ExperimentConfig& cfg);
/// Writes results.csv, summary.json and config.json into dir.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& r,
                      const ExperimentConfig& cfg);

}  // namespace tdcif
