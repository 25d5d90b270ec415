#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <omp.h>

#include "support.hpp"
#include "tdcif/classify.hpp"
#include "tdcif/dataset.hpp"
#include "tdcif/error.hpp"
#include "tdcif/experiment.hpp"

namespace tdcif {
namespace {

using testing::Gen;
namespace fs = std::filesystem;

LabeledVectors points(const std::vector<Vector>& xs, std::vector<int> labels) {
  return {testing::columns(xs), std::move(labels)};
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// --- k-NN -----------------------------------------------------------------------------

TEST(KnnTest, ExactTrainingPointReturnsItsLabel) {
  const LabeledVectors train = points({{0, 0}, {1, 0}, {0, 5}}, {7, 3, 9});
  const Matrix test = testing::columns({{1, 0}, {0, 5}, {0, 0}});
  EXPECT_EQ(knn_predict(train, test, 1), (std::vector<int>{3, 9, 7}));
}

TEST(KnnTest, SeparatedClustersAreClassifiedPerfectly) {
  Gen g(301);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<Vector> tr, te;
  std::vector<int> ltr, lte;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 10; ++i) {
      Vector x = {100.0 * c + n(g), -50.0 * c + n(g), n(g)};
      (i < 6 ? tr : te).push_back(x);
      (i < 6 ? ltr : lte).push_back(c);
    }
  for (std::size_t k : {1u, 3u, 5u}) {
    const EvalReport r = knn_classify(points(tr, ltr), points(te, lte), k);
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.correct, 12u);
  }
}

TEST(KnnTest, TiesBreakOnTotalDistanceThenLowestClass) {
  // k = train size on balanced data: two votes each, class 5 is closer in total
  const LabeledVectors train = points({{0.0}, {1.0}, {3.0}, {4.0}}, {5, 5, 2, 2});
  EXPECT_EQ(knn_predict(train, testing::columns({{1.5}}), 4), (std::vector<int>{5}));
  EXPECT_EQ(knn_predict(train, testing::columns({{2.5}}), 4), (std::vector<int>{2}));
  // exactly symmetric: equal votes and distances, lowest class id wins
  EXPECT_EQ(knn_predict(train, testing::columns({{2.0}}), 4), (std::vector<int>{2}));
  // k larger than the training set is clamped
  EXPECT_EQ(knn_predict(train, testing::columns({{2.0}}), 40), (std::vector<int>{2}));
  // majority beats distance
  const LabeledVectors three = points({{0.0}, {10.0}, {11.0}}, {1, 4, 4});
  EXPECT_EQ(knn_predict(three, testing::columns({{0.0}}), 3), (std::vector<int>{4}));
}

TEST(KnnTest, MatchesBruteForceOracle) {
  Gen g(302);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> tr;
    std::vector<int> labels;
    for (int i = 0; i < 25; ++i) {
      tr.push_back(testing::random_vector(g, 4));
      labels.push_back(lab(g));
    }
    const LabeledVectors train = points(tr, labels);
    const Matrix test = testing::random_matrix(g, 4, 10);
    for (std::size_t k : {1u, 3u, 7u}) {
      const std::vector<int> got = knn_predict(train, test, k);
      for (std::size_t t = 0; t < test.cols(); ++t) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t i = 0; i < tr.size(); ++i) d.push_back({sq_dist(test.col(t), tr[i]), i});
        std::sort(d.begin(), d.end());
        std::map<int, std::pair<int, double>> votes;
        for (std::size_t i = 0; i < k; ++i) {
          auto& v = votes[labels[d[i].second]];
          ++v.first;
          v.second += std::sqrt(d[i].first);
        }
        int best = -1;
        std::pair<int, double> bv{-1, 0.0};
        for (const auto& [c, v] : votes)
          if (v.first > bv.first || (v.first == bv.first && v.second < bv.second)) {
            best = c;
            bv = v;
          }
        EXPECT_EQ(got[t], best) << "trial " << trial << " k " << k << " sample " << t;
      }
    }
  }
}

TEST(KnnTest, OneNeighbourOnItsOwnTrainingSetIsPerfect) {
  Gen g(303);
  std::uniform_int_distribution<int> lab(0, 5);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(lab(g));
  const LabeledVectors train{testing::random_matrix(g, 6, 40), labels};
  const EvalReport r = knn_classify(train, train, 1);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(KnnTest, RejectsBadInput) {
  const LabeledVectors train = points({{0, 0}, {1, 0}}, {0, 1});
  EXPECT_THROW(knn_predict(train, Matrix(3, 1), 1), InvalidArgument);
  EXPECT_THROW(knn_predict(train, Matrix(2, 1), 0), InvalidArgument);
  EXPECT_THROW(knn_predict(LabeledVectors{Matrix(2, 0), {}}, Matrix(2, 1), 1), InvalidArgument);
  EXPECT_THROW((LabeledVectors{Matrix(2, 2), {1}}.validate()), InvalidArgument);
}

// --- nearest centroid -------------------------------------------------------------------

TEST(CentroidTest, UnitVectorExamplesAndTies) {
  const LabeledVectors train = points({{1, 0}, {0, 1}}, {1, 2});
  EXPECT_EQ(nearest_centroid_predict(train, testing::columns({{1, 0}})), (std::vector<int>{1}));
  EXPECT_EQ(nearest_centroid_predict(train, testing::columns({{0.5, 0.5}})),
            (std::vector<int>{1}));
  const LabeledVectors swapped = points({{1, 0}, {0, 1}}, {4, 3});
  EXPECT_EQ(nearest_centroid_predict(swapped, testing::columns({{0.5, 0.5}})),
            (std::vector<int>{3}));
  EXPECT_THROW(nearest_centroid_predict(LabeledVectors{Matrix(2, 0), {}}, Matrix(2, 1)),
               InvalidArgument);
}

TEST(CentroidTest, MatchesBruteForceDistanceTable) {
  Gen g(304);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> tr;
    std::vector<int> labels;
    for (int i = 0; i < 15; ++i) {
      tr.push_back(testing::random_vector(g, 3));
      labels.push_back(i % 3 * 10);
    }
    std::map<int, Vector> centroid;
    std::map<int, int> count;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      auto& c = centroid[labels[i]];
      c.resize(3, 0.0);
      for (int d = 0; d < 3; ++d) c[d] += tr[i][d];
      ++count[labels[i]];
    }
    for (auto& [l, c] : centroid)
      for (double& v : c) v /= count[l];
    const Matrix test = testing::random_matrix(g, 3, 8);
    const std::vector<int> got = nearest_centroid_predict(points(tr, labels), test);
    for (std::size_t t = 0; t < 8; ++t) {
      int best = -1;
      double bd = 1e300;
      for (const auto& [l, c] : centroid)
        if (const double d = sq_dist(test.col(t), c); d < bd) {
          bd = d;
          best = l;
        }
      EXPECT_EQ(got[t], best);
    }
  }
}

// --- reports ------------------------------------------------------------------------------

TEST(ReportTest, AccuracyIsConfusionTraceOverTotal) {
  Gen g(305);
  std::uniform_int_distribution<int> lab(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> truth, pred;
    for (int i = 0; i < 37; ++i) {
      truth.push_back(lab(g));
      pred.push_back(lab(g) < 2 ? truth.back() : lab(g));
    }
    const EvalReport r = make_report(truth, pred);
    std::size_t trace = 0, total = 0;
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
      trace += r.confusion[i][i];
      std::size_t row = 0;
      for (std::size_t c : r.confusion[i]) row += c;
      EXPECT_EQ(row, static_cast<std::size_t>(std::count(truth.begin(), truth.end(), r.classes[i])));
      total += row;
    }
    EXPECT_EQ(total, 37u);
    EXPECT_EQ(r.correct, trace);
    EXPECT_EQ(r.accuracy, static_cast<double>(trace) / 37.0);
    EXPECT_TRUE(std::is_sorted(r.classes.begin(), r.classes.end()));
  }
  const std::vector<int> a = {1, 2}, b = {1};
  EXPECT_THROW(make_report(a, b), InvalidArgument);
}

TEST(ReportTest, AggregateIsOrderIndependent) {
  const std::vector<int> t1 = {0, 0, 1, 1}, p1 = {0, 1, 1, 1};
  const std::vector<int> t2 = {0, 1, 1, 2}, p2 = {0, 1, 1, 2};
  const std::vector<int> t3 = {0, 1}, p3 = {1, 0};
  std::vector<EvalReport> runs = {make_report(t1, p1), make_report(t2, p2), make_report(t3, p3)};
  const EvalReport a = aggregate(runs);
  std::reverse(runs.begin(), runs.end());
  const EvalReport b = aggregate(runs);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stddev, b.stddev);
  EXPECT_EQ(a.confusion, b.confusion);
  EXPECT_NEAR(a.mean, (0.75 + 1.0 + 0.0) / 3.0, 1e-15);
  const double m = a.mean;
  const double var = (std::pow(0.75 - m, 2) + std::pow(1.0 - m, 2) + std::pow(0.0 - m, 2)) / 2.0;
  EXPECT_NEAR(a.stddev, std::sqrt(var), 1e-15);
  EXPECT_EQ(a.correct, 7u);
  EXPECT_EQ(a.total, 10u);
  EXPECT_EQ(a.classes, (std::vector<int>{0, 1, 2}));
}

// --- configuration -------------------------------------------------------------------------

TEST(ExperimentConfigTest, JsonRoundTrip) {
  ExperimentConfig c;
  c.methods = {FeatureMethod::Ll1};
  c.classifiers = {ClassifierKind::Centroid, ClassifierKind::Knn};
  c.knn_k = 3;
  c.groups = 5;
  c.train_groups = 2;
  c.realizations = 7;
  c.seed = 42;
  c.ll1_ranks = {3, 1, 2};
  c.tau = 0.25;
  c.restarts = 4;
  c.dataset.kind = "dataset";
  c.dataset.path = "/data/x";
  c.dataset.fixture.noise = 0.5;
  c.output_dir = "out";
  const nlohmann::json j = to_json(c);
  EXPECT_EQ(to_json(experiment_config_from_json(j)), j);
  EXPECT_EQ(to_json(experiment_config_from_json(nlohmann::json::object())), to_json(ExperimentConfig{}));
}

TEST(ExperimentConfigTest, StrictParsingNamesTheField) {
  auto expect_field_error = [](const char* text, const std::string& field) {
    try {
      experiment_config_from_json(nlohmann::json::parse(text));
      ADD_FAILURE() << "accepted " << text;
    } catch (const InvalidArgument& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_field_error(R"({"bogus": 1})", "bogus");
  expect_field_error(R"({"split": {"groups": -1}})", "split.groups");
  expect_field_error(R"({"split": {"groups": "ten"}})", "split.groups");
  expect_field_error(R"({"methods": ["raw", "svm"]})", "methods");
  expect_field_error(R"({"decomposition": {"ll1_ranks": [2, 0]}})", "ll1_ranks");
  expect_field_error(R"({"split": {"groups": 4, "train_groups": 4}})", "train_groups");
  expect_field_error(R"({"knn_k": 0})", "knn_k");
  expect_field_error(R"({"tau": -0.1})", "tau");
  expect_field_error(R"({"dataset": {"kind": "mnist"}})", "dataset.kind");
  expect_field_error(R"({"dataset": {"fixture": {"extra": 1}}})", "dataset.fixture.extra");
}

TEST(ExperimentConfigTest, FileErrorsCarryPosition) {
  const fs::path p = fs::temp_directory_path() / "tdcif-bad-config.json";
  std::ofstream(p) << "{\n  \"seed\": 1,\n  \"knn_k\" 2\n}\n";
  try {
    load_experiment_config(p);
    ADD_FAILURE();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  fs::remove(p);
  EXPECT_THROW(load_experiment_config(p), IoError);
}

TEST(ExperimentConfigTest, ShippedFixtureConfigLoads) {
  const ExperimentConfig c = load_experiment_config(fs::path(TDCIF_SOURCE_DIR) / "configs/fixture.json");
  EXPECT_EQ(c.realizations, 10);
  EXPECT_EQ(c.dataset.kind, "face-fixture");
  EXPECT_EQ(c.ranks_for(FeatureMethod::Cpd), (std::vector<std::size_t>{1, 1}));
  EXPECT_TRUE(c.ranks_for(FeatureMethod::Raw).empty());
}

// --- experiments -----------------------------------------------------------------------------

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.groups = 6;
  c.train_groups = 4;
  c.realizations = 3;
  return c;
}

TEST(ExperimentTest, SingleClassIsAlwaysRight) {
  const EnsembleDataset face = synthetic_face_fixture(0);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < face.labels.size(); ++i)
    if (face.labels[i] == face.labels[0]) idx.push_back(i);
  const EnsembleDataset one = select(face, idx);
  ExperimentConfig c = small_config();
  c.realizations = 2;
  c.ll1_ranks = {1};
  c.cpd_rank = 1;
  const ExperimentResult r = run_experiments(one, c);
  for (const auto& cell : r.cells) EXPECT_EQ(cell.report.accuracy, 1.0) << to_string(cell.method);
}

TEST(ExperimentTest, FeatureSetsHaveTheExpectedLayout) {
  const EnsembleDataset ds = synthetic_face_fixture(1);
  const ExperimentConfig c = small_config();
  const SplitPlan plan = make_group_splits(ds, 6, 4, 5);
  for (FeatureMethod m : {FeatureMethod::Raw, FeatureMethod::Ll1}) {
    const FeatureSet fs = extract_features(ds, plan, m, c);
    EXPECT_EQ(fs.train.count(), 16u);
    EXPECT_EQ(fs.test.count(), 8u);
    EXPECT_EQ(fs.train.dim(), 16u * 12u);
    fs.train.validate();
  }
  // raw features are the images themselves
  const FeatureSet raw = extract_features(ds, plan, FeatureMethod::Raw, c);
  const std::size_t first = plan.groups[plan.train_groups[0]][0];
  const Matrix img = frontal_slice(ds.tensor, first);
  EXPECT_EQ(std::vector<double>(raw.train.vectors.col(0).begin(), raw.train.vectors.col(0).end()),
            std::vector<double>(img.data().begin(), img.data().end()));
}

TEST(ExperimentTest, DeterministicAndThreadIndependent) {
  const EnsembleDataset ds = synthetic_face_fixture(2);
  ExperimentConfig c = small_config();
  c.methods = {FeatureMethod::Raw, FeatureMethod::Cpd};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const ExperimentResult one = run_experiments(ds, c);
  omp_set_num_threads(4);
  const ExperimentResult four = run_experiments(ds, c);
  omp_set_num_threads(saved);
  EXPECT_EQ(results_csv(one), results_csv(four));
  EXPECT_EQ(summary_json(one, c), summary_json(four, c));
  EXPECT_EQ(one.plan_seeds, four.plan_seeds);
  for (int r = 0; r < c.realizations; ++r) EXPECT_EQ(one.plan_seeds[r], realization_seed(c, r));
}

TEST(ExperimentTest, IndividualFeaturesBeatRawPixelsOnTheFixture) {
  const EnsembleDataset ds = synthetic_face_fixture(0);
  ExperimentConfig c = small_config();
  c.methods = {FeatureMethod::Raw, FeatureMethod::Ll1};
  c.classifiers = {ClassifierKind::Knn};
  const ExperimentResult r = run_experiments(ds, c);
  EXPECT_GE(r.cell(FeatureMethod::Ll1, ClassifierKind::Knn).report.mean,
            r.cell(FeatureMethod::Raw, ClassifierKind::Knn).report.mean);
}

TEST(ExperimentTest, CsvSummaryAndFiles) {
  const EnsembleDataset ds = synthetic_face_fixture(3);
  ExperimentConfig c = small_config();
  c.methods = {FeatureMethod::Raw};
  const ExperimentResult r = run_experiments(ds, c);
  const std::string csv = results_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "realization,plan_seed,method,classifier,accuracy,correct,total");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3 * 2);
  const auto s = summary_json(r, c);
  EXPECT_EQ(s["realizations"].get<int>(), 3);
  EXPECT_EQ(s["table"]["raw"]["knn"]["mean_accuracy"].get<double>(),
            r.cell(FeatureMethod::Raw, ClassifierKind::Knn).report.mean);

  const fs::path dir = fs::temp_directory_path() / "tdcif-experiment-out";
  fs::remove_all(dir);
  write_experiment(dir, r, c);
  for (const char* f : {"results.csv", "summary.json", "config.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(to_json(load_experiment_config(dir / "config.json")), to_json(c));
  fs::remove_all(dir);
}

TEST(ExperimentTest, InfeasibleSplitIsRejected) {
  const EnsembleDataset ds = synthetic_face_fixture(0);
  ExperimentConfig c = small_config();
  c.groups = 7;  // only six samples per class
  EXPECT_THROW(run_experiments(ds, c), InvalidArgument);
}

}  // namespace
}  // namespace tdcif
