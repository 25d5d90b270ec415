#include "tdcif/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <concepts>
#include <cstdint>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "tdcif/error.hpp"
#include "tdcif/features.hpp"
#include "tdcif/rng.hpp"

namespace tdcif {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(FeatureMethod m) {
  switch (m) {
    case FeatureMethod::Raw: return "raw";
    case FeatureMethod::Cpd: return "cpd";
    case FeatureMethod::Ll1: return "ll1";
  }
  return "?";
}

std::string to_string(ClassifierKind c) {
  return c == ClassifierKind::Knn ? "knn" : "centroid";
}

FeatureMethod parse_feature_method(const std::string& s) {
  if (s == "raw") return FeatureMethod::Raw;
  if (s == "cpd") return FeatureMethod::Cpd;
  if (s == "ll1") return FeatureMethod::Ll1;
  throw InvalidArgument("unknown feature method '" + s + "' (raw, cpd, ll1)");
}

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "knn") return ClassifierKind::Knn;
  if (s == "centroid") return ClassifierKind::Centroid;
  throw InvalidArgument("unknown classifier '" + s + "' (knn, centroid)");
}

// --- configuration ------------------------------------------------------------------

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& what) {
    throw InvalidArgument("config field '" + field + "': " + what);
  };
  if (dataset.kind != "face-fixture" && dataset.kind != "orl" && dataset.kind != "dataset")
    fail("dataset.kind", "must be face-fixture, orl or dataset, got '" + dataset.kind + "'");
  if (dataset.kind != "face-fixture" && dataset.path.empty())
    fail("dataset.path", "required for kind '" + dataset.kind + "'");
  if (methods.empty()) fail("methods", "must not be empty");
  if (classifiers.empty()) fail("classifiers", "must not be empty");
  if (std::set<FeatureMethod>(methods.begin(), methods.end()).size() != methods.size())
    fail("methods", "contains duplicates");
  if (std::set<ClassifierKind>(classifiers.begin(), classifiers.end()).size() !=
      classifiers.size())
    fail("classifiers", "contains duplicates");
  if (knn_k < 1) fail("knn_k", "must be >= 1");
  if (groups < 2) fail("split.groups", "must be >= 2");
  if (train_groups < 1 || train_groups >= groups)
    fail("split.train_groups", "must be in [1, groups)");
  if (realizations < 1) fail("realizations", "must be >= 1");
  if (ll1_ranks.empty()) fail("decomposition.ll1_ranks", "must not be empty");
  for (std::size_t l : ll1_ranks)
    if (l < 1) fail("decomposition.ll1_ranks", "every rank must be >= 1");
  if (cpd_rank < 1) fail("decomposition.cpd_rank", "must be >= 1");
  if (!(tau >= 0.0)) fail("tau", "must be >= 0");
  if (max_sweeps < 1) fail("decomposition.max_sweeps", "must be >= 1");
  if (!(rel_tol > 0.0)) fail("decomposition.rel_tol", "must be > 0");
  if (restarts < 1) fail("decomposition.restarts", "must be >= 1");
}

std::vector<std::size_t> ExperimentConfig::ranks_for(FeatureMethod m) const {
  switch (m) {
    case FeatureMethod::Raw: return {};
    case FeatureMethod::Cpd: return std::vector<std::size_t>(cpd_rank, 1);
    case FeatureMethod::Ll1: return ll1_ranks;
  }
  return {};
}

json to_json(const ExperimentConfig& cfg) {
  json methods = json::array(), classifiers = json::array();
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  for (auto c : cfg.classifiers) classifiers.push_back(to_string(c));
  const auto& fx = cfg.dataset.fixture;
  return {
      {"dataset",
       {{"kind", cfg.dataset.kind},
        {"path", cfg.dataset.path},
        {"seed", cfg.dataset.seed},
        {"fixture",
         {{"classes", fx.classes},
          {"samples_per_class", fx.samples_per_class},
          {"height", fx.height},
          {"width", fx.width},
          {"shared_strength", fx.shared_strength},
          {"noise", fx.noise}}}}},
      {"methods", methods},
      {"classifiers", classifiers},
      {"knn_k", cfg.knn_k},
      {"split", {{"groups", cfg.groups}, {"train_groups", cfg.train_groups}}},
      {"realizations", cfg.realizations},
      {"seed", cfg.seed},
      {"tau", cfg.tau},
      {"decomposition",
       {{"ll1_ranks", cfg.ll1_ranks},
        {"cpd_rank", cfg.cpd_rank},
        {"max_sweeps", cfg.max_sweeps},
        {"rel_tol", cfg.rel_tol},
        {"restarts", cfg.restarts}}},
      {"output_dir", cfg.output_dir}};
}

namespace {

// Reads the known keys of one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw InvalidArgument("config field '" + field + "': " + what);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(field(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) fail(field(key), "out of range");
      out = static_cast<int>(x);
    }
  }

  template <std::unsigned_integral U>
  void read(const std::string& key, U& out) {
    out = unsigned_of(find(key), key, out);
  }

  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(field(key), "expected an array of non-negative integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(unsigned_of(&(*v)[i], key + "[" + std::to_string(i) + "]", std::size_t{0}));
    }
  }

  void read(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(field(key), "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a string");
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
  }

 private:
  template <class U>
  U unsigned_of(const json* v, const std::string& key, U fallback) const {
    if (!v) return fallback;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
      fail(field(key), "expected a non-negative integer");
    return static_cast<U>(v->get<std::uint64_t>());
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  ObjectReader root(j, "");
  if (const json* d = root.find("dataset")) {
    ObjectReader r(*d, "dataset");
    r.read("kind", cfg.dataset.kind);
    r.read("path", cfg.dataset.path);
    r.read("seed", cfg.dataset.seed);
    if (const json* f = r.find("fixture")) {
      ObjectReader fr(*f, "dataset.fixture");
      auto& fx = cfg.dataset.fixture;
      fr.read("classes", fx.classes);
      fr.read("samples_per_class", fx.samples_per_class);
      fr.read("height", fx.height);
      fr.read("width", fx.width);
      fr.read("shared_strength", fx.shared_strength);
      fr.read("noise", fx.noise);
      fr.finish();
    }
    r.finish();
  }
  std::vector<std::string> names;
  if (root.find("methods")) {
    root.read("methods", names);
    cfg.methods.clear();
    for (const auto& n : names) {
      try {
        cfg.methods.push_back(parse_feature_method(n));
      } catch (const InvalidArgument& e) {
        ObjectReader::fail("methods", e.what());
      }
    }
  }
  if (root.find("classifiers")) {
    root.read("classifiers", names);
    cfg.classifiers.clear();
    for (const auto& n : names) {
      try {
        cfg.classifiers.push_back(parse_classifier(n));
      } catch (const InvalidArgument& e) {
        ObjectReader::fail("classifiers", e.what());
      }
    }
  }
  root.read("knn_k", cfg.knn_k);
  if (const json* s = root.find("split")) {
    ObjectReader r(*s, "split");
    r.read("groups", cfg.groups);
    r.read("train_groups", cfg.train_groups);
    r.finish();
  }
  root.read("realizations", cfg.realizations);
  root.read("seed", cfg.seed);
  root.read("tau", cfg.tau);
  if (const json* d = root.find("decomposition")) {
    ObjectReader r(*d, "decomposition");
    r.read("ll1_ranks", cfg.ll1_ranks);
    r.read("cpd_rank", cfg.cpd_rank);
    r.read("max_sweeps", cfg.max_sweeps);
    r.read("rel_tol", cfg.rel_tol);
    r.read("restarts", cfg.restarts);
    r.finish();
  }
  root.read("output_dir", cfg.output_dir);
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    // e.what() carries "line L, column C"
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  try {
    return experiment_config_from_json(j);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

EnsembleDataset load_source(const DatasetSource& src) {
  if (src.kind == "face-fixture") return synthetic_face_fixture(src.seed, src.fixture);
  if (src.kind == "orl") return load_orl(src.path);
  if (src.kind == "dataset") return load_dataset(src.path);
  throw InvalidArgument("unknown dataset kind '" + src.kind + "'");
}

// --- evaluation ---------------------------------------------------------------------

namespace {

LabeledVectors vectorize_indices(const EnsembleDataset& ds, std::span<const std::size_t> idx) {
  const std::size_t d = ds.tensor.extent(0) * ds.tensor.extent(1);
  LabeledVectors out{Matrix(d, idx.size()), {}};
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto src = ds.tensor.data().subspan(idx[j] * d, d);
    std::copy(src.begin(), src.end(), out.vectors.col(j).begin());
    out.labels.push_back(ds.labels[idx[j]]);
  }
  return out;
}

std::vector<std::size_t> gather(const SplitPlan& plan, std::span<const std::size_t> groups) {
  std::vector<std::size_t> out;
  for (std::size_t g : groups) out.insert(out.end(), plan.groups[g].begin(), plan.groups[g].end());
  return out;
}

}  // namespace

FeatureSet extract_features(const EnsembleDataset& ds, const SplitPlan& plan, FeatureMethod method,
                            const ExperimentConfig& cfg) {
  ds.validate();
  if (plan.train_groups.empty() || plan.test_groups.empty())
    throw InvalidArgument("extract_features: split needs train and test groups");
  for (auto g : plan.train_groups)
    if (g >= plan.groups.size()) throw InvalidArgument("extract_features: bad group index");
  for (auto g : plan.test_groups)
    if (g >= plan.groups.size()) throw InvalidArgument("extract_features: bad group index");

  const auto test_idx = gather(plan, plan.test_groups);
  FeatureSet out;
  if (method == FeatureMethod::Raw) {
    out.train = vectorize_indices(ds, gather(plan, plan.train_groups));
    out.test = vectorize_indices(ds, test_idx);
    return out;
  }

  const auto ranks = cfg.ranks_for(method);
  const std::size_t d = ds.tensor.extent(0) * ds.tensor.extent(1);
  std::vector<CommonFeatureBank> banks;
  std::vector<Matrix> train_parts;
  std::vector<int> train_labels;
  for (std::size_t g : plan.train_groups) {
    const EnsembleDataset group = select(ds, plan.groups[g]);
    DecompConfig dc;
    dc.max_sweeps = cfg.max_sweeps;
    dc.rel_tol = cfg.rel_tol;
    dc.seed = stream_seed(plan.seed, to_string(method) + "/group", g);
    LL1Factors f;
    try {
      f = ll1_nn_best(group.tensor, ranks, dc, cfg.restarts);
    } catch (const NumericError& e) {
      throw NumericError("training group " + std::to_string(g) + ": " + e.what());
    }
    if (!f.info.converged) ++out.unconverged_fits;
    out.degenerate_columns += f.info.degenerate_columns;
    CommonFeatureBank bank = build_feature_bank(f);
    FeatureSplit split = split_features(group.tensor, bank, SubsetRule{cfg.tau});
    for (std::size_t n = 0; n < split.individual.size(); ++n) {
      train_parts.push_back(std::move(split.individual[n]));
      train_labels.push_back(group.labels[n]);
    }
    banks.push_back(std::move(bank));
  }
  out.train = vectorize(train_parts, train_labels);

  const CommonFeatureBank merged = merge_banks(banks);
  out.test = LabeledVectors{Matrix(d, test_idx.size()), {}};
  for (std::size_t j = 0; j < test_idx.size(); ++j) {
    const Matrix part = individual_part(ds.observation(test_idx[j]), merged);
    std::copy(part.data().begin(), part.data().end(), out.test.vectors.col(j).begin());
    out.test.labels.push_back(ds.labels[test_idx[j]]);
  }
  return out;
}

EvalReport classify(const FeatureSet& features, ClassifierKind classifier, std::size_t k) {
  return classifier == ClassifierKind::Knn ? knn_classify(features.train, features.test, k)
                                           : nearest_centroid(features.train, features.test);
}

EvalReport run_experiment(const EnsembleDataset& ds, const SplitPlan& plan, FeatureMethod method,
                          ClassifierKind classifier, const ExperimentConfig& cfg) {
  return classify(extract_features(ds, plan, method, cfg), classifier, cfg.knn_k);
}

const ExperimentCell& ExperimentResult::cell(FeatureMethod m, ClassifierKind c) const {
  for (const auto& x : cells)
    if (x.method == m && x.classifier == c) return x;
  throw InvalidArgument("no result for " + to_string(m) + "/" + to_string(c));
}

std::uint64_t realization_seed(const ExperimentConfig& cfg, int r) {
  return stream_seed(cfg.seed, "realization", static_cast<std::uint64_t>(r));
}

ExperimentResult run_experiments(const EnsembleDataset& ds, const ExperimentConfig& cfg) {
  cfg.validate();
  ds.validate();
  const int nr = cfg.realizations;
  const std::size_t nm = cfg.methods.size(), nc = cfg.classifiers.size();

  ExperimentResult out;
  for (int r = 0; r < nr; ++r) out.plan_seeds.push_back(realization_seed(cfg, r));
  // Built up front so an infeasible split fails before any work starts.
  std::vector<SplitPlan> plans;
  for (int r = 0; r < nr; ++r)
    plans.push_back(make_group_splits(ds, cfg.groups, cfg.train_groups, out.plan_seeds[r]));

  // reports[r][m * nc + c]
  std::vector<std::vector<EvalReport>> reports(nr, std::vector<EvalReport>(nm * nc));
  std::vector<int> unconverged(nr, 0);
  std::vector<std::exception_ptr> errors(nr);
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < nr; ++r) {
    try {
      for (std::size_t m = 0; m < nm; ++m) {
        const FeatureSet fs = extract_features(ds, plans[r], cfg.methods[m], cfg);
        unconverged[r] += fs.unconverged_fits;
        for (std::size_t c = 0; c < nc; ++c)
          reports[r][m * nc + c] = classify(fs, cfg.classifiers[c], cfg.knn_k);
      }
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (int r = 0; r < nr; ++r)
    if (errors[r]) std::rethrow_exception(errors[r]);

  for (std::size_t m = 0; m < nm; ++m)
    for (std::size_t c = 0; c < nc; ++c) {
      ExperimentCell cell{cfg.methods[m], cfg.classifiers[c], {}, {}};
      for (int r = 0; r < nr; ++r) cell.runs.push_back(reports[r][m * nc + c]);
      cell.report = aggregate(cell.runs);
      out.cells.push_back(std::move(cell));
    }
  for (int u : unconverged) out.unconverged_fits += u;
  return out;
}

// --- reports ------------------------------------------------------------------------

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string results_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "realization,plan_seed,method,classifier,accuracy,correct,total\n";
  for (std::size_t i = 0; i < r.plan_seeds.size(); ++i)
    for (const auto& cell : r.cells) {
      const auto& run = cell.runs.at(i);
      os << i << ',' << r.plan_seeds[i] << ',' << to_string(cell.method) << ','
         << to_string(cell.classifier) << ',' << shortest(run.accuracy) << ',' << run.correct
         << ',' << run.total << '\n';
    }
  return os.str();
}

json summary_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  json table = json::object();
  for (const auto& cell : r.cells) {
    const auto& rep = cell.report;
    table[to_string(cell.method)][to_string(cell.classifier)] = {
        {"mean_accuracy", rep.mean},
        {"stddev", rep.stddev},
        {"pooled_accuracy", rep.accuracy},
        {"percent", 100.0 * rep.mean},
        {"correct", rep.correct},
        {"total", rep.total}};
  }
  json rows = json::array(), cols = json::array();
  for (auto m : cfg.methods) rows.push_back(to_string(m));
  for (auto c : cfg.classifiers) cols.push_back(to_string(c));
  return {{"rows", rows},
          {"columns", cols},
          {"realizations", cfg.realizations},
          {"knn_k", cfg.knn_k},
          {"unconverged_fits", r.unconverged_fits},
          {"table", table}};
}

void write_experiment(const fs::path& dir, const ExperimentResult& r, const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (dir / name).string());
    f << text;
    if (!f) throw IoError("failed writing " + (dir / name).string());
  };
  put("results.csv", results_csv(r));
  put("summary.json", summary_json(r, cfg).dump(2) + "\n");
  put("config.json", to_json(cfg).dump(2) + "\n");
}

}  // namespace tdcif
