// tdcif: decompose tensors, split common/individual features, run
// classification experiments and generate synthetic ensembles.
//
// Exit codes: 0 ok, 2 I/O, 3 invalid arguments or config, 4 numeric status
// (non-convergence; artifacts are still written).

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdcif/bundle.hpp"
#include "tdcif/dataset.hpp"
#include "tdcif/decomp.hpp"
#include "tdcif/dtf1.hpp"
#include "tdcif/error.hpp"
#include "tdcif/experiment.hpp"
#include "tdcif/features.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tdcif;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

bool g_quiet = false;

void log(const std::string& msg) {
  if (!g_quiet) std::cerr << "tdcif: " << msg << "\n";
}

void emit(const json& j) { std::cout << j.dump() << std::endl; }

fs::path output_dir(const std::string& flag, const std::string& command) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("TDCIF_OUT_DIR");
  const fs::path base = env && *env ? fs::path(env) : fs::path("tdcif-out");
  return base / command;
}

// --- decompose ----------------------------------------------------------------------

struct DecomposeArgs {
  std::string input;
  std::string method = "ll1";
  std::vector<std::size_t> ranks;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_sweeps = 500;
  int restarts = 1;
  std::string init = "random";
  std::string out;
};

int run_decompose(const DecomposeArgs& a) {
  const DenseTensor t = dtf1::read(a.input);
  DecompConfig cfg;
  cfg.seed = a.seed;
  cfg.rel_tol = a.tol;
  cfg.max_sweeps = a.max_sweeps;
  cfg.init = a.init == "hosvd" ? InitMethod::Hosvd : InitMethod::Random;
  cfg.validate();
  if (a.restarts < 1) throw InvalidArgument("--restarts must be >= 1");
  for (std::size_t r : a.ranks)
    if (r < 1) throw InvalidArgument("--ranks entries must be >= 1");

  const fs::path out = output_dir(a.out, "decompose");
  json line = {{"command", "decompose"}, {"method", a.method}, {"input", a.input}};
  bool converged = true;
  if (a.method == "hosvd") {
    std::vector<std::size_t> mlrank = a.ranks.empty() ? t.shape() : a.ranks;
    if (mlrank.size() != t.order())
      throw InvalidArgument("--ranks needs one entry per mode (" + std::to_string(t.order()) + ")");
    log("hosvd of " + a.input);
    const TuckerFactors f = hosvd(t, mlrank);
    const double fit = fit_error(t, f);
    save_bundle(out, f, fit);
    line["fit"] = fit;
    line["sweeps"] = 0;
    line["ranks"] = mlrank;
  } else if (a.method == "cpd") {
    if (a.ranks.size() != 1) throw InvalidArgument("--ranks for cpd is a single rank R");
    log("cpd rank " + std::to_string(a.ranks[0]) + " of " + a.input);
    const KruskalFactors f = cpd_als_best(t, a.ranks[0], cfg, a.restarts);
    save_bundle(out, f);
    converged = f.info.converged;
    line["fit"] = f.info.final_fit();
    line["sweeps"] = f.info.sweeps;
    line["ranks"] = a.ranks;
    line["rank_flagged"] = f.info.rank_flagged;
  } else if (a.method == "ll1") {
    if (a.ranks.empty()) throw InvalidArgument("--ranks for ll1 lists L_k per term");
    log("ll1 with " + std::to_string(a.ranks.size()) + " terms of " + a.input);
    const LL1Factors f = ll1_nn_best(t, a.ranks, cfg, a.restarts);
    save_bundle(out, f);
    converged = f.info.converged;
    line["fit"] = f.info.final_fit();
    line["sweeps"] = f.info.sweeps;
    line["ranks"] = a.ranks;
    line["zero_c_entries"] = f.info.zero_c_entries;
    line["degenerate_columns"] = f.info.degenerate_columns;
  } else {
    throw InvalidArgument("unknown method '" + a.method + "' (cpd, hosvd, ll1)");
  }
  line["converged"] = converged;
  line["status"] = converged ? "ok" : "not_converged";
  line["out"] = out.string();
  emit(line);
  if (!converged) log("sweep cap reached before convergence");
  return converged ? kExitOk : kExitNumeric;
}

// --- split --------------------------------------------------------------------------

struct SplitArgs {
  std::string input;
  std::string bank;
  double tau = 0.0;
  std::string out;
};

int run_split(const SplitArgs& a) {
  const DenseTensor t = dtf1::read(a.input);
  const std::string type = bundle_type(a.bank);
  if (type != "ll1") throw InvalidArgument(a.bank + ": expected an ll1 bundle, found " + type);
  const CommonFeatureBank bank = build_feature_bank(load_ll1_bundle(a.bank));
  log("splitting " + a.input + " with " + std::to_string(bank.size()) + " common features");
  const FeatureSplit split = split_features(t, bank, SubsetRule{a.tau});
  const fs::path out = output_dir(a.out, "split");
  save_split(out, split);

  double common = 0.0, individual = 0.0;
  for (std::size_t n = 0; n < split.common.size(); ++n) {
    const double c = norm_frobenius(split.common[n]), i = norm_frobenius(split.individual[n]);
    common += c * c;
    individual += i * i;
  }
  const double total = norm_frobenius(t);
  emit({{"command", "split"},
        {"observations", split.common.size()},
        {"tau", a.tau},
        {"subsets", split.subsets},
        {"common_norm", std::sqrt(common)},
        {"individual_norm", std::sqrt(individual)},
        {"individual_ratio", total > 0.0 ? std::sqrt(individual) / total : 0.0},
        {"out", out.string()}});
  return kExitOk;
}

// --- experiment ---------------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  bool dry_run = false;
  std::string out;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  const fs::path out = !a.out.empty()              ? fs::path(a.out)
                       : !cfg.output_dir.empty() ? fs::path(cfg.output_dir)
                                                 : output_dir("", "experiment");
  const EnsembleDataset ds = load_source(cfg.dataset);
  log("dataset " + cfg.dataset.kind + ": " + std::to_string(ds.count()) + " observations");

  if (a.dry_run) {
    json plans = json::array();
    for (int r = 0; r < cfg.realizations; ++r) {
      const SplitPlan p =
          make_group_splits(ds, cfg.groups, cfg.train_groups, realization_seed(cfg, r));
      plans.push_back({{"realization", r},
                       {"seed", p.seed},
                       {"train_groups", p.train_groups},
                       {"test_groups", p.test_groups}});
    }
    emit({{"command", "experiment"},
          {"dry_run", true},
          {"config", to_json(cfg)},
          {"dataset_shape", ds.tensor.shape()},
          {"out", out.string()},
          {"plans", plans}});
    return kExitOk;
  }

  log("running " + std::to_string(cfg.realizations) + " realizations");
  const ExperimentResult result = run_experiments(ds, cfg);
  write_experiment(out, result, cfg);
  json line = summary_json(result, cfg);
  line["command"] = "experiment";
  line["out"] = out.string();
  emit(line);
  return kExitOk;
}

// --- synth --------------------------------------------------------------------------

struct SynthArgs {
  std::string kind = "color-ensemble";
  std::uint64_t seed = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  auto make = [&] {
    if (a.kind == "color-ensemble")
      return synthetic_color_ensemble(a.height ? a.height : 16, a.width ? a.width : 16, a.seed);
    if (a.kind == "face-fixture") {
      FaceFixtureParams p;
      if (a.height) p.height = a.height;
      if (a.width) p.width = a.width;
      return synthetic_face_fixture(a.seed, p);
    }
    throw InvalidArgument("unknown kind '" + a.kind + "' (color-ensemble, face-fixture)");
  };
  const EnsembleDataset ds = make();
  const fs::path out = output_dir(a.out, "synth");
  save_dataset(out, ds);
  log("wrote " + (out / "tensor.dtf1").string());
  emit({{"command", "synth"},
        {"kind", a.kind},
        {"seed", a.seed},
        {"shape", ds.tensor.shape()},
        {"labels", ds.labels},
        {"out", out.string()}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor decompositions for common and individual feature extraction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("-q,--quiet", g_quiet, "Suppress progress messages on stderr");

  DecomposeArgs dec;
  auto* dcmd = app.add_subcommand("decompose", "Fit cpd, hosvd or ll1 to a DTF1 tensor");
  dcmd->add_option("input", dec.input, "Input tensor (.dtf1)")->required();
  dcmd->add_option("--method", dec.method, "cpd, hosvd or ll1")->capture_default_str();
  dcmd->add_option("--ranks", dec.ranks, "cpd: R; hosvd: one rank per mode; ll1: L_k per term")
      ->delimiter(',');
  dcmd->add_option("--seed", dec.seed)->capture_default_str();
  dcmd->add_option("--tol", dec.tol, "Relative fit change that stops the sweeps")
      ->capture_default_str();
  dcmd->add_option("--max-sweeps", dec.max_sweeps)->capture_default_str();
  dcmd->add_option("--restarts", dec.restarts, "Independent starts; best fit kept")
      ->capture_default_str();
  dcmd->add_option("--init", dec.init, "random or hosvd")
      ->check(CLI::IsMember({"random", "hosvd"}))
      ->capture_default_str();
  dcmd->add_option("--out", dec.out, "Bundle directory");

  SplitArgs spl;
  auto* scmd = app.add_subcommand("split", "Separate common and individual features");
  scmd->add_option("input", spl.input, "Input tensor (.dtf1)")->required();
  scmd->add_option("bank", spl.bank, "ll1 bundle directory")->required();
  scmd->add_option("--tau", spl.tau, "Relative weight threshold for K_n")->capture_default_str();
  scmd->add_option("--out", spl.out, "Output directory");

  ExperimentArgs exp;
  auto* ecmd = app.add_subcommand("experiment", "Run a classification experiment");
  ecmd->add_option("config", exp.config, "Experiment config (.json)")->required();
  ecmd->add_flag("--dry-run", exp.dry_run, "Print the resolved plan and exit");
  ecmd->add_option("--out", exp.out, "Output directory");

  SynthArgs syn;
  auto* ycmd = app.add_subcommand("synth", "Generate a synthetic ensemble");
  ycmd->add_option("--kind", syn.kind, "color-ensemble or face-fixture")->capture_default_str();
  ycmd->add_option("--seed", syn.seed)->capture_default_str();
  ycmd->add_option("--height", syn.height);
  ycmd->add_option("--width", syn.width);
  ycmd->add_option("--out", syn.out, "Dataset directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*dcmd) return run_decompose(dec);
    if (*scmd) return run_split(spl);
    if (*ecmd) return run_experiment_cmd(exp);
    if (*ycmd) return run_synth(syn);
  } catch (const IoError& e) {
    std::cerr << "tdcif: error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "tdcif: error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "tdcif: numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "tdcif: internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
