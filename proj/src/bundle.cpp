#include "tdcif/bundle.hpp"

#include <fstream>

#include "tdcif/dtf1.hpp"
#include "tdcif/error.hpp"

namespace tdcif {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json info_json(const RunInfo& info) {
  return {{"fit_history", info.fit_history},
          {"seed", info.seed},
          {"sweeps", info.sweeps},
          {"converged", info.converged},
          {"fit", info.final_fit()},
          {"diagnostics",
           {{"degenerate_columns", info.degenerate_columns},
            {"zero_c_entries", info.zero_c_entries},
            {"rank_flagged", info.rank_flagged}}}};
}

RunInfo info_from_json(const json& m) {
  RunInfo info;
  info.fit_history = m.value("fit_history", std::vector<double>{});
  info.seed = m.value("seed", std::uint64_t{0});
  info.sweeps = m.value("sweeps", 0);
  info.converged = m.value("converged", false);
  if (m.contains("diagnostics")) {
    const auto& d = m["diagnostics"];
    info.degenerate_columns = d.value("degenerate_columns", 0);
    info.zero_c_entries = d.value("zero_c_entries", 0);
    info.rank_flagged = d.value("rank_flagged", false);
  }
  return info;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw IoError("cannot write " + (dir / "manifest.json").string());
  f << manifest.dump(2) << "\n";
}

std::string name(const std::string& stem, std::size_t i, const std::string& suffix) {
  return stem + std::to_string(i) + suffix + ".dtf1";
}

template <class F>
auto with_manifest_errors(const fs::path& dir, F&& load) {
  try {
    return load();
  } catch (const json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
}

}  // namespace

json read_manifest(const fs::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw IoError("cannot open " + (dir / "manifest.json").string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
}

std::string bundle_type(const fs::path& dir) {
  const json m = read_manifest(dir);
  if (!m.contains("type") || !m["type"].is_string())
    throw IoError((dir / "manifest.json").string() + ": missing bundle type");
  return m["type"].get<std::string>();
}

void save_bundle(const fs::path& dir, const LL1Factors& f) {
  fs::create_directories(dir);
  json lambda = json::array();
  for (std::size_t k = 0; k < f.terms.size(); ++k) {
    const auto& t = f.terms[k];
    dtf1::write(dir / name("term", k, "_A"), as_tensor(t.a));
    dtf1::write(dir / name("term", k, "_B"), as_tensor(t.b));
    dtf1::write(dir / name("term", k, "_c"), as_tensor(t.c));
    lambda.push_back(t.lambda);
  }
  json m = info_json(f.info);
  m["type"] = "ll1";
  m["K"] = f.terms.size();
  m["ranks"] = f.ranks();
  m["lambda"] = lambda;
  m["shape"] = f.shape();
  write_manifest(dir, m);
}

void save_bundle(const fs::path& dir, const KruskalFactors& f) {
  fs::create_directories(dir);
  for (std::size_t n = 0; n < f.factors.size(); ++n)
    dtf1::write(dir / name("factor", n, ""), as_tensor(f.factors[n]));
  json m = info_json(f.info);
  m["type"] = "cpd";
  m["K"] = f.rank();
  m["ranks"] = std::vector<std::size_t>(f.rank(), 1);
  m["lambda"] = f.weights;
  m["order"] = f.factors.size();
  write_manifest(dir, m);
}

void save_bundle(const fs::path& dir, const TuckerFactors& f, double fit) {
  fs::create_directories(dir);
  dtf1::write(dir / "core.dtf1", f.core);
  for (std::size_t n = 0; n < f.factors.size(); ++n)
    dtf1::write(dir / name("factor", n, ""), as_tensor(f.factors[n]));
  json m = {{"type", "hosvd"},
            {"K", 1},
            {"ranks", f.core.shape()},
            {"lambda", json::array()},
            {"fit", fit},
            {"fit_history", {fit}},
            {"sweeps", 1},
            {"seed", 0},
            {"converged", true},
            {"order", f.factors.size()}};
  write_manifest(dir, m);
}

LL1Factors load_ll1_bundle(const fs::path& dir) {
  return with_manifest_errors(dir, [&] {
    const json m = read_manifest(dir);
    if (m.value("type", "") != "ll1") throw IoError(dir.string() + ": not an ll1 bundle");
    LL1Factors f;
    f.info = info_from_json(m);
    const auto k = m.at("K").get<std::size_t>();
    const auto lambda = m.at("lambda").get<std::vector<std::vector<double>>>();
    if (lambda.size() != k) throw IoError(dir.string() + ": lambda count does not match K");
    for (std::size_t i = 0; i < k; ++i) {
      BlockTerm t;
      t.a = as_matrix(dtf1::read(dir / name("term", i, "_A")));
      t.b = as_matrix(dtf1::read(dir / name("term", i, "_B")));
      t.c = as_matrix(dtf1::read(dir / name("term", i, "_c"))).col_vector(0);
      t.lambda = lambda[i];
      if (t.a.cols() != t.rank() || t.b.cols() != t.rank())
        throw IoError(dir.string() + ": term " + std::to_string(i) + " is inconsistent");
      f.terms.push_back(std::move(t));
    }
    return f;
  });
}

KruskalFactors load_cpd_bundle(const fs::path& dir) {
  return with_manifest_errors(dir, [&] {
    const json m = read_manifest(dir);
    if (m.value("type", "") != "cpd") throw IoError(dir.string() + ": not a cpd bundle");
    KruskalFactors f;
    f.info = info_from_json(m);
    f.weights = m.at("lambda").get<std::vector<double>>();
    const auto order = m.at("order").get<std::size_t>();
    for (std::size_t n = 0; n < order; ++n)
      f.factors.push_back(as_matrix(dtf1::read(dir / name("factor", n, ""))));
    return f;
  });
}

TuckerFactors load_hosvd_bundle(const fs::path& dir) {
  return with_manifest_errors(dir, [&] {
    const json m = read_manifest(dir);
    if (m.value("type", "") != "hosvd") throw IoError(dir.string() + ": not a hosvd bundle");
    TuckerFactors f{dtf1::read(dir / "core.dtf1"), {}};
    for (std::size_t n = 0; n < f.core.order(); ++n)
      f.factors.push_back(as_matrix(dtf1::read(dir / name("factor", n, ""))));
    return f;
  });
}

}  // namespace tdcif
