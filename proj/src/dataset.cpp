#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "tdcif/dataset.hpp"
#include "tdcif/dtf1.hpp"
#include "tdcif/error.hpp"
#include "tdcif/rng.hpp"

namespace tdcif {

namespace fs = std::filesystem;

void EnsembleDataset::validate() const {
  if (labels.empty()) throw InvalidArgument("dataset has no labels");
  if (tensor.order() != 3 || tensor.extent(2) != labels.size())
    throw InvalidArgument("dataset: " + std::to_string(labels.size()) +
                          " labels for a tensor with third extent " +
                          std::to_string(tensor.order() == 3 ? tensor.extent(2) : 0));
}

EnsembleDataset load_pgm_ensemble(std::span<const fs::path> paths, std::span<const int> labels) {
  if (paths.empty()) throw InvalidArgument("load_pgm_ensemble: no images given");
  if (paths.size() != labels.size())
    throw InvalidArgument("load_pgm_ensemble: " + std::to_string(paths.size()) + " paths but " +
                          std::to_string(labels.size()) + " labels");
  std::vector<Matrix> images;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : paths) {
    images.push_back(read_pgm(p));
    if (images.back().rows() != images.front().rows() ||
        images.back().cols() != images.front().cols())
      throw InvalidArgument("load_pgm_ensemble: " + p.string() + " is " +
                            std::to_string(images.back().rows()) + "x" +
                            std::to_string(images.back().cols()) + ", expected " +
                            std::to_string(images.front().rows()) + "x" +
                            std::to_string(images.front().cols()));
    files.push_back(p.string());
  }
  EnsembleDataset ds{stack_frontal(images), std::vector<int>(labels.begin(), labels.end()),
                     {{"kind", "pgm"}, {"files", files}}};
  return ds;
}

EnsembleDataset load_orl(const fs::path& root) {
  std::vector<fs::path> paths;
  std::vector<int> labels;
  for (int cls = 1;; ++cls) {
    const fs::path dir = root / ("s" + std::to_string(cls));
    if (!fs::is_directory(dir)) break;
    for (int s = 1;; ++s) {
      const fs::path file = dir / (std::to_string(s) + ".pgm");
      if (!fs::exists(file)) break;
      paths.push_back(file);
      labels.push_back(cls - 1);
    }
  }
  if (paths.empty()) throw IoError("no ORL images under " + root.string());
  EnsembleDataset ds = load_pgm_ensemble(paths, labels);
  ds.meta = {{"kind", "orl"}, {"root", root.string()}, {"images", paths.size()}};
  return ds;
}

Matrix color_mixing_matrix() {
  // columns: red, green, blue intensity of each of the five members
  return Matrix::from_rows({{128, 128, 128},
                            {256, 256, 0},
                            {256, 0, 256},
                            {0, 256, 256},
                            {256, 128, 32}});
}

ColorEnsembleParts color_ensemble_parts(std::size_t height, std::size_t width,
                                        std::uint64_t seed) {
  if (height < 1 || width < 1) throw InvalidArgument("color ensemble needs positive size");
  Rng rng = make_rng(seed, "synth/color");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ColorEnsembleParts parts;
  for (int k = 0; k < 3; ++k) {
    Vector a(height), b(width);
    for (double& x : a) x = u01(rng);
    for (double& x : b) x = u01(rng);
    parts.base_slices.push_back(
        matmul(Matrix::column(a), transpose(Matrix::column(b))));
  }
  parts.mixing = color_mixing_matrix();
  return parts;
}

EnsembleDataset synthetic_color_ensemble(std::size_t height, std::size_t width,
                                         std::uint64_t seed) {
  const ColorEnsembleParts parts = color_ensemble_parts(height, width, seed);
  std::vector<Matrix> slices;
  for (std::size_t n = 0; n < parts.mixing.rows(); ++n) {
    Matrix s(height, width);
    for (std::size_t k = 0; k < 3; ++k)
      s = add(s, scale(parts.base_slices[k], parts.mixing(n, k)));
    slices.push_back(std::move(s));
  }
  nlohmann::json mixing = nlohmann::json::array();
  for (std::size_t n = 0; n < parts.mixing.rows(); ++n) mixing.push_back(parts.mixing.row_vector(n));
  return EnsembleDataset{stack_frontal(slices),
                         {0, 1, 2, 3, 4},
                         {{"kind", "color-ensemble"},
                          {"height", height},
                          {"width", width},
                          {"seed", seed},
                          {"mixing", mixing}}};
}

EnsembleDataset synthetic_face_fixture(std::uint64_t seed, const FaceFixtureParams& p) {
  if (p.classes < 1 || p.samples_per_class < 1 || p.height < 2 || p.width < 2)
    throw InvalidArgument("face fixture: invalid parameters");
  const std::size_t h = p.height, w = p.width;
  Rng rng = make_rng(seed, "synth/faces");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);

  auto blob = [&](double r0, double c0, double sigma) {
    Matrix m(h, w);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) {
        const double dr = static_cast<double>(r) - r0, dc = static_cast<double>(c) - c0;
        m(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
      }
    return m;
  };

  std::vector<Matrix> class_patterns;
  for (std::size_t k = 0; k < p.classes; ++k) {
    Matrix m(h, w);
    for (int b = 0; b < 2; ++b)
      m = add(m, blob(u01(rng) * static_cast<double>(h - 1), u01(rng) * static_cast<double>(w - 1),
                      1.2 + 0.6 * u01(rng)));
    class_patterns.push_back(std::move(m));
  }

  // Shared illumination: vertical and horizontal ramps, rank one each.
  Vector vert(h), horiz(w), ones_h(h, 1.0), ones_w(w, 1.0);
  for (std::size_t r = 0; r < h; ++r) vert[r] = 0.2 + 0.8 * static_cast<double>(r) / static_cast<double>(h - 1);
  for (std::size_t c = 0; c < w; ++c) horiz[c] = 1.0 - 0.8 * static_cast<double>(c) / static_cast<double>(w - 1);
  const std::vector<Matrix> shared = {
      matmul(Matrix::column(vert), transpose(Matrix::column(ones_w))),
      matmul(Matrix::column(ones_h), transpose(Matrix::column(horiz)))};

  std::vector<Matrix> slices;
  std::vector<int> labels;
  for (std::size_t k = 0; k < p.classes; ++k)
    for (std::size_t s = 0; s < p.samples_per_class; ++s) {
      Matrix x = scale(class_patterns[k], 0.9 + 0.2 * u01(rng));
      for (const auto& sh : shared) x = add(x, scale(sh, p.shared_strength * u01(rng)));
      for (double& v : x.data()) v = std::max(0.0, v + p.noise * n01(rng));
      slices.push_back(std::move(x));
      labels.push_back(static_cast<int>(k));
    }
  return EnsembleDataset{stack_frontal(slices),
                         std::move(labels),
                         {{"kind", "face-fixture"},
                          {"seed", seed},
                          {"classes", p.classes},
                          {"samples_per_class", p.samples_per_class},
                          {"height", h},
                          {"width", w},
                          {"shared_strength", p.shared_strength},
                          {"noise", p.noise}}};
}

SplitPlan make_group_splits(const EnsembleDataset& ds, std::size_t groups, std::size_t train,
                            std::uint64_t seed) {
  ds.validate();
  if (groups < 2) throw InvalidArgument("make_group_splits: needs at least two groups");
  if (train < 1 || train >= groups)
    throw InvalidArgument("make_group_splits: train group count must be in [1, groups)");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) by_class[ds.labels[i]].push_back(i);

  SplitPlan plan;
  plan.seed = seed;
  plan.groups.assign(groups, {});
  for (auto& [label, members] : by_class) {
    if (members.size() < groups)
      throw InvalidArgument("make_group_splits: class " + std::to_string(label) + " has " +
                            std::to_string(members.size()) + " samples, needs " +
                            std::to_string(groups));
    Rng rng = make_rng(seed, "split/class", static_cast<std::uint64_t>(label));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t g = 0; g < groups; ++g) plan.groups[g].push_back(members[g]);
  }
  std::vector<std::size_t> order(groups);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, "split/groups");
  std::shuffle(order.begin(), order.end(), rng);
  plan.train_groups.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train));
  plan.test_groups.assign(order.begin() + static_cast<std::ptrdiff_t>(train), order.end());
  std::sort(plan.train_groups.begin(), plan.train_groups.end());
  std::sort(plan.test_groups.begin(), plan.test_groups.end());
  return plan;
}

EnsembleDataset select(const EnsembleDataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("select: no indices");
  std::vector<Matrix> slices;
  std::vector<int> labels;
  for (std::size_t i : indices) {
    if (i >= ds.count()) throw InvalidArgument("select: index out of range");
    slices.push_back(ds.observation(i));
    labels.push_back(ds.labels[i]);
  }
  return EnsembleDataset{stack_frontal(slices), std::move(labels), ds.meta};
}

void save_dataset(const fs::path& dir, const EnsembleDataset& ds) {
  ds.validate();
  fs::create_directories(dir);
  dtf1::write(dir / "tensor.dtf1", ds.tensor);
  const nlohmann::json manifest = {
      {"shape", ds.tensor.shape()}, {"labels", ds.labels}, {"source", ds.meta}};
  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) throw IoError("cannot write " + (dir / "manifest.json").string());
  f << manifest.dump(2) << "\n";
}

EnsembleDataset load_dataset(const fs::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw IoError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  EnsembleDataset ds{dtf1::read(dir / "tensor.dtf1"),
                     manifest.value("labels", std::vector<int>{}),
                     manifest.value("source", nlohmann::json::object())};
  ds.validate();
  return ds;
}

}  // namespace tdcif
