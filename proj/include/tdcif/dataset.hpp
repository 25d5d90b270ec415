#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdcif/tensor.hpp"

namespace tdcif {

/// Observations (O x P matrices) stacked along the third mode, one label per
/// observation. `meta` records where the data came from.
struct EnsembleDataset {
  DenseTensor tensor;
  std::vector<int> labels;
  nlohmann::json meta;

  std::size_t count() const { return labels.size(); }
  Matrix observation(std::size_t n) const { return frontal_slice(tensor, n); }
  /// Throws InvalidArgument when the label count and the third extent differ.
  void validate() const;
};

// --- PGM ----------------------------------------------------------------------

/// Decodes a binary (P5) or ASCII (P2) PGM with maxval <= 65535. Rows of the
/// image become rows of the matrix; values are divided by maxval.
Matrix decode_pgm(std::span<const std::uint8_t> bytes);
Matrix read_pgm(const std::filesystem::path& path);
/// Writes a P5 file, values in [0, 1] quantized to `maxval` levels.
void write_pgm(const std::filesystem::path& path, const Matrix& image, int maxval = 255);

/// Stacks the images in argument order. Throws on mixed sizes or empty input.
EnsembleDataset load_pgm_ensemble(std::span<const std::filesystem::path> paths,
                                  std::span<const int> labels);

/// ORL layout: root/s<class>/<sample>.pgm, classes 1..N, labels class - 1.
EnsembleDataset load_orl(const std::filesystem::path& root);

// --- synthetic data -------------------------------------------------------------

/// The five-colour mixing matrix: columns are the red, green and blue
/// intensities of each ensemble member.
Matrix color_mixing_matrix();

struct ColorEnsembleParts {
  std::vector<Matrix> base_slices;  // three rank-1 non-negative patterns
  Matrix mixing;                    // 5 x 3
};

/// Base patterns used by synthetic_color_ensemble for the same arguments.
ColorEnsembleParts color_ensemble_parts(std::size_t height, std::size_t width,
                                        std::uint64_t seed);

/// X = sum_k Y_k o c_k with three seeded rank-1 patterns Y_k and the fixed
/// mixing columns c_k. Five observations labelled 0..4.
EnsembleDataset synthetic_color_ensemble(std::size_t height, std::size_t width,
                                         std::uint64_t seed);

struct FaceFixtureParams {
  std::size_t classes = 4;
  std::size_t samples_per_class = 6;
  std::size_t height = 16;
  std::size_t width = 12;
  double shared_strength = 3.0;  // upper bound of the illumination weights
  double noise = 0.02;
};

/// Small "face-like" ensemble: each class owns a blob pattern, and every
/// sample adds randomly weighted shared illumination patterns that dominate
/// the raw pixel distances.
EnsembleDataset synthetic_face_fixture(std::uint64_t seed, const FaceFixtureParams& params = {});

// --- train / test grouping --------------------------------------------------------

/// groups[g] holds one sample index per class (classes in ascending order).
struct SplitPlan {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> train_groups;
  std::vector<std::size_t> test_groups;
  std::uint64_t seed = 0;
};

/// Per class, draws `groups` samples without replacement; the groups are then
/// shuffled and the first `train` become training groups.
SplitPlan make_group_splits(const EnsembleDataset& ds, std::size_t groups, std::size_t train,
                            std::uint64_t seed);

/// Observations of the given indices stacked in order.
EnsembleDataset select(const EnsembleDataset& ds, std::span<const std::size_t> indices);

// --- persistence -------------------------------------------------------------------

/// dir/tensor.dtf1 plus dir/manifest.json {shape, labels, source}.
void save_dataset(const std::filesystem::path& dir, const EnsembleDataset& ds);
EnsembleDataset load_dataset(const std::filesystem::path& dir);

}  // namespace tdcif
