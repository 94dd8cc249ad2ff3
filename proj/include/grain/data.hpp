#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "grain/hierarchy.hpp"
#include "grain/matrix.hpp"

namespace grain {

// Feature matrix plus one fine label per row. Coarse labels are always
// derived through a hierarchy, never stored, so the two can never disagree.
struct Dataset {
  Matrix features;               // n x d
  std::vector<int> fine_labels;  // length n
  std::string hierarchy_ref;     // id of the hierarchy the labels index, for manifests

  std::size_t size() const { return fine_labels.size(); }
  std::size_t dim() const { return features.cols; }
};

// Recipe for a synthetic hierarchical dataset with controllable granularity
// structure. Coarse-class centers sit at the vertices of a regular simplex
// with edge length coarse_separation (requires dim >= coarse count); each
// fine class draws a sub-center uniformly on the sphere of radius
// fine_separation around its group's center; examples are the sub-center
// plus isotropic Gaussian noise of scale noise_sigma.
struct SyntheticSpec {
  LabelHierarchy hierarchy;
  int n_per_fine = 100;
  int dim = 2;
  double coarse_separation = 4.0;
  double fine_separation = 1.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

// Draw order is fixed (all sub-centers in fine-id order, then example blocks
// in fine-id order, row-major features), so a spec reproduces its dataset
// bit-for-bit. Rows come out grouped by fine label.
Dataset generate_synthetic(const SyntheticSpec& spec);

struct NoiseConfig {
  double randomness_factor = 0.0;  // probability an example's label is resampled
  std::uint64_t seed = 0;
};

// Per fine class, keeps max(1, floor(fraction * class_size)) rows chosen
// uniformly without replacement; the output preserves the input row order.
Dataset stratified_subsample(const Dataset& ds, double fraction, std::uint64_t seed);

// Each row independently has its fine label resampled uniformly over the
// fine classes of its own coarse class -- the original label included --
// with probability randomness_factor. Derived coarse labels never change.
// One uniform draw is consumed per row even at factor 0, so runs over a
// factor grid flip the same rows at every level below each row's threshold.
Dataset inject_label_noise(const Dataset& ds, const LabelHierarchy& h,
                           const NoiseConfig& cfg);

// Stratified split into (train, test): per fine class, a shuffled
// floor(test_fraction * class_size) of the rows go to test. Both sides
// preserve the input row order.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

// Copy of ds with labels mapped through h to coarse ids; its labels index
// the coarse_identity(h) label space. hierarchy_ref gains a "/coarse" suffix.
Dataset map_to_coarse(const Dataset& ds, const LabelHierarchy& h);

// Keeps rows whose fine label survives the remap (entry != -1) and rewrites
// the labels; pairs with restrict_coarse.
Dataset apply_fine_remap(const Dataset& ds, const std::vector<int>& remap);

// CSV interchange format: header f0,...,f{d-1},fine_label; features printed
// as shortest round-trip decimals, labels as hierarchy fine names.
Dataset load_dataset_csv(std::istream& in, const LabelHierarchy& h);
Dataset load_dataset_csv_file(const std::filesystem::path& path, const LabelHierarchy& h);
void save_dataset_csv(const Dataset& ds, const LabelHierarchy& h, std::ostream& out);
void save_dataset_csv_file(const Dataset& ds, const LabelHierarchy& h,
                           const std::filesystem::path& path);

// JSON sidecar describing a dataset file: row count, dimension, hierarchy
// id, per-class counts, and the generator recipe when one applies.
std::string dataset_manifest_json(const Dataset& ds, const LabelHierarchy& h,
                                  const SyntheticSpec* generated_from = nullptr);

}  // namespace grain
