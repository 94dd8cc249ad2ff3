#include "grain/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <system_error>

#include "grain/errors.hpp"
#include "grain/numeric.hpp"
#include "grain/rng.hpp"
#include "json.hpp"

namespace grain {

namespace {

// Row indices of each fine class, classes keyed by id, rows in input order.
std::vector<std::vector<int>> rows_by_class(const Dataset& ds, int k) {
  std::vector<std::vector<int>> rows(k);
  for (std::size_t i = 0; i < ds.fine_labels.size(); ++i) {
    const int label = ds.fine_labels[i];
    if (label < 0 || label >= k) {
      throw Error("dataset: label " + std::to_string(label) + " outside [0, " +
                  std::to_string(k) + ")");
    }
    rows[label].push_back(static_cast<int>(i));
  }
  return rows;
}

Dataset take_rows(const Dataset& ds, const std::vector<int>& rows) {
  Dataset out;
  out.hierarchy_ref = ds.hierarchy_ref;
  out.features = Matrix(rows.size(), ds.dim());
  out.fine_labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(ds.features.row(rows[i]), ds.dim(), out.features.row(i));
    out.fine_labels.push_back(ds.fine_labels[rows[i]]);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
  const LabelHierarchy& h = spec.hierarchy;
  if (spec.n_per_fine <= 0) {
    throw Error("generate_synthetic: n_per_fine must be positive");
  }
  if (spec.dim < h.coarse_count()) {
    throw Error("generate_synthetic: dim " + std::to_string(spec.dim) +
                " cannot place a regular simplex over " +
                std::to_string(h.coarse_count()) + " coarse classes");
  }
  if (!(spec.coarse_separation > 0.0) || !(spec.fine_separation > 0.0) ||
      !(spec.noise_sigma > 0.0)) {
    throw Error("generate_synthetic: separations and sigma must be positive");
  }

  // Regular simplex with edge length coarse_separation: scaled basis vectors,
  // recentered so the coarse centers have zero mean.
  const int nc = h.coarse_count();
  const double scale = spec.coarse_separation / std::sqrt(2.0);
  Matrix coarse_centers(nc, spec.dim, 0.0);
  for (int c = 0; c < nc; ++c) {
    coarse_centers(c, c) = scale;
  }
  const double mean = scale / static_cast<double>(nc);
  for (int c = 0; c < nc; ++c) {
    for (int d = 0; d < nc; ++d) {
      coarse_centers(c, d) -= mean;
    }
  }

  Rng rng(spec.seed);

  // Sub-centers: uniform directions on the sphere, one per fine class.
  Matrix sub_centers(h.fine_count(), spec.dim);
  for (int f = 0; f < h.fine_count(); ++f) {
    double norm_sq;
    std::vector<double> u(spec.dim);
    do {
      norm_sq = 0.0;
      for (int d = 0; d < spec.dim; ++d) {
        u[d] = rng.normal();
        norm_sq += u[d] * u[d];
      }
    } while (norm_sq < 1e-24);
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    const double* center = coarse_centers.row(h.coarse_of(f));
    for (int d = 0; d < spec.dim; ++d) {
      sub_centers(f, d) = center[d] + spec.fine_separation * u[d] * inv_norm;
    }
  }

  Dataset ds;
  const std::size_t n = static_cast<std::size_t>(h.fine_count()) * spec.n_per_fine;
  ds.features = Matrix(n, spec.dim);
  ds.fine_labels.reserve(n);
  std::size_t row = 0;
  for (int f = 0; f < h.fine_count(); ++f) {
    for (int i = 0; i < spec.n_per_fine; ++i, ++row) {
      double* x = ds.features.row(row);
      const double* c = sub_centers.row(f);
      for (int d = 0; d < spec.dim; ++d) {
        x[d] = c[d] + spec.noise_sigma * rng.normal();
      }
      ds.fine_labels.push_back(f);
    }
  }
  return ds;
}

Dataset stratified_subsample(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error("stratified_subsample: fraction must be in (0, 1]");
  }
  const int k = *std::max_element(ds.fine_labels.begin(), ds.fine_labels.end()) + 1;
  auto by_class = rows_by_class(ds, k);
  std::vector<int> selected;
  Rng rng(seed);
  for (auto& rows : by_class) {
    if (rows.empty()) {
      continue;
    }
    const long long keep = std::max(
        1ll, floor_slack(fraction * static_cast<double>(rows.size())));
    rng.shuffle(rows);
    selected.insert(selected.end(), rows.begin(), rows.begin() + keep);
  }
  std::sort(selected.begin(), selected.end());
  return take_rows(ds, selected);
}

Dataset inject_label_noise(const Dataset& ds, const LabelHierarchy& h,
                           const NoiseConfig& cfg) {
  if (cfg.randomness_factor < 0.0 || cfg.randomness_factor > 1.0) {
    throw Error("inject_label_noise: randomness_factor must be in [0, 1]");
  }
  Dataset out = ds;
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < out.fine_labels.size(); ++i) {
    const double u = rng.uniform();  // drawn unconditionally to pair factor levels
    if (u < cfg.randomness_factor) {
      const auto& group = h.fine_ids_of(h.coarse_of(out.fine_labels[i]));
      out.fine_labels[i] = group[rng.uniform_below(group.size())];
    }
  }
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
    throw Error("train_test_split: test_fraction must be in (0, 1)");
  }
  if (ds.size() == 0) {
    throw Error("train_test_split: empty dataset");
  }
  const int k = *std::max_element(ds.fine_labels.begin(), ds.fine_labels.end()) + 1;
  auto by_class = rows_by_class(ds, k);
  std::vector<int> train_rows, test_rows;
  Rng rng(seed);
  for (int label = 0; label < k; ++label) {
    auto& rows = by_class[label];
    if (rows.empty()) {
      continue;
    }
    const long long n_test =
        floor_slack(test_fraction * static_cast<double>(rows.size()));
    if (n_test == 0 || n_test == static_cast<long long>(rows.size())) {
      throw Error("train_test_split: class " + std::to_string(label) + " with " +
                  std::to_string(rows.size()) +
                  " examples cannot appear in both splits at test_fraction " +
                  std::to_string(test_fraction));
    }
    rng.shuffle(rows);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + n_test);
    train_rows.insert(train_rows.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

Dataset map_to_coarse(const Dataset& ds, const LabelHierarchy& h) {
  Dataset out = ds;
  for (int& label : out.fine_labels) {
    label = h.coarse_of(label);
  }
  out.hierarchy_ref = ds.hierarchy_ref + "/coarse";
  return out;
}

Dataset apply_fine_remap(const Dataset& ds, const std::vector<int>& remap) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < ds.fine_labels.size(); ++i) {
    const int label = ds.fine_labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= remap.size()) {
      throw Error("apply_fine_remap: label outside remap range");
    }
    if (remap[label] != -1) {
      rows.push_back(static_cast<int>(i));
    }
  }
  Dataset out = take_rows(ds, rows);
  for (int& label : out.fine_labels) {
    label = remap[label];
  }
  return out;
}

Dataset load_dataset_csv(std::istream& in, const LabelHierarchy& h) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("dataset csv: empty input");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  std::vector<std::string> header;
  {
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      header.push_back(cell);
    }
  }
  if (header.size() < 2 || header.back() != "fine_label") {
    throw Error("dataset csv: header must end in fine_label");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t d = 0; d < dim; ++d) {
    if (header[d] != "f" + std::to_string(d)) {
      throw Error("dataset csv: expected feature column f" + std::to_string(d) +
                  ", found '" + header[d] + "'");
    }
  }

  std::vector<double> features;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::size_t pos = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        throw Error("dataset csv: line " + std::to_string(line_no) + " has too few cells");
      }
      double v;
      const auto res = std::from_chars(line.data() + pos, line.data() + comma, v);
      if (res.ec != std::errc() || res.ptr != line.data() + comma) {
        throw Error("dataset csv: line " + std::to_string(line_no) +
                    ": bad number '" + line.substr(pos, comma - pos) + "'");
      }
      features.push_back(v);
      pos = comma + 1;
    }
    if (line.find(',', pos) != std::string::npos) {
      throw Error("dataset csv: line " + std::to_string(line_no) + " has too many cells");
    }
    labels.push_back(h.fine_id(line.substr(pos)));
  }

  Dataset ds;
  ds.features.rows = labels.size();
  ds.features.cols = dim;
  ds.features.values = std::move(features);
  ds.fine_labels = std::move(labels);
  return ds;
}

Dataset load_dataset_csv_file(const std::filesystem::path& path, const LabelHierarchy& h) {
  std::ifstream in(path);
  if (!in) {
    throw Error("dataset csv: cannot open '" + path.string() + "'");
  }
  return load_dataset_csv(in, h);
}

void save_dataset_csv(const Dataset& ds, const LabelHierarchy& h, std::ostream& out) {
  for (std::size_t d = 0; d < ds.dim(); ++d) {
    out << 'f' << d << ',';
  }
  out << "fine_label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double* x = ds.features.row(i);
    for (std::size_t d = 0; d < ds.dim(); ++d) {
      out << format_double(x[d]) << ',';
    }
    const int label = ds.fine_labels[i];
    if (label < 0 || label >= h.fine_count()) {
      throw Error("dataset csv: label outside hierarchy");
    }
    out << h.fine_names()[label] << '\n';
  }
}

void save_dataset_csv_file(const Dataset& ds, const LabelHierarchy& h,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("dataset csv: cannot open '" + path.string() + "' for writing");
  }
  save_dataset_csv(ds, h, out);
  if (!out) {
    throw Error("dataset csv: write to '" + path.string() + "' failed");
  }
}

std::string dataset_manifest_json(const Dataset& ds, const LabelHierarchy& h,
                                  const SyntheticSpec* generated_from) {
  nlohmann::ordered_json doc;
  doc["format"] = "labelgrain-dataset-v1";
  doc["rows"] = ds.size();
  doc["dim"] = ds.dim();
  doc["hierarchy"] = ds.hierarchy_ref;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  std::vector<std::int64_t> per_class(h.fine_count(), 0);
  for (int label : ds.fine_labels) {
    if (label < 0 || label >= h.fine_count()) {
      throw Error("dataset manifest: label outside hierarchy");
    }
    ++per_class[label];
  }
  for (int f = 0; f < h.fine_count(); ++f) {
    counts[h.fine_names()[f]] = per_class[f];
  }
  doc["class_counts"] = counts;
  if (generated_from != nullptr) {
    doc["synthetic"] = {{"n_per_fine", generated_from->n_per_fine},
                        {"dim", generated_from->dim},
                        {"coarse_separation", generated_from->coarse_separation},
                        {"fine_separation", generated_from->fine_separation},
                        {"noise_sigma", generated_from->noise_sigma},
                        {"seed", generated_from->seed}};
  }
  return doc.dump(2) + "\n";
}

}  // namespace grain
