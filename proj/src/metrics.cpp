#include "grain/metrics.hpp"

#include <numeric>
#include <ostream>
#include <stdexcept>

namespace grain {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix build_confusion(std::span<const int> true_fine,
                                std::span<const int> pred_fine, int k) {
  if (true_fine.size() != pred_fine.size()) {
    throw std::invalid_argument("build_confusion: label sequences differ in length");
  }
  if (k <= 0) {
    throw std::invalid_argument("build_confusion: class count must be positive");
  }
  ConfusionMatrix c(k);
  for (std::size_t i = 0; i < true_fine.size(); ++i) {
    const int t = true_fine[i];
    const int p = pred_fine[i];
    if (t < 0 || t >= k || p < 0 || p >= k) {
      throw std::invalid_argument("build_confusion: label outside [0, k)");
    }
    ++c.at(t, p);
  }
  return c;
}

AcrReport acr(const ConfusionMatrix& c, const LabelHierarchy& h) {
  if (c.k != h.fine_count()) {
    throw std::invalid_argument("acr: matrix size differs from hierarchy fine count");
  }
  AcrReport r;
  std::int64_t intra_sum = 0;
  std::int64_t inter_sum = 0;
  for (int i = 0; i < c.k; ++i) {
    for (int j = 0; j < c.k; ++j) {
      if (i == j) {
        continue;  // correct predictions are not confusion
      }
      if (h.same_coarse(i, j)) {
        intra_sum += c.at(i, j);
        ++r.n_intra_pairs;
      } else {
        inter_sum += c.at(i, j);
        ++r.n_inter_pairs;
      }
    }
  }
  if (r.n_intra_pairs == 0 || r.n_inter_pairs == 0) {
    throw StructureError(
        r.n_intra_pairs == 0
            ? "acr: hierarchy has no intra-coarse pairs (every coarse class is a singleton)"
            : "acr: hierarchy has no inter-coarse pairs (single coarse class)");
  }
  r.intra_avg = static_cast<double>(intra_sum) / static_cast<double>(r.n_intra_pairs);
  r.inter_avg = static_cast<double>(inter_sum) / static_cast<double>(r.n_inter_pairs);
  if (r.intra_avg == 0.0) {
    throw DegenerateConfusion("acr: no intra-coarse confusion; ratio undefined");
  }
  r.acr = r.inter_avg / r.intra_avg;
  return r;
}

double coarse_accuracy(std::span<const int> true_fine, std::span<const int> pred_fine,
                       const LabelHierarchy& h) {
  if (true_fine.size() != pred_fine.size()) {
    throw std::invalid_argument("coarse_accuracy: label sequences differ in length");
  }
  if (true_fine.empty()) {
    throw std::invalid_argument("coarse_accuracy: empty label sequences");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < true_fine.size(); ++i) {
    if (h.coarse_of(true_fine[i]) == h.coarse_of(pred_fine[i])) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(true_fine.size());
}

double fine_accuracy(std::span<const int> true_labels, std::span<const int> pred_labels) {
  if (true_labels.size() != pred_labels.size()) {
    throw std::invalid_argument("fine_accuracy: label sequences differ in length");
  }
  if (true_labels.empty()) {
    throw std::invalid_argument("fine_accuracy: empty label sequences");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    if (true_labels[i] == pred_labels[i]) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(true_labels.size());
}

double delta_a(double a_fc, double a_cc) { return a_fc - a_cc; }

void save_confusion_csv(const ConfusionMatrix& c, std::ostream& out,
                        const std::vector<std::string>* fine_names) {
  if (fine_names != nullptr) {
    if (fine_names->size() != static_cast<std::size_t>(c.k)) {
      throw std::invalid_argument("save_confusion_csv: name count differs from k");
    }
    for (int j = 0; j < c.k; ++j) {
      out << (j ? "," : "") << (*fine_names)[j];
    }
    out << '\n';
  }
  for (int i = 0; i < c.k; ++i) {
    for (int j = 0; j < c.k; ++j) {
      out << (j ? "," : "") << c.at(i, j);
    }
    out << '\n';
  }
}

}  // namespace grain
