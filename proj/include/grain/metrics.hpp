#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grain/errors.hpp"
#include "grain/hierarchy.hpp"

namespace grain {

// Square matrix of prediction counts over fine classes: rows index the true
// class, columns the predicted one.
struct ConfusionMatrix {
  int k = 0;
  std::vector<std::int64_t> counts;  // row-major k x k

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes)
      : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

  std::int64_t& at(int true_c, int pred_c) {
    return counts[static_cast<std::size_t>(true_c) * k + pred_c];
  }
  std::int64_t at(int true_c, int pred_c) const {
    return counts[static_cast<std::size_t>(true_c) * k + pred_c];
  }
  std::int64_t total() const;
};

// Counts (true, predicted) pairs into a k x k matrix. Throws
// std::invalid_argument on length mismatch or labels outside [0, k).
ConfusionMatrix build_confusion(std::span<const int> true_fine,
                                std::span<const int> pred_fine, int k);

// Average confusion ratio decomposition. Only off-diagonal entries count as
// confusion: the diagonal holds correct predictions and contributes to
// neither average. intra pairs are ordered (i, j), i != j, with i and j in
// the same coarse class; inter pairs are the ordered pairs crossing coarse
// classes. The pair counts always sum to k*(k-1).
struct AcrReport {
  double acr = 0.0;        // inter_avg / intra_avg
  double inter_avg = 0.0;  // mean confusion count over inter pairs
  double intra_avg = 0.0;  // mean confusion count over intra pairs
  std::int64_t n_inter_pairs = 0;
  std::int64_t n_intra_pairs = 0;
};

// Computes the average confusion ratio of a fine-class confusion matrix
// under a hierarchy. Values below 1 mean confusion concentrates inside
// coarse classes. Throws StructureError when the hierarchy yields no intra
// or no inter pairs (the ratio is structurally meaningless), and
// DegenerateConfusion when intra confusion is zero (division by zero).
AcrReport acr(const ConfusionMatrix& c, const LabelHierarchy& h);

// Fraction of positions where the two fine labels agree after mapping both
// through the hierarchy to coarse labels.
double coarse_accuracy(std::span<const int> true_fine, std::span<const int> pred_fine,
                       const LabelHierarchy& h);

// Exact-match fraction of two label sequences.
double fine_accuracy(std::span<const int> true_labels, std::span<const int> pred_labels);

// Headline comparison: fine-trained minus coarse-trained accuracy, both
// evaluated at the coarse level.
double delta_a(double a_fc, double a_cc);

// k rows of comma-separated counts; when names are given, a header row too.
void save_confusion_csv(const ConfusionMatrix& c, std::ostream& out,
                        const std::vector<std::string>* fine_names = nullptr);

}  // namespace grain
