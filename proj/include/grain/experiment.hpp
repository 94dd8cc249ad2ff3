#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grain/data.hpp"
#include "grain/hierarchy.hpp"
#include "grain/metrics.hpp"
#include "grain/trainer.hpp"

namespace grain {

// Whether an ACR value exists for a result, and why not when it doesn't.
// Folding the typed metric errors into a value lets sweeps carry degenerate
// entries instead of aborting.
enum class AcrStatus { defined, degenerate_confusion, structure_error };

struct AcrOutcome {
  AcrStatus status = AcrStatus::defined;
  AcrReport report;    // meaningful only when defined()
  std::string reason;  // diagnostic text otherwise

  bool defined() const { return status == AcrStatus::defined; }
};

// Runs metrics::acr, capturing DegenerateConfusion / StructureError.
AcrOutcome compute_acr_outcome(const ConfusionMatrix& c, const LabelHierarchy& h);

// Everything needed to reproduce a pair run bit-exactly, plus dataset
// sidecar manifests for auditing. Contains no timestamps or paths.
struct PairProvenance {
  std::string hierarchy_ref;
  std::string train_manifest;  // dataset sidecar JSON text
  std::string test_manifest;
  ModelConfig fine_model, coarse_model;
  TrainConfig fine_train, coarse_train;
  std::uint64_t master_seed = 0;
  std::uint64_t init_seed = 0;
};

// One fine-vs-coarse comparison under matched conditions. Accuracy field
// names read train-label-then-eval-level: a_fc_* is the fine-trained model
// evaluated at the coarse level, a_cc_* the coarse-trained model.
struct PairResult {
  double a_cc_train = 0.0, a_cc_test = 0.0;
  double a_fc_train = 0.0, a_fc_test = 0.0;
  double delta_a_test = 0.0;  // a_fc_test - a_cc_test, exact
  AcrOutcome acr;             // from the fine model's test-set confusion
  ConfusionMatrix confusion;  // fine-trained predictions on the test set
  TrainingCurves curves_fine, curves_coarse;
  PairProvenance provenance;
};

// The trained models behind a pair result, for callers that want to
// checkpoint them; results themselves stay model-free.
struct PairModels {
  Model fine, coarse;
};

// Trains the fine arm (num_classes = fine count) and the coarse arm
// (num_classes = coarse count, labels mapped through h) from matched
// streams: both share the initialization seed derive_seed(master, "init")
// and the training seed derive_seed(master, "train"), so the comparison
// differs only in labels and output width. mc's input_dim / num_classes are
// overridden per arm.
PairResult run_granularity_pair(const Dataset& train_ds, const Dataset& test_ds,
                                const LabelHierarchy& h, const ModelConfig& mc,
                                const TrainConfig& tc, std::uint64_t master_seed,
                                PairModels* models = nullptr);

enum class SweepKind { fraction, noise, partition, coarse_count };
std::string_view sweep_kind_name(SweepKind kind);

struct SweepEntry {
  double param = 0.0;  // swept value; entry index for labeled sweeps
  std::string label;   // e.g. "fraction=0.4", "(3)", "coarse=5"
  PairResult pair;
};

struct SweepResult {
  SweepKind kind = SweepKind::fraction;
  std::vector<SweepEntry> entries;
};

// Epoch budget for a data-fraction entry: ceil(base_epochs / fraction), so
// a 20% subset trains for 5x the base epochs.
int scaled_epochs(int base_epochs, double fraction);

// Fractions must be ascending in (0, 1]. Each entry stratified-subsamples
// the training split (seed derive_seed(entry_master, "subsample")), scales
// the epoch budget, and runs a pair under the entry's own master seed
// derive_seed(master, "fraction[i]").
SweepResult sweep_data_fraction(const Dataset& train_ds, const Dataset& test_ds,
                                const LabelHierarchy& h,
                                const std::vector<double>& fractions,
                                const ModelConfig& mc, const TrainConfig& tc,
                                std::uint64_t master_seed, int jobs = 1);

// Factors must be ascending in [0, 1]. Noise (seed derive_seed(master,
// "noise"), shared so factor levels flip nested row sets) touches the
// training labels only. All entries share the master seed's init/train
// streams, and the coarse arm — whose labels noise provably never changes —
// is trained once and reused.
SweepResult sweep_noise(const Dataset& train_ds, const Dataset& test_ds,
                        const LabelHierarchy& h, const std::vector<double>& factors,
                        const ModelConfig& mc, const TrainConfig& tc,
                        std::uint64_t master_seed, int jobs = 1);

struct NamedPartition {
  std::string label;
  std::vector<std::string> coarse_names;
  PartitionAssignment assignment;
};

// One entry per assignment, rerun under the repartitioned hierarchy; fine
// labels and features are identical across entries, and all entries share
// the master seed's streams, so fine-arm weights come out identical and
// only the grouping varies.
SweepResult sweep_partitions(const Dataset& train_ds, const Dataset& test_ds,
                             const LabelHierarchy& base_h,
                             const std::vector<NamedPartition>& assignments,
                             const ModelConfig& mc, const TrainConfig& tc,
                             std::uint64_t master_seed, int jobs = 1);

// One entry per coarse-id subset: the hierarchy is restricted, both datasets
// filtered through the remap (whole fine classes kept or dropped, so class
// balance survives), and a pair run under derive_seed(master,
// "coarse_count[i]"). Entry labels are "coarse=<size>".
SweepResult sweep_coarse_count(const Dataset& train_ds, const Dataset& test_ds,
                               const LabelHierarchy& h,
                               const std::vector<std::vector<int>>& subsets,
                               const ModelConfig& mc, const TrainConfig& tc,
                               std::uint64_t master_seed, int jobs = 1);

struct CapacityEntry {
  std::string label;        // e.g. "coarse/extra-layer"
  bool fine_labels = false; // trained at fine granularity
  bool extra_layer = false;
  double dropout_rate = 0.0;
  std::size_t parameter_count = 0;
  double train_accuracy = 0.0;  // coarse-evaluated
  double test_accuracy = 0.0;   // coarse-evaluated
  double delta_train = 0.0;     // vs the coarse baseline entry
  double delta_test = 0.0;
};

struct CapacityReport {
  std::vector<CapacityEntry> entries;  // entry 0 is the coarse baseline
};

// Capacity/dropout controls: four coarse-label runs {baseline, extra layer,
// dropout, extra layer + dropout} and two fine-label runs {baseline,
// dropout}, all sharing the master seed's init/train streams, with deltas
// against the coarse baseline. mc's extra_layer/dropout_rate fields are
// overridden per entry; control_dropout is the rate the dropout entries use.
CapacityReport run_capacity_controls(const Dataset& train_ds, const Dataset& test_ds,
                                     const LabelHierarchy& h, const ModelConfig& mc,
                                     const TrainConfig& tc, std::uint64_t master_seed,
                                     double control_dropout = 0.3);

// Spearman rank correlation with average ranks on ties. Throws
// std::invalid_argument on length mismatch, fewer than 2 points, or a
// constant series (ranks carry no order).
double spearman(std::span<const double> x, std::span<const double> y);

// Correlation between acr and delta_a_test over the results whose ACR is
// defined; throws std::invalid_argument when fewer than 3 qualify.
double correlate_acr_delta(const std::vector<PairResult>& results);

// ---- persistence ----
// All serializers emit ordered keys and contain no timestamps, so equal
// values produce byte-identical files.

std::string pair_result_json(const PairResult& r);
std::string sweep_index_json(const SweepResult& s,
                             const std::vector<std::string>& entry_files);
std::string capacity_report_json(const CapacityReport& r);
std::string acr_outcome_json(const AcrOutcome& o);

// Fields of a persisted pair result needed by reports.
struct PairSummary {
  std::string label;  // file stem
  bool acr_defined = false;
  double acr = 0.0;
  double delta_a_test = 0.0;
};
// Parses a pair-result file; returns false (untouched out) when the file is
// not a pair result (wrong or missing format marker).
bool read_pair_summary_file(const std::filesystem::path& path, PairSummary& out);

// Partition text format: one line per assignment, comma-separated coarse
// ids in fine-id order; blank lines skipped. Assignments are labeled
// "(1)", "(2)", ... by position and coarse classes named "g0", "g1", ...
std::vector<NamedPartition> load_partitions(std::istream& in, const LabelHierarchy& h);
std::vector<NamedPartition> load_partitions_file(const std::filesystem::path& path,
                                                 const LabelHierarchy& h);

// Subset file: one line per subset, comma-separated coarse ids.
std::vector<std::vector<int>> load_subsets(std::istream& in, const LabelHierarchy& h);
std::vector<std::vector<int>> load_subsets_file(const std::filesystem::path& path,
                                                const LabelHierarchy& h);

}  // namespace grain
