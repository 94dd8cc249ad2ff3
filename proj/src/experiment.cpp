#include "grain/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "grain/errors.hpp"
#include "grain/numeric.hpp"
#include "grain/serialize.hpp"

namespace grain {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Runs fn(0..n-1) across up to `jobs` threads. Entries must be independent;
// the first exception, if any, is rethrown after all workers finish.
void run_indexed(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::min(std::max(jobs, 1), std::max(n, 1));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) {
          return;
        }
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

// One trained arm of a comparison; accuracies are the final-epoch curve
// values, so the stored numbers and the curves can never disagree.
struct ArmResult {
  Model model;
  TrainingCurves curves;
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::vector<int> test_preds;  // model-space predictions on the test set
};

ArmResult run_arm(const Dataset& train_ds, const Dataset& test_ds,
                  const LabelHierarchy& arm_h, ModelConfig mc, const TrainConfig& tc,
                  std::uint64_t init_seed) {
  mc.input_dim = static_cast<int>(train_ds.dim());
  mc.num_classes = arm_h.fine_count();
  TrainResult tr = train(init_model(mc, init_seed), train_ds, test_ds, arm_h, tc);
  ArmResult arm;
  arm.test_preds = predict(tr.model, test_ds.features);
  arm.train_acc = tr.curves.train_accuracy.back();
  arm.test_acc = tr.curves.test_accuracy_coarse.back();
  arm.model = std::move(tr.model);
  arm.curves = std::move(tr.curves);
  return arm;
}

PairResult assemble_pair(ArmResult fine, ArmResult coarse, const Dataset& train_used,
                         const Dataset& test_ds, const LabelHierarchy& h,
                         const TrainConfig& tc_run, std::uint64_t master_seed,
                         std::uint64_t init_seed) {
  PairResult r;
  r.a_fc_train = fine.train_acc;
  r.a_fc_test = fine.test_acc;
  r.a_cc_train = coarse.train_acc;
  r.a_cc_test = coarse.test_acc;
  r.delta_a_test = delta_a(r.a_fc_test, r.a_cc_test);
  r.confusion = build_confusion(test_ds.fine_labels, fine.test_preds, h.fine_count());
  r.acr = compute_acr_outcome(r.confusion, h);
  r.provenance.hierarchy_ref = train_used.hierarchy_ref;
  r.provenance.train_manifest = dataset_manifest_json(train_used, h);
  r.provenance.test_manifest = dataset_manifest_json(test_ds, h);
  r.provenance.fine_model = fine.model.config;
  r.provenance.coarse_model = coarse.model.config;
  r.provenance.fine_train = tc_run;
  r.provenance.coarse_train = tc_run;
  r.provenance.master_seed = master_seed;
  r.provenance.init_seed = init_seed;
  r.curves_fine = std::move(fine.curves);
  r.curves_coarse = std::move(coarse.curves);
  return r;
}

}  // namespace

AcrOutcome compute_acr_outcome(const ConfusionMatrix& c, const LabelHierarchy& h) {
  AcrOutcome o;
  try {
    o.report = acr(c, h);
  } catch (const DegenerateConfusion&) {
    o.status = AcrStatus::degenerate_confusion;
    o.reason = "zero intra-class confusion";
  } catch (const StructureError& e) {
    o.status = AcrStatus::structure_error;
    o.reason = e.what();
  }
  return o;
}

PairResult run_granularity_pair(const Dataset& train_ds, const Dataset& test_ds,
                                const LabelHierarchy& h, const ModelConfig& mc,
                                const TrainConfig& tc, std::uint64_t master_seed,
                                PairModels* models) {
  if (train_ds.dim() != test_ds.dim()) {
    throw Error("granularity pair: train/test dimensionality differs");
  }
  const std::uint64_t init_seed = derive_seed(master_seed, "init");
  TrainConfig tc_run = tc;
  tc_run.seed = derive_seed(master_seed, "train");

  ArmResult fine = run_arm(train_ds, test_ds, h, mc, tc_run, init_seed);

  const LabelHierarchy hc = coarse_identity(h);
  const Dataset coarse_train = map_to_coarse(train_ds, h);
  const Dataset coarse_test = map_to_coarse(test_ds, h);
  ArmResult coarse = run_arm(coarse_train, coarse_test, hc, mc, tc_run, init_seed);

  if (models != nullptr) {
    models->fine = fine.model;
    models->coarse = coarse.model;
  }
  return assemble_pair(std::move(fine), std::move(coarse), train_ds, test_ds, h,
                       tc_run, master_seed, init_seed);
}

std::string_view sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::fraction:
      return "fraction";
    case SweepKind::noise:
      return "noise";
    case SweepKind::partition:
      return "partition";
    case SweepKind::coarse_count:
      return "coarse-count";
  }
  throw std::invalid_argument("sweep_kind_name: unknown kind");
}

int scaled_epochs(int base_epochs, double fraction) {
  if (base_epochs <= 0) {
    throw Error("scaled_epochs: base epochs must be positive");
  }
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error("scaled_epochs: fraction must be in (0, 1]");
  }
  return static_cast<int>(ceil_slack(static_cast<double>(base_epochs) / fraction));
}

SweepResult sweep_data_fraction(const Dataset& train_ds, const Dataset& test_ds,
                                const LabelHierarchy& h,
                                const std::vector<double>& fractions,
                                const ModelConfig& mc, const TrainConfig& tc,
                                std::uint64_t master_seed, int jobs) {
  if (fractions.empty()) {
    throw Error("fraction sweep: no fractions given");
  }
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0) || fractions[i] > 1.0) {
      throw Error("fraction sweep: fractions must lie in (0, 1]");
    }
    if (i > 0 && fractions[i] <= fractions[i - 1]) {
      throw Error("fraction sweep: fractions must be strictly ascending");
    }
  }
  SweepResult s;
  s.kind = SweepKind::fraction;
  s.entries.resize(fractions.size());
  run_indexed(static_cast<int>(fractions.size()), jobs, [&](int i) {
    const double fraction = fractions[i];
    const std::uint64_t entry_master =
        derive_seed(master_seed, "fraction[" + std::to_string(i) + "]");
    const Dataset sub = stratified_subsample(
        train_ds, fraction, derive_seed(entry_master, "subsample"));
    TrainConfig entry_tc = tc;
    entry_tc.epochs = scaled_epochs(tc.epochs, fraction);
    s.entries[i].param = fraction;
    s.entries[i].label = "fraction=" + fmt_double(fraction);
    s.entries[i].pair =
        run_granularity_pair(sub, test_ds, h, mc, entry_tc, entry_master);
  });
  return s;
}

SweepResult sweep_noise(const Dataset& train_ds, const Dataset& test_ds,
                        const LabelHierarchy& h, const std::vector<double>& factors,
                        const ModelConfig& mc, const TrainConfig& tc,
                        std::uint64_t master_seed, int jobs) {
  if (factors.empty()) {
    throw Error("noise sweep: no factors given");
  }
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i] < 0.0 || factors[i] > 1.0) {
      throw Error("noise sweep: factors must lie in [0, 1]");
    }
    if (i > 0 && factors[i] <= factors[i - 1]) {
      throw Error("noise sweep: factors must be strictly ascending");
    }
  }
  const std::uint64_t init_seed = derive_seed(master_seed, "init");
  const std::uint64_t noise_seed = derive_seed(master_seed, "noise");
  TrainConfig tc_run = tc;
  tc_run.seed = derive_seed(master_seed, "train");

  // Noise never alters coarse labels, so the coarse arm is the same training
  // problem at every factor; train it once and share the result.
  const LabelHierarchy hc = coarse_identity(h);
  const Dataset coarse_train = map_to_coarse(train_ds, h);
  const Dataset coarse_test = map_to_coarse(test_ds, h);
  const ArmResult coarse = run_arm(coarse_train, coarse_test, hc, mc, tc_run, init_seed);

  SweepResult s;
  s.kind = SweepKind::noise;
  s.entries.resize(factors.size());
  run_indexed(static_cast<int>(factors.size()), jobs, [&](int i) {
    const double factor = factors[i];
    Dataset noisy = inject_label_noise(train_ds, h, {factor, noise_seed});
    ArmResult fine = run_arm(noisy, test_ds, h, mc, tc_run, init_seed);
    s.entries[i].param = factor;
    s.entries[i].label = "factor=" + fmt_double(factor);
    s.entries[i].pair = assemble_pair(std::move(fine), coarse, noisy, test_ds, h,
                                      tc_run, master_seed, init_seed);
  });
  return s;
}

SweepResult sweep_partitions(const Dataset& train_ds, const Dataset& test_ds,
                             const LabelHierarchy& base_h,
                             const std::vector<NamedPartition>& assignments,
                             const ModelConfig& mc, const TrainConfig& tc,
                             std::uint64_t master_seed, int jobs) {
  if (assignments.empty()) {
    throw Error("partition sweep: no assignments given");
  }
  SweepResult s;
  s.kind = SweepKind::partition;
  s.entries.resize(assignments.size());
  run_indexed(static_cast<int>(assignments.size()), jobs, [&](int i) {
    const NamedPartition& p = assignments[i];
    const LabelHierarchy h_i = repartition(base_h, p.assignment, p.coarse_names);
    // All entries share the master streams: identical fine labels mean the
    // fine arm's weights are bit-identical across entries.
    PairResult pair = run_granularity_pair(train_ds, test_ds, h_i, mc, tc, master_seed);
    pair.provenance.hierarchy_ref += "#" + p.label;
    s.entries[i].param = static_cast<double>(i + 1);
    s.entries[i].label = p.label;
    s.entries[i].pair = std::move(pair);
  });
  return s;
}

SweepResult sweep_coarse_count(const Dataset& train_ds, const Dataset& test_ds,
                               const LabelHierarchy& h,
                               const std::vector<std::vector<int>>& subsets,
                               const ModelConfig& mc, const TrainConfig& tc,
                               std::uint64_t master_seed, int jobs) {
  if (subsets.empty()) {
    throw Error("coarse-count sweep: no subsets given");
  }
  SweepResult s;
  s.kind = SweepKind::coarse_count;
  s.entries.resize(subsets.size());
  run_indexed(static_cast<int>(subsets.size()), jobs, [&](int i) {
    const CoarseRestriction r = restrict_coarse(h, subsets[i]);
    Dataset sub_train = apply_fine_remap(train_ds, r.fine_remap);
    Dataset sub_test = apply_fine_remap(test_ds, r.fine_remap);
    const std::string suffix = "#coarse=" + std::to_string(r.hierarchy.coarse_count());
    sub_train.hierarchy_ref += suffix;
    sub_test.hierarchy_ref += suffix;
    const std::uint64_t entry_master =
        derive_seed(master_seed, "coarse_count[" + std::to_string(i) + "]");
    s.entries[i].param = static_cast<double>(r.hierarchy.coarse_count());
    s.entries[i].label = "coarse=" + std::to_string(r.hierarchy.coarse_count());
    s.entries[i].pair = run_granularity_pair(sub_train, sub_test, r.hierarchy, mc,
                                             tc, entry_master);
  });
  return s;
}

CapacityReport run_capacity_controls(const Dataset& train_ds, const Dataset& test_ds,
                                     const LabelHierarchy& h, const ModelConfig& mc,
                                     const TrainConfig& tc, std::uint64_t master_seed,
                                     double control_dropout) {
  if (!(control_dropout > 0.0) || control_dropout >= 1.0) {
    throw Error("capacity controls: control_dropout must be in (0, 1)");
  }
  const std::uint64_t init_seed = derive_seed(master_seed, "init");
  TrainConfig tc_run = tc;
  tc_run.seed = derive_seed(master_seed, "train");

  const LabelHierarchy hc = coarse_identity(h);
  const Dataset coarse_train = map_to_coarse(train_ds, h);
  const Dataset coarse_test = map_to_coarse(test_ds, h);

  struct ControlSpec {
    const char* label;
    bool fine;
    bool extra;
    bool dropout;
  };
  const ControlSpec specs[] = {
      {"coarse/baseline", false, false, false},
      {"coarse/extra-layer", false, true, false},
      {"coarse/dropout", false, false, true},
      {"coarse/extra-layer+dropout", false, true, true},
      {"fine/baseline", true, false, false},
      {"fine/dropout", true, false, true},
  };

  CapacityReport report;
  for (const ControlSpec& spec : specs) {
    ModelConfig entry_mc = mc;
    entry_mc.extra_layer = spec.extra;
    entry_mc.dropout_rate = spec.dropout ? control_dropout : 0.0;
    const ArmResult arm =
        spec.fine ? run_arm(train_ds, test_ds, h, entry_mc, tc_run, init_seed)
                  : run_arm(coarse_train, coarse_test, hc, entry_mc, tc_run, init_seed);
    CapacityEntry e;
    e.label = spec.label;
    e.fine_labels = spec.fine;
    e.extra_layer = spec.extra;
    e.dropout_rate = entry_mc.dropout_rate;
    e.parameter_count = arm.model.parameter_count();
    e.train_accuracy = arm.train_acc;
    e.test_accuracy = arm.test_acc;
    report.entries.push_back(std::move(e));
  }
  const CapacityEntry& baseline = report.entries.front();
  for (CapacityEntry& e : report.entries) {
    e.delta_train = e.train_accuracy - baseline.train_accuracy;
    e.delta_test = e.test_accuracy - baseline.test_accuracy;
  }
  return report;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) {
      ++j;
    }
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      ranks[idx[t]] = avg;
    }
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("spearman: series differ in length");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("spearman: need at least 2 points");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("spearman: constant series has no rank order");
  }
  return sxy / std::sqrt(sxx * syy);
}

double correlate_acr_delta(const std::vector<PairResult>& results) {
  std::vector<double> acrs, deltas;
  for (const PairResult& r : results) {
    if (r.acr.defined()) {
      acrs.push_back(r.acr.report.acr);
      deltas.push_back(r.delta_a_test);
    }
  }
  if (acrs.size() < 3) {
    throw std::invalid_argument(
        "correlate_acr_delta: fewer than 3 results with a defined ACR");
  }
  return spearman(acrs, deltas);
}

std::string acr_outcome_json(const AcrOutcome& o) {
  nlohmann::ordered_json j;
  if (o.defined()) {
    j["acr"] = o.report.acr;
    j["inter_avg"] = o.report.inter_avg;
    j["intra_avg"] = o.report.intra_avg;
    j["n_inter_pairs"] = o.report.n_inter_pairs;
    j["n_intra_pairs"] = o.report.n_intra_pairs;
  } else {
    j["acr"] = "undefined";
    j["reason"] = o.reason;
  }
  return j.dump(2) + "\n";
}

namespace {

nlohmann::ordered_json acr_outcome_to_json(const AcrOutcome& o) {
  return nlohmann::ordered_json::parse(acr_outcome_json(o));
}

nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& c) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < c.k; ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int j = 0; j < c.k; ++j) {
      row.push_back(c.at(i, j));
    }
    rows.push_back(std::move(row));
  }
  return {{"k", c.k}, {"counts", std::move(rows)}};
}

}  // namespace

std::string pair_result_json(const PairResult& r) {
  nlohmann::ordered_json j;
  j["format"] = "labelgrain-pair-v1";
  j["a_cc_train"] = r.a_cc_train;
  j["a_cc_test"] = r.a_cc_test;
  j["a_fc_train"] = r.a_fc_train;
  j["a_fc_test"] = r.a_fc_test;
  j["delta_a_test"] = r.delta_a_test;
  j["acr"] = acr_outcome_to_json(r.acr);
  j["confusion"] = confusion_to_json(r.confusion);
  j["curves_fine"] = curves_to_json(r.curves_fine);
  j["curves_coarse"] = curves_to_json(r.curves_coarse);
  nlohmann::ordered_json prov;
  prov["hierarchy"] = r.provenance.hierarchy_ref;
  prov["train_dataset"] = nlohmann::ordered_json::parse(r.provenance.train_manifest);
  prov["test_dataset"] = nlohmann::ordered_json::parse(r.provenance.test_manifest);
  prov["fine_model_config"] = model_config_to_json(r.provenance.fine_model);
  prov["coarse_model_config"] = model_config_to_json(r.provenance.coarse_model);
  prov["fine_train_config"] = train_config_to_json(r.provenance.fine_train);
  prov["coarse_train_config"] = train_config_to_json(r.provenance.coarse_train);
  prov["master_seed"] = r.provenance.master_seed;
  prov["init_seed"] = r.provenance.init_seed;
  j["provenance"] = std::move(prov);
  return j.dump(2) + "\n";
}

std::string sweep_index_json(const SweepResult& s,
                             const std::vector<std::string>& entry_files) {
  if (entry_files.size() != s.entries.size()) {
    throw std::invalid_argument("sweep index: file list length differs from entries");
  }
  nlohmann::ordered_json j;
  j["format"] = "labelgrain-sweep-v1";
  j["kind"] = std::string(sweep_kind_name(s.kind));
  j["entries"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    j["entries"].push_back({{"param", s.entries[i].param},
                            {"label", s.entries[i].label},
                            {"file", entry_files[i]}});
  }
  return j.dump(2) + "\n";
}

std::string capacity_report_json(const CapacityReport& r) {
  nlohmann::ordered_json j;
  j["format"] = "labelgrain-capacity-v1";
  j["baseline"] = r.entries.empty() ? "" : r.entries.front().label;
  j["entries"] = nlohmann::ordered_json::array();
  for (const CapacityEntry& e : r.entries) {
    j["entries"].push_back({{"label", e.label},
                            {"granularity", e.fine_labels ? "fine" : "coarse"},
                            {"extra_layer", e.extra_layer},
                            {"dropout_rate", e.dropout_rate},
                            {"parameter_count", e.parameter_count},
                            {"train_accuracy", e.train_accuracy},
                            {"test_accuracy", e.test_accuracy},
                            {"delta_train", e.delta_train},
                            {"delta_test", e.delta_test}});
  }
  return j.dump(2) + "\n";
}

bool read_pair_summary_file(const std::filesystem::path& path, PairSummary& out) {
  std::ifstream in(path);
  if (!in) {
    throw Error("pair summary: cannot open '" + path.string() + "'");
  }
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  if (!j.is_object() || j.value("format", "") != "labelgrain-pair-v1") {
    return false;
  }
  PairSummary s;
  s.label = path.stem().string();
  s.delta_a_test = j.at("delta_a_test").get<double>();
  const auto& acr_node = j.at("acr").at("acr");
  if (acr_node.is_number()) {
    s.acr_defined = true;
    s.acr = acr_node.get<double>();
  }
  out = std::move(s);
  return true;
}

namespace {

std::vector<std::vector<int>> parse_id_lines(std::istream& in, const char* what) {
  std::vector<std::vector<int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      continue;
    }
    std::vector<int> ids;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const std::size_t first = cell.find_first_not_of(" \t");
      const std::size_t last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) {
        throw Error(std::string(what) + ": empty cell at line " + std::to_string(line_no));
      }
      int v;
      const char* begin = cell.data() + first;
      const char* end = cell.data() + last + 1;
      const auto res = std::from_chars(begin, end, v);
      if (res.ec != std::errc() || res.ptr != end || v < 0) {
        throw Error(std::string(what) + ": bad id '" + cell.substr(first, last - first + 1) +
                    "' at line " + std::to_string(line_no));
      }
      ids.push_back(v);
    }
    rows.push_back(std::move(ids));
  }
  return rows;
}

}  // namespace

std::vector<NamedPartition> load_partitions(std::istream& in, const LabelHierarchy& h) {
  const auto rows = parse_id_lines(in, "partition file");
  if (rows.empty()) {
    throw Error("partition file: no assignments");
  }
  std::vector<NamedPartition> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& ids = rows[r];
    if (ids.size() != static_cast<std::size_t>(h.fine_count())) {
      throw Error("partition file: assignment " + std::to_string(r + 1) + " has " +
                  std::to_string(ids.size()) + " entries, hierarchy has " +
                  std::to_string(h.fine_count()) + " fine classes");
    }
    const int max_id = *std::max_element(ids.begin(), ids.end());
    std::vector<bool> seen(max_id + 1, false);
    for (int id : ids) {
      seen[id] = true;
    }
    for (int c = 0; c <= max_id; ++c) {
      if (!seen[c]) {
        throw Error("partition file: assignment " + std::to_string(r + 1) +
                    " never uses coarse id " + std::to_string(c));
      }
    }
    NamedPartition p;
    p.label = "(" + std::to_string(r + 1) + ")";
    for (int c = 0; c <= max_id; ++c) {
      p.coarse_names.push_back("g" + std::to_string(c));
    }
    p.assignment.coarse_of_fine = ids;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<NamedPartition> load_partitions_file(const std::filesystem::path& path,
                                                 const LabelHierarchy& h) {
  std::ifstream in(path);
  if (!in) {
    throw Error("partition file: cannot open '" + path.string() + "'");
  }
  return load_partitions(in, h);
}

std::vector<std::vector<int>> load_subsets(std::istream& in, const LabelHierarchy& h) {
  const auto rows = parse_id_lines(in, "subset file");
  if (rows.empty()) {
    throw Error("subset file: no subsets");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<bool> seen(h.coarse_count(), false);
    for (int id : rows[r]) {
      if (id >= h.coarse_count()) {
        throw Error("subset file: coarse id " + std::to_string(id) + " at line " +
                    std::to_string(r + 1) + " outside [0, " +
                    std::to_string(h.coarse_count()) + ")");
      }
      if (seen[id]) {
        throw Error("subset file: duplicate coarse id " + std::to_string(id) +
                    " at line " + std::to_string(r + 1));
      }
      seen[id] = true;
    }
  }
  return rows;
}

std::vector<std::vector<int>> load_subsets_file(const std::filesystem::path& path,
                                                const LabelHierarchy& h) {
  std::ifstream in(path);
  if (!in) {
    throw Error("subset file: cannot open '" + path.string() + "'");
  }
  return load_subsets(in, h);
}

}  // namespace grain
