// labelgrain: fine-vs-coarse label-granularity experiments on synthetic
// hierarchical data.
//
// Subcommands: gen-data, pair, sweep, acr, report. All randomness flows
// from the --seed flag of each command; files carry no timestamps or
// absolute paths, so identical invocations produce byte-identical outputs.
// Exit codes: 0 success, 1 runtime/data error, 2 usage error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grain/data.hpp"
#include "grain/errors.hpp"
#include "grain/experiment.hpp"
#include "grain/hierarchy.hpp"
#include "grain/metrics.hpp"
#include "grain/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// ---- small helpers ----------------------------------------------------

// Writes via a temp file in the same directory and renames it into place,
// so readers never observe a half-written file.
void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw grain::Error("cannot open '" + tmp.string() + "' for writing");
    }
    out << content;
    if (!out) {
      throw grain::Error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

std::string fmt4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fmt_shortest(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream cells(text);
  std::string cell;
  while (std::getline(cells, cell, ',')) {
    const std::size_t first = cell.find_first_not_of(" \t");
    const std::size_t last = cell.find_last_not_of(" \t");
    if (first == std::string::npos) {
      throw grain::Error(std::string(flag) + ": empty value in list '" + text + "'");
    }
    double v;
    const char* begin = cell.data() + first;
    const char* end = cell.data() + last + 1;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw grain::Error(std::string(flag) + ": bad number '" +
                         cell.substr(first, last - first + 1) + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) {
    throw grain::Error(std::string(flag) + ": empty list");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  if (text.empty()) {
    return out;
  }
  for (double v : parse_double_list(text, flag)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw grain::Error(std::string(flag) + ": expected integers");
    }
    out.push_back(i);
  }
  return out;
}

struct LoadedHierarchy {
  grain::LabelHierarchy h;
  std::string ref;  // file stem; goes into manifests instead of the path
};

LoadedHierarchy load_hierarchy_flag(const fs::path& path) {
  return {grain::load_hierarchy_file(path), path.stem().string()};
}

grain::Dataset load_dataset_flag(const fs::path& path, const LoadedHierarchy& lh) {
  grain::Dataset ds = grain::load_dataset_csv_file(path, lh.h);
  ds.hierarchy_ref = lh.ref;
  return ds;
}

std::string curves_csv_text(const grain::TrainingCurves& c) {
  std::ostringstream out;
  grain::save_curves_csv(c, out);
  return out.str();
}

std::string confusion_csv_text(const grain::ConfusionMatrix& c,
                               const std::vector<std::string>& names) {
  std::ostringstream out;
  grain::save_confusion_csv(c, out, &names);
  return out.str();
}

std::string dataset_csv_text(const grain::Dataset& ds, const grain::LabelHierarchy& h) {
  std::ostringstream out;
  grain::save_dataset_csv(ds, h, out);
  return out.str();
}

fs::path manifest_path(fs::path csv_path) {
  csv_path.replace_extension(".manifest.json");
  return csv_path;
}

std::string summary_line(const grain::PairResult& r) {
  std::string acr_text = r.acr.defined() ? fmt4(r.acr.report.acr) : "undefined";
  return "A_CC=" + fmt4(r.a_cc_test) + " A_FC=" + fmt4(r.a_fc_test) +
         " dA=" + fmt4(r.delta_a_test) + " ACR=" + acr_text;
}

// ---- shared flag blocks -----------------------------------------------

struct HyperFlags {
  std::string hidden;
  bool extra_layer = false;
  double dropout = 0.0;
  int epochs = 60;
  int batch_size = 32;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int patience = 10;
  double decay_factor = 0.1;
  double min_improvement = 1e-3;

  grain::ModelConfig model_config() const {
    grain::ModelConfig mc;
    mc.hidden_sizes = parse_int_list(hidden, "--hidden");
    mc.extra_layer = extra_layer;
    mc.dropout_rate = dropout;
    return mc;  // input_dim / num_classes are set per arm
  }

  grain::TrainConfig train_config() const {
    grain::TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.base_lr = lr;
    tc.momentum = momentum;
    tc.weight_decay = weight_decay;
    tc.plateau_patience = patience;
    tc.lr_decay_factor = decay_factor;
    tc.min_improvement = min_improvement;
    return tc;  // seed is set per run from the master seed
  }
};

void add_hyper_flags(CLI::App* cmd, HyperFlags& f) {
  cmd->add_option("--hidden", f.hidden,
                  "Comma-separated hidden layer widths (empty: softmax regression)");
  cmd->add_flag("--extra-layer", f.extra_layer, "Append a capacity-control hidden layer");
  cmd->add_option("--dropout", f.dropout, "Dropout rate before the output layer")
      ->check(CLI::Range(0.0, 1.0).description("FLOAT in [0,1)"));
  cmd->add_option("--epochs", f.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", f.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Base learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--momentum", f.momentum, "SGD momentum")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--weight-decay", f.weight_decay, "L2 penalty on weights")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--patience", f.patience, "Epochs without improvement before LR decay")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--decay-factor", f.decay_factor, "LR multiplier on plateau")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--min-improvement", f.min_improvement,
                  "Relative loss improvement that resets the plateau counter")
      ->check(CLI::NonNegativeNumber);
}

// ---- gen-data ---------------------------------------------------------

struct GenDataFlags {
  std::string hierarchy;
  std::string out;
  int n_per_fine = 100;
  int dim = 2;
  double coarse_sep = 4.0;
  double fine_sep = 1.0;
  double sigma = 1.0;
  double test_fraction = 0.0;  // 0 means "no split"
  std::uint64_t seed = 1;
};

int run_gen_data(const GenDataFlags& f) {
  const LoadedHierarchy lh = load_hierarchy_flag(f.hierarchy);
  grain::SyntheticSpec spec{lh.h, f.n_per_fine, f.dim, f.coarse_sep,
                            f.fine_sep, f.sigma, f.seed};
  grain::Dataset ds = grain::generate_synthetic(spec);
  ds.hierarchy_ref = lh.ref;

  const auto emit = [&](const grain::Dataset& part, const fs::path& path) {
    if (path.has_parent_path()) {
      fs::create_directories(path.parent_path());
    }
    write_file_atomic(path, dataset_csv_text(part, lh.h));
    write_file_atomic(manifest_path(path), grain::dataset_manifest_json(part, lh.h, &spec));
    std::cout << "wrote " << path.string() << " (" << part.size() << " rows)\n";
  };

  const fs::path out = f.out;
  if (f.test_fraction > 0.0) {
    const auto [train, test] =
        grain::train_test_split(ds, f.test_fraction, grain::derive_seed(f.seed, "split"));
    fs::path stem = out;
    stem.replace_extension();
    emit(train, stem.string() + "-train.csv");
    emit(test, stem.string() + "-test.csv");
  } else {
    emit(ds, out);
  }
  return kExitOk;
}

// ---- pair -------------------------------------------------------------

struct PairFlags {
  std::string train, test, hierarchy, out_dir;
  HyperFlags hyper;
  std::uint64_t seed = 1;
  bool save_models = false;
};

int run_pair(const PairFlags& f) {
  const LoadedHierarchy lh = load_hierarchy_flag(f.hierarchy);
  const grain::Dataset train_ds = load_dataset_flag(f.train, lh);
  const grain::Dataset test_ds = load_dataset_flag(f.test, lh);

  grain::PairModels models;
  const grain::PairResult result = grain::run_granularity_pair(
      train_ds, test_ds, lh.h, f.hyper.model_config(), f.hyper.train_config(),
      f.seed, f.save_models ? &models : nullptr);

  const fs::path dir = f.out_dir;
  fs::create_directories(dir);
  write_file_atomic(dir / "pair.json", grain::pair_result_json(result));
  write_file_atomic(dir / "curves_fine.csv", curves_csv_text(result.curves_fine));
  write_file_atomic(dir / "curves_coarse.csv", curves_csv_text(result.curves_coarse));
  write_file_atomic(dir / "confusion.csv",
                    confusion_csv_text(result.confusion, lh.h.fine_names()));
  if (f.save_models) {
    const std::uint64_t train_seed = grain::derive_seed(f.seed, "train");
    write_file_atomic(dir / "model_fine.json",
                      grain::checkpoint_json(models.fine, train_seed));
    write_file_atomic(dir / "model_coarse.json",
                      grain::checkpoint_json(models.coarse, train_seed));
  }
  std::cout << summary_line(result) << "\n";
  return kExitOk;
}

// ---- sweep ------------------------------------------------------------

struct SweepFlags {
  std::string kind;
  std::string train, test, hierarchy, out_dir;
  std::string fractions, factors, assignments_file, subsets_file;
  HyperFlags hyper;
  std::uint64_t seed = 1;
  int jobs = 1;
};

std::string sweep_csv_text(const grain::SweepResult& s) {
  std::ostringstream out;
  out << "param,label,a_cc_test,a_fc_test,delta_a_test,acr\n";
  for (const grain::SweepEntry& e : s.entries) {
    out << fmt_shortest(e.param) << ',' << e.label << ','
        << fmt_shortest(e.pair.a_cc_test) << ',' << fmt_shortest(e.pair.a_fc_test)
        << ',' << fmt_shortest(e.pair.delta_a_test) << ',';
    if (e.pair.acr.defined()) {
      out << fmt_shortest(e.pair.acr.report.acr);
    }
    out << '\n';
  }
  return out.str();
}

int run_sweep(const SweepFlags& f) {
  const LoadedHierarchy lh = load_hierarchy_flag(f.hierarchy);
  const grain::Dataset train_ds = load_dataset_flag(f.train, lh);
  const grain::Dataset test_ds = load_dataset_flag(f.test, lh);
  const grain::ModelConfig mc = f.hyper.model_config();
  const grain::TrainConfig tc = f.hyper.train_config();

  grain::SweepResult sweep;
  if (f.kind == "fraction") {
    if (f.fractions.empty()) {
      throw grain::Error("--kind fraction requires --fractions");
    }
    sweep = grain::sweep_data_fraction(train_ds, test_ds, lh.h,
                                       parse_double_list(f.fractions, "--fractions"),
                                       mc, tc, f.seed, f.jobs);
  } else if (f.kind == "noise") {
    if (f.factors.empty()) {
      throw grain::Error("--kind noise requires --factors");
    }
    sweep = grain::sweep_noise(train_ds, test_ds, lh.h,
                               parse_double_list(f.factors, "--factors"),
                               mc, tc, f.seed, f.jobs);
  } else if (f.kind == "partition") {
    if (f.assignments_file.empty()) {
      throw grain::Error("--kind partition requires --assignments-file");
    }
    sweep = grain::sweep_partitions(train_ds, test_ds, lh.h,
                                    grain::load_partitions_file(f.assignments_file, lh.h),
                                    mc, tc, f.seed, f.jobs);
  } else {  // "coarse-count"; CLI11 already rejected anything else
    if (f.subsets_file.empty()) {
      throw grain::Error("--kind coarse-count requires --subsets-file");
    }
    sweep = grain::sweep_coarse_count(train_ds, test_ds, lh.h,
                                      grain::load_subsets_file(f.subsets_file, lh.h),
                                      mc, tc, f.seed, f.jobs);
  }

  const fs::path dir = f.out_dir;
  fs::create_directories(dir);
  std::vector<std::string> entry_files;
  for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "entry-%02zu.json", i);
    entry_files.emplace_back(name);
    write_file_atomic(dir / name, grain::pair_result_json(sweep.entries[i].pair));
  }
  write_file_atomic(dir / "sweep.json", grain::sweep_index_json(sweep, entry_files));
  write_file_atomic(dir / "sweep.csv", sweep_csv_text(sweep));
  for (const grain::SweepEntry& e : sweep.entries) {
    std::cout << e.label << ": " << summary_line(e.pair) << "\n";
  }
  return kExitOk;
}

// ---- acr --------------------------------------------------------------

struct AcrFlags {
  std::string predictions, hierarchy;
};

int run_acr(const AcrFlags& f) {
  const LoadedHierarchy lh = load_hierarchy_flag(f.hierarchy);
  std::ifstream in(f.predictions);
  if (!in) {
    throw grain::Error("cannot open '" + f.predictions + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw grain::Error("prediction log: empty file");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "true_fine,pred_fine") {
    throw grain::Error("prediction log: expected header 'true_fine,pred_fine', got '" +
                       line + "'");
  }
  std::vector<int> truth, preds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw grain::Error("prediction log: expected two cells at line " +
                         std::to_string(line_no));
    }
    truth.push_back(lh.h.fine_id(line.substr(0, comma)));
    preds.push_back(lh.h.fine_id(line.substr(comma + 1)));
  }
  const grain::ConfusionMatrix c = grain::build_confusion(truth, preds, lh.h.fine_count());
  std::cout << grain::acr_outcome_json(grain::compute_acr_outcome(c, lh.h));
  return kExitOk;
}

// ---- report -----------------------------------------------------------

struct ReportFlags {
  std::string results_dir;
};

int run_report(const ReportFlags& f) {
  const fs::path dir = f.results_dir;
  if (!fs::is_directory(dir)) {
    throw grain::Error("'" + dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<grain::PairSummary> rows;
  for (const fs::path& path : files) {
    grain::PairSummary s;
    if (grain::read_pair_summary_file(path, s)) {
      rows.push_back(std::move(s));
    }
  }
  if (rows.empty()) {
    throw grain::Error("no pair results found in '" + dir.string() + "'");
  }

  std::cout << "label,acr,delta_a_test\n";
  std::vector<double> acrs, deltas;
  for (const grain::PairSummary& s : rows) {
    std::cout << s.label << ',';
    if (s.acr_defined) {
      std::cout << fmt_shortest(s.acr);
      acrs.push_back(s.acr);
      deltas.push_back(s.delta_a_test);
    }
    std::cout << ',' << fmt_shortest(s.delta_a_test) << '\n';
  }
  if (acrs.size() < 3) {
    std::cerr << "warning: fewer than 3 results with a defined ACR; "
                 "correlation omitted\n";
    return kExitOk;
  }
  try {
    std::cout << "spearman=" << fmt4(grain::spearman(acrs, deltas))
              << " n=" << acrs.size() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "warning: correlation omitted: " << e.what() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-granularity experiments: train fine vs. coarse, compare "
               "at the coarse level"};
  app.require_subcommand(1);

  GenDataFlags gen;
  CLI::App* cmd_gen = app.add_subcommand(
      "gen-data", "Generate a synthetic hierarchical dataset");
  cmd_gen->add_option("--hierarchy", gen.hierarchy, "Hierarchy JSON file")
      ->required()->check(CLI::ExistingFile);
  cmd_gen->add_option("--out", gen.out, "Output CSV path")->required();
  cmd_gen->add_option("--n-per-fine", gen.n_per_fine, "Examples per fine class")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--dim", gen.dim, "Feature dimension (>= coarse count)")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--coarse-sep", gen.coarse_sep, "Coarse center separation")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--fine-sep", gen.fine_sep, "Fine sub-center radius")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--sigma", gen.sigma, "Example noise scale")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--test-fraction", gen.test_fraction,
                      "Also split into -train/-test files")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--seed", gen.seed, "Master seed");

  PairFlags pair;
  CLI::App* cmd_pair = app.add_subcommand(
      "pair", "Train a fine/coarse pair and report coarse-level accuracies");
  cmd_pair->add_option("--train", pair.train, "Training CSV")
      ->required()->check(CLI::ExistingFile);
  cmd_pair->add_option("--test", pair.test, "Test CSV")
      ->required()->check(CLI::ExistingFile);
  cmd_pair->add_option("--hierarchy", pair.hierarchy, "Hierarchy JSON file")
      ->required()->check(CLI::ExistingFile);
  cmd_pair->add_option("--out-dir", pair.out_dir, "Output directory")->required();
  add_hyper_flags(cmd_pair, pair.hyper);
  cmd_pair->add_option("--seed", pair.seed, "Master seed");
  cmd_pair->add_flag("--save-models", pair.save_models, "Also write model checkpoints");

  SweepFlags sweep;
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "Run a family of pair experiments over one swept parameter");
  cmd_sweep->add_option("--kind", sweep.kind, "What to sweep")
      ->required()
      ->check(CLI::IsMember({"fraction", "noise", "partition", "coarse-count"}));
  cmd_sweep->add_option("--train", sweep.train, "Training CSV")
      ->required()->check(CLI::ExistingFile);
  cmd_sweep->add_option("--test", sweep.test, "Test CSV")
      ->required()->check(CLI::ExistingFile);
  cmd_sweep->add_option("--hierarchy", sweep.hierarchy, "Hierarchy JSON file")
      ->required()->check(CLI::ExistingFile);
  cmd_sweep->add_option("--out-dir", sweep.out_dir, "Output directory")->required();
  cmd_sweep->add_option("--fractions", sweep.fractions,
                        "Comma-separated training-data fractions (kind=fraction)");
  cmd_sweep->add_option("--factors", sweep.factors,
                        "Comma-separated label-noise factors (kind=noise)");
  cmd_sweep->add_option("--assignments-file", sweep.assignments_file,
                        "Partition assignments, one per line (kind=partition)");
  cmd_sweep->add_option("--subsets-file", sweep.subsets_file,
                        "Coarse-id subsets, one per line (kind=coarse-count)");
  add_hyper_flags(cmd_sweep, sweep.hyper);
  cmd_sweep->add_option("--seed", sweep.seed, "Master seed");
  cmd_sweep->add_option("--jobs", sweep.jobs, "Concurrent entries")
      ->check(CLI::PositiveNumber);

  AcrFlags acr;
  CLI::App* cmd_acr = app.add_subcommand(
      "acr", "Compute the average confusion ratio from a prediction log");
  cmd_acr->add_option("--predictions", acr.predictions,
                      "CSV with header true_fine,pred_fine")
      ->required()->check(CLI::ExistingFile);
  cmd_acr->add_option("--hierarchy", acr.hierarchy, "Hierarchy JSON file")
      ->required()->check(CLI::ExistingFile);

  ReportFlags report;
  CLI::App* cmd_report = app.add_subcommand(
      "report", "Tabulate pair results and correlate ACR with dA");
  cmd_report->add_option("--results-dir", report.results_dir,
                         "Directory of pair-result JSON files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_gen->parsed()) {
      return run_gen_data(gen);
    }
    if (cmd_pair->parsed()) {
      return run_pair(pair);
    }
    if (cmd_sweep->parsed()) {
      return run_sweep(sweep);
    }
    if (cmd_acr->parsed()) {
      return run_acr(acr);
    }
    if (cmd_report->parsed()) {
      return run_report(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;  // unreachable: require_subcommand(1)
}
