#include "experiment.hpp"

#include "aeknn/csv.hpp"
#include "aeknn/stats.hpp"
#include "aeknn/synthetic.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace aeknn;

namespace {

struct EvalArgs {
  std::vector<std::string> datasets;
  std::vector<std::string> ppls;
  std::vector<std::string> reducers{"ae"};
  std::size_t k = 5;
  std::size_t reps = 2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  TrainConfig train;
  std::string hidden_activation = "sigmoid";
  unsigned jobs = 1;
  std::string out;
  bool header = false;
  int label_column = -1;
  std::size_t positive_class = 1;
  bool no_normalize = false;
};

struct StatsArgs {
  std::string matrix;
  std::string test = "friedman";
  std::vector<std::string> columns;
  std::string direction = "higher";
  std::string form = "chisquare";
  std::string out;
};

struct PlotArgs {
  std::string manifest;
  std::string out;
};

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

int run_eval(const EvalArgs& a) {
  cli::ExperimentSpec spec;
  for (const auto& d : a.datasets) spec.datasets.emplace_back(d);
  TrainConfig train = a.train;
  train.hidden_activation = parse_activation(a.hidden_activation);
  spec.configurations = cli::expand_configurations(a.reducers, a.ppls, train);
  spec.csv.has_header = a.header;
  spec.csv.label_column = a.label_column;
  spec.k = a.k;
  spec.repetitions = a.reps;
  spec.folds = a.folds;
  spec.seed = a.seed;
  spec.positive_class = a.positive_class;
  spec.normalize = !a.no_normalize;
  spec.jobs = a.jobs;
  spec.out_dir = a.out;

  const auto outcome = cli::run_experiment(spec);
  std::cout << "wrote " << (spec.out_dir / "manifest.json").string() << " ("
            << outcome.manifest["cells"].size() << " cells, " << outcome.failed_cells << " failed)\n";
  for (const auto& f : outcome.manifest["failures"])
    std::cerr << "FAILED " << f["dataset"].get<std::string>() << " / "
              << f["configuration"].get<std::string>() << ": " << f["reason"].get<std::string>() << "\n";
  return outcome.failed_cells == 0 ? 0 : 1;
}

int run_stats(const StatsArgs& a) {
  ResultMatrix m = ResultMatrix::load_csv(a.matrix);
  if (!a.columns.empty()) m = m.select_columns(a.columns);
  m.validate();
  std::ostringstream table;

  if (a.test == "friedman") {
    if (a.direction != "higher" && a.direction != "lower")
      throw std::invalid_argument("--direction must be higher or lower");
    const Direction dir = a.direction == "higher" ? Direction::HigherIsBetter : Direction::LowerIsBetter;
    const FriedmanForm form =
        a.form == "iman-davenport" ? FriedmanForm::ImanDavenport : FriedmanForm::ChiSquare;
    if (a.form != "chisquare" && a.form != "iman-davenport")
      throw std::invalid_argument("--form must be chisquare or iman-davenport");
    const TestReport r = friedman(m, dir, form);
    std::cout << "Friedman test (" << r.method << "), " << m.rows() << " datasets, " << m.cols()
              << " configurations\n\n";
    std::cout << std::left << std::setw(28) << "Configuration" << "Average rank\n";
    table << "configuration,average_rank,statistic,p_value\n";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::cout << std::setw(28) << m.column_labels[j] << fixed(r.average_ranks[j], 3) << "\n";
      table << csv::join({m.column_labels[j], csv::format_double(r.average_ranks[j]),
                          csv::format_double(r.statistic), csv::format_double(r.p_value)})
            << "\n";
    }
    std::cout << "\nstatistic " << fixed(r.statistic, 4) << "\np-value   " << fixed(r.p_value, 4) << "\n";
  } else if (a.test == "wilcoxon") {
    if (m.cols() < 2) throw std::invalid_argument("wilcoxon needs at least 2 columns");
    const auto control = m.column(0);
    std::cout << "Wilcoxon signed-rank test, " << m.rows() << " datasets, control "
              << m.column_labels[0] << "\n\n";
    std::cout << std::left << std::setw(44) << "Comparison" << std::setw(10) << "W" << std::setw(8)
              << "pairs" << "p-value\n";
    table << "comparison,statistic,effective_pairs,p_value\n";
    for (std::size_t j = 1; j < m.cols(); ++j) {
      const auto other = m.column(j);
      const TestReport r = wilcoxon_signed_rank(control, other);
      const std::string name = m.column_labels[0] + " vs " + m.column_labels[j];
      std::cout << std::setw(44) << name << std::setw(10) << fixed(r.statistic, 1) << std::setw(8)
                << r.effective_pairs << fixed(r.p_value, 4) << "\n";
      table << csv::join({name, r.defined ? csv::format_double(r.statistic) : "NA",
                          std::to_string(r.effective_pairs),
                          r.defined ? csv::format_double(r.p_value) : "NA"})
            << "\n";
    }
  } else {
    throw std::invalid_argument("--test must be friedman or wilcoxon");
  }
  if (!a.out.empty()) cli::write_file_atomic(a.out, table.str());
  return 0;
}

int run_plotdata(const PlotArgs& a) {
  std::ifstream in(a.manifest);
  if (!in) throw DataError("cannot open manifest " + a.manifest);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const auto manifest = text.find_first_not_of(" \t\r\n") == std::string::npos
                            ? nlohmann::json::object()
                            : nlohmann::json::parse(text);
  const fs::path out = a.out.empty() ? fs::path(a.manifest).parent_path() : fs::path(a.out);
  for (const auto& p : cli::write_plot_data(manifest, out)) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

int run_synthetic(const std::string& out_dir) {
  const fs::path out(out_dir);
  const std::vector<Dataset> suite{synthetic::gaussian_blobs(100, 3, 10, 10.0, 1.0, 5),
                                   synthetic::rank3_manifold(250, 4, 20, 0.05, 7)};
  for (const auto& d : suite) {
    std::ostringstream s;
    for (std::size_t i = 0; i < d.n_samples(); ++i) {
      std::vector<std::string> fields;
      for (std::size_t j = 0; j < d.n_features(); ++j)
        fields.push_back(csv::format_double(d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
      fields.push_back(d.class_names[static_cast<std::size_t>(d.labels[i])]);
      s << csv::join(fields) << "\n";
    }
    cli::write_file_atomic(out / (d.name + ".csv"), s.str());
    std::cout << "wrote " << (out / (d.name + ".csv")).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AEkNN: k-nearest neighbors with autoencoder feature reduction"};
  app.set_version_flag("--version", AEKNN_VERSION);
  app.set_config("--config", "", "INI/TOML file; [eval], [stats], [plotdata] sections, flags win");
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Cross-validate every dataset x configuration cell");
  eval->add_option("--dataset", ev.datasets, "CSV file, label in the last column by default")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--ppl", ev.ppls, "PPL per configuration: 0.75, \"1.5,0.25,1.5\" or aeknn1..aeknn6");
  eval->add_option("--reducer", ev.reducers, "ae, pca, lda or identity (repeatable)")->capture_default_str();
  eval->add_option("--k", ev.k, "Neighbors")->capture_default_str();
  eval->add_option("--reps", ev.reps, "Cross-validation repetitions")->capture_default_str();
  eval->add_option("--folds", ev.folds, "Folds per repetition")->capture_default_str();
  eval->add_option("--seed", ev.seed, "Seed for folds and autoencoder initialization")->required();
  eval->add_option("--epochs", ev.train.epochs)->capture_default_str();
  eval->add_option("--batch-size", ev.train.batch_size)->capture_default_str();
  eval->add_option("--lr", ev.train.learning_rate, "Learning rate")->capture_default_str();
  eval->add_option("--hidden-activation", ev.hidden_activation)
      ->check(CLI::IsMember({"sigmoid", "relu"}))
      ->capture_default_str();
  eval->add_option("--jobs", ev.jobs, "Cells run concurrently")->capture_default_str();
  eval->add_option("--out", ev.out, "Output directory")->required();
  eval->add_flag("--header", ev.header, "Dataset files have a header row");
  eval->add_option("--label-column", ev.label_column, "Label column, negative counts from the end")
      ->capture_default_str();
  eval->add_option("--positive-class", ev.positive_class, "Positive class index for binary F/AUC")
      ->capture_default_str();
  eval->add_flag("--no-normalize", ev.no_normalize, "Skip min-max scaling");

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Friedman or Wilcoxon test on a result matrix CSV");
  stats->add_option("--matrix", st.matrix)->required()->check(CLI::ExistingFile);
  stats->add_option("--test", st.test)->check(CLI::IsMember({"friedman", "wilcoxon"}))->capture_default_str();
  stats->add_option("--columns", st.columns, "Columns to compare, in order")->delimiter(';');
  stats->add_option("--direction", st.direction, "higher or lower is better")
      ->check(CLI::IsMember({"higher", "lower"}))
      ->capture_default_str();
  stats->add_option("--form", st.form, "Friedman form: chisquare or iman-davenport")
      ->check(CLI::IsMember({"chisquare", "iman-davenport"}))
      ->capture_default_str();
  stats->add_option("--out", st.out, "Write the report as CSV");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plotdata", "Per-metric dataset,configuration,value files from a manifest");
  plot->add_option("--manifest", pl.manifest)->required()->check(CLI::ExistingFile);
  plot->add_option("--out", pl.out, "Output directory (default: next to the manifest)");

  std::string synth_out = "data/synthetic";
  auto* synth = app.add_subcommand("generate-synthetic", "Write the bundled synthetic suite");
  synth->add_option("--out", synth_out)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*eval) return run_eval(ev);
    if (*stats) return run_stats(st);
    if (*plot) return run_plotdata(pl);
    if (*synth) return run_synthetic(synth_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
