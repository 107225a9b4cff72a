#include "experiment.hpp"

#include "aeknn/csv.hpp"
#include "aeknn/stats.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace aeknn::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// File-name safe form of a configuration label: "AEkNN (1.5, 0.25, 1.5)" -> "AEkNN_1.5_0.25_1.5".
std::string slug(const std::string& label) {
  std::string out;
  for (const char c : label) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '=') {
      out += c;
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"seed", t.seed},
          {"shuffle_each_epoch", t.shuffle_each_epoch},
          {"hidden_activation", std::string(to_string(t.hidden_activation))},
          {"output_activation", std::string(to_string(t.output_activation))}};
}

struct LoadedDataset {
  fs::path path;
  std::string bytes;
  Dataset data;
  FoldPlan plan;
  std::string error;
};

struct Cell {
  std::size_t dataset = 0;
  std::size_t configuration = 0;
  bool ok = false;
  std::string reason;
  CvResult result;
  std::string predictions_file;
};

}  // namespace

void ExperimentSpec::validate() const {
  if (datasets.empty()) throw std::invalid_argument("at least one --dataset is required");
  if (configurations.empty()) throw std::invalid_argument("at least one configuration is required");
  if (k < 1) throw std::invalid_argument("--k must be >= 1");
  if (repetitions < 1) throw std::invalid_argument("--reps must be >= 1");
  if (folds < 2) throw std::invalid_argument("--folds must be >= 2");
  if (out_dir.empty()) throw std::invalid_argument("--out is required");
  std::set<std::string> labels;
  for (const auto& c : configurations) {
    c.train.validate();
    if (!labels.insert(c.label()).second)
      throw std::invalid_argument("duplicate configuration " + c.label());
  }
  std::set<std::string> names;
  for (const auto& d : datasets)
    if (!names.insert(d.stem().string()).second)
      throw std::invalid_argument("two datasets share the name " + d.stem().string());
}

json ExperimentSpec::resolved() const {
  json configs = json::array();
  for (const auto& c : configurations) {
    json entry{{"label", c.label()}, {"reducer", std::string(to_string(c.kind))}};
    if (c.kind != ReducerKind::Identity) entry["ppl"] = c.ppl.fractions();
    if (c.target_dim) entry["target_dim"] = c.target_dim;
    if (c.kind == ReducerKind::AeStack) entry["train"] = train_json(c.train);
    configs.push_back(entry);
  }
  json paths = json::array();
  for (const auto& d : datasets) paths.push_back(d.string());
  return {{"datasets", paths},
          {"configurations", configs},
          {"csv", {{"has_header", csv.has_header}, {"label_column", csv.label_column}}},
          {"k", k},
          {"repetitions", repetitions},
          {"folds", folds},
          {"seed", seed},
          {"positive_class", positive_class},
          {"normalize", normalize}};
}

std::vector<ReducerSpec> expand_configurations(const std::vector<std::string>& reducers,
                                               const std::vector<std::string>& ppls,
                                               const TrainConfig& train) {
  std::vector<PplSpec> parsed;
  for (const auto& p : ppls) parsed.push_back(PplSpec::parse(p));
  if (parsed.empty()) parsed.push_back(PplSpec({0.75}));
  std::vector<ReducerSpec> out;
  for (const auto& name : reducers) {
    const ReducerKind kind = parse_reducer_kind(name);
    if (kind == ReducerKind::Identity) {
      ReducerSpec s;
      s.kind = kind;
      s.train = train;
      out.push_back(s);
      continue;
    }
    for (const auto& ppl : parsed) {
      ReducerSpec s;
      s.kind = kind;
      s.ppl = ppl;
      s.train = train;
      out.push_back(s);
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

EvalOutcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  fs::create_directories(spec.out_dir);

  std::vector<LoadedDataset> loaded(spec.datasets.size());
  for (std::size_t i = 0; i < spec.datasets.size(); ++i) {
    auto& ds = loaded[i];
    ds.path = spec.datasets[i];
    try {
      ds.bytes = read_bytes(ds.path);
      std::istringstream in(ds.bytes);
      ds.data = read_csv(in, spec.csv, ds.path.stem().string());
      ds.plan = make_folds(ds.data, spec.repetitions, spec.folds, spec.seed);
      std::ostringstream plan;
      ds.plan.write(plan);
      write_file_atomic(spec.out_dir / "folds" / (ds.data.name + ".foldplan"), plan.str());
    } catch (const std::exception& e) {
      ds.error = e.what();
    }
  }

  std::vector<Cell> cells;
  for (std::size_t d = 0; d < loaded.size(); ++d)
    for (std::size_t c = 0; c < spec.configurations.size(); ++c) {
      Cell cell;
      cell.dataset = d;
      cell.configuration = c;
      cells.push_back(std::move(cell));
    }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& cell = cells[i];
      const LoadedDataset& ds = loaded[cell.dataset];
      if (!ds.error.empty()) {
        cell.reason = "dataset: " + ds.error;
        continue;
      }
      try {
        PipelineConfig cfg;
        cfg.reducer = spec.configurations[cell.configuration];
        cfg.k = spec.k;
        cfg.normalize = spec.normalize;
        cfg.positive_class = spec.positive_class;
        if (ds.data.n_classes() == 2 && spec.positive_class >= 2)
          throw std::invalid_argument("positive class index outside the two classes");
        cell.result = run_cv(ds.data, ds.plan, cfg);
        std::ostringstream audit;
        write_predictions(audit, ds.data, cell.result);
        cell.predictions_file =
            "predictions/" + ds.data.name + "__" + slug(cfg.reducer.label()) + ".csv";
        write_file_atomic(spec.out_dir / cell.predictions_file, audit.str());
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.reason = e.what();
      }
    }
  };
  {
    const unsigned workers = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(cells.size())));
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  // Manifest and tables are assembled on one thread in cell order.
  std::vector<std::string> row_labels;
  for (const auto& ds : loaded) row_labels.push_back(ds.path.stem().string());
  std::vector<std::string> col_labels;
  for (const auto& c : spec.configurations) col_labels.push_back(c.label());
  const auto blank = [&] {
    ResultMatrix m{row_labels, col_labels, Matrix::Constant(static_cast<Eigen::Index>(row_labels.size()),
                                                            static_cast<Eigen::Index>(col_labels.size()), NAN)};
    return m;
  };
  std::map<std::string, ResultMatrix> tables{
      {"accuracy", blank()}, {"fscore", blank()}, {"auc", blank()}, {"time", blank()}};

  EvalOutcome outcome;
  json cells_json = json::array();
  json failures = json::array();
  for (const auto& cell : cells) {
    const auto r = static_cast<Eigen::Index>(cell.dataset);
    const auto c = static_cast<Eigen::Index>(cell.configuration);
    json entry{{"dataset", row_labels[cell.dataset]}, {"configuration", col_labels[cell.configuration]}};
    if (!cell.ok) {
      ++outcome.failed_cells;
      entry["status"] = "failed";
      entry["reason"] = cell.reason;
      failures.push_back(entry);
      cells_json.push_back(entry);
      continue;
    }
    const auto& res = cell.result;
    tables["accuracy"].values(r, c) = res.mean.accuracy;
    tables["fscore"].values(r, c) = res.mean.f_score;
    tables["auc"].values(r, c) = res.mean.auc;
    tables["time"].values(r, c) = res.mean_classification_seconds;
    entry["status"] = "ok";
    entry["accuracy"] = res.mean.accuracy;
    entry["fscore"] = res.mean.f_score;
    entry["auc"] = res.mean.auc;
    entry["time"] = res.mean_classification_seconds;
    entry["fit_seconds"] = res.mean_fit_seconds;
    entry["encoded_dim"] = res.encoded_dim;
    entry["requested_dim"] = res.requested_dim;
    entry["predictions"] = cell.predictions_file;
    cells_json.push_back(entry);
  }

  for (const auto& [metric, table] : tables) {
    std::ostringstream out;
    table.write_csv(out);
    write_file_atomic(spec.out_dir / (metric + ".csv"), out.str());
  }

  const json resolved = spec.resolved();
  std::uint64_t fp = fnv1a(AEKNN_VERSION);
  fp = fnv1a(resolved.dump(), fp);
  json datasets = json::array();
  for (const auto& ds : loaded) {
    fp = fnv1a(ds.bytes, fp);
    json entry{{"name", ds.path.stem().string()}, {"path", ds.path.string()}};
    if (ds.error.empty()) {
      entry["data_fingerprint"] = hex64(fnv1a(ds.bytes));
      entry["samples"] = ds.data.n_samples();
      entry["features"] = ds.data.n_features();
      entry["classes"] = ds.data.n_classes();
      entry["foldplan"] = "folds/" + ds.data.name + ".foldplan";
      entry["foldplan_fingerprint"] = ds.plan.fingerprint();
    } else {
      entry["error"] = ds.error;
    }
    datasets.push_back(entry);
  }

  outcome.manifest = {{"version", AEKNN_VERSION},
                      {"config", resolved},
                      {"fingerprint", hex64(fp)},
                      {"datasets", datasets},
                      {"metrics", {"accuracy", "fscore", "auc", "time"}},
                      {"cells", cells_json},
                      {"failures", failures}};
  write_file_atomic(spec.out_dir / "manifest.json", outcome.manifest.dump(2) + "\n");
  return outcome;
}

std::vector<fs::path> write_plot_data(const json& manifest, const fs::path& out_dir) {
  static const std::vector<std::string> metrics{"accuracy", "fscore", "auc", "time"};
  std::vector<fs::path> written;
  const json cells = manifest.contains("cells") ? manifest.at("cells") : json::array();
  if (!cells.is_array()) throw DataError("manifest: 'cells' is not an array");
  for (const auto& metric : metrics) {
    std::ostringstream out;
    out << "dataset,configuration,value\n";
    for (const auto& cell : cells) {
      if (cell.value("status", "") != "ok" || !cell.contains(metric)) continue;
      out << csv::join({cell.at("dataset").get<std::string>(), cell.at("configuration").get<std::string>(),
                        csv::format_double(cell.at(metric).get<double>())})
          << "\n";
    }
    const fs::path path = out_dir / ("plot_" + metric + ".csv");
    write_file_atomic(path, out.str());
    written.push_back(path);
  }
  return written;
}

}  // namespace aeknn::cli
