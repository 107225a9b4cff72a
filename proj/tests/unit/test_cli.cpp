#include "experiment.hpp"

#include "aeknn/csv.hpp"
#include "aeknn/stats.hpp"
#include "aeknn/synthetic.hpp"

#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace aeknn;
using namespace aeknn::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aeknn_test_cli_" + name + "_" + std::to_string(std::random_device{}()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_dataset(const Dataset& d, const fs::path& path) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < d.n_samples(); ++i) {
    for (Eigen::Index j = 0; j < d.features.cols(); ++j)
      out << csv::format_double(d.features(static_cast<Eigen::Index>(i), j)) << ",";
    out << d.class_names[static_cast<std::size_t>(d.labels[i])] << "\n";
  }
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec small_spec(const std::vector<fs::path>& data, const fs::path& out,
                          const std::vector<std::string>& reducers, const std::vector<std::string>& ppls) {
  TrainConfig train;
  train.epochs = 3;
  ExperimentSpec spec;
  spec.datasets = data;
  spec.configurations = expand_configurations(reducers, ppls, train);
  spec.seed = 7;
  spec.out_dir = out;
  return spec;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + AEKNN_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("configuration expansion") {
  const TrainConfig train;
  const auto c = expand_configurations({"identity", "ae"}, {"0.75", "0.5"}, train);
  REQUIRE(c.size() == 3);
  CHECK(c[0].label() == "kNN");
  CHECK(c[1].label() == "AEkNN (0.75)");
  CHECK(c[2].label() == "AEkNN (0.5)");
  CHECK(expand_configurations({"ae"}, {}, train).front().label() == "AEkNN (0.75)");
}

TEST_CASE("one dataset and two configurations give four 1x2 tables") {
  const auto dir = scratch("tables");
  const auto data = write_dataset(synthetic::gaussian_blobs(20, 2, 6, 4.0, 1.0, 1), dir / "blobs.csv");
  const auto outcome = run_experiment(small_spec({data}, dir / "out", {"identity", "ae"}, {"0.5"}));
  CHECK(outcome.failed_cells == 0);
  for (const char* metric : {"accuracy", "fscore", "auc", "time"}) {
    std::ifstream in(dir / "out" / (std::string(metric) + ".csv"));
    const auto m = ResultMatrix::read_csv(in);
    CHECK(m.rows() == 1);
    CHECK(m.cols() == 2);
    CHECK(m.column_labels == std::vector<std::string>{"kNN", "AEkNN (0.5)"});
  }
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "folds" / "blobs.foldplan"));
  fs::remove_all(dir);
}

TEST_CASE("same seed reproduces every non-timing output byte for byte") {
  const auto dir = scratch("repro");
  const auto data = write_dataset(synthetic::gaussian_blobs(20, 3, 5, 3.0, 1.0, 2), dir / "blobs.csv");
  run_experiment(small_spec({data}, dir / "a", {"identity", "ae", "pca"}, {"0.5"}));
  run_experiment(small_spec({data}, dir / "b", {"identity", "ae", "pca"}, {"0.5"}));
  for (const char* f : {"accuracy.csv", "fscore.csv", "auc.csv", "folds/blobs.foldplan"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  for (const auto& entry : fs::directory_iterator(dir / "a" / "predictions"))
    CHECK(slurp(entry.path()) == slurp(dir / "b" / "predictions" / entry.path().filename()));
  fs::remove_all(dir);
}

TEST_CASE("manifest fingerprint covers version, configuration and data") {
  const auto dir = scratch("fingerprint");
  const auto d = synthetic::gaussian_blobs(15, 2, 4, 3.0, 1.0, 3);
  const auto data = write_dataset(d, dir / "blobs.csv");
  const auto spec = small_spec({data}, dir / "a", {"identity"}, {});
  const auto base = run_experiment(spec).manifest;

  std::uint64_t fp = fnv1a(AEKNN_VERSION);
  fp = fnv1a(spec.resolved().dump(), fp);
  fp = fnv1a(slurp(data), fp);
  CHECK(base.at("fingerprint") == hex64(fp));
  std::uint64_t other_version = fnv1a("0.0.0-other");
  other_version = fnv1a(spec.resolved().dump(), other_version);
  other_version = fnv1a(slurp(data), other_version);
  CHECK(hex64(other_version) != hex64(fp));

  auto changed = spec;
  changed.k = 3;
  changed.out_dir = dir / "b";
  CHECK(run_experiment(changed).manifest.at("fingerprint") != base.at("fingerprint"));

  Dataset edited = d;
  edited.features(0, 0) += 0.5;
  write_dataset(edited, data);
  auto same_spec = spec;
  same_spec.out_dir = dir / "c";
  CHECK(run_experiment(same_spec).manifest.at("fingerprint") != base.at("fingerprint"));
  fs::remove_all(dir);
}

TEST_CASE("plot data lists one row per ok cell") {
  const auto dir = scratch("plot");
  const auto a = write_dataset(synthetic::gaussian_blobs(15, 2, 6, 3.0, 1.0, 4), dir / "one.csv");
  const auto b = write_dataset(synthetic::gaussian_blobs(15, 3, 6, 3.0, 1.0, 5), dir / "two.csv");
  const auto manifest = run_experiment(small_spec({a, b}, dir / "out", {"identity", "ae"}, {"0.75", "0.5"})).manifest;
  const auto written = write_plot_data(manifest, dir / "out");
  CHECK(written.size() == 4);

  std::ifstream in(dir / "out" / "plot_accuracy.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "dataset,configuration,value");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) rows.push_back(csv::split_line(line));
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows) {
    bool found = false;
    for (const auto& cell : manifest.at("cells"))
      if (cell.at("dataset") == row[0] && cell.at("configuration") == row[1]) {
        found = true;
        CHECK(std::stod(row[2]) == cell.at("accuracy").get<double>());
      }
    CHECK(found);
  }

  write_plot_data(nlohmann::json::object(), dir / "empty");
  CHECK(slurp(dir / "empty" / "plot_auc.csv") == "dataset,configuration,value\n");
  fs::remove_all(dir);
}

TEST_CASE("failed cells are recorded and the sweep continues") {
  const auto dir = scratch("failure");
  const auto good = write_dataset(synthetic::gaussian_blobs(20, 2, 4, 3.0, 1.0, 6), dir / "good.csv");
  {
    std::ofstream bad(dir / "broken.csv");
    bad << "1,2,a\n3,x,b\n";
  }
  const auto outcome = run_experiment(small_spec({good, dir / "broken.csv"}, dir / "out", {"identity"}, {}));
  CHECK(outcome.failed_cells == 1);
  REQUIRE(outcome.manifest.at("failures").size() == 1);
  CHECK(outcome.manifest.at("failures")[0].at("dataset") == "broken");
  CHECK(slurp(dir / "out" / "accuracy.csv").find("NA") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("command line round trip") {
  const auto dir = scratch("binary");
  const auto data = write_dataset(synthetic::gaussian_blobs(20, 2, 6, 4.0, 1.0, 7), dir / "blobs.csv");
  const auto out = dir / "out";
  CHECK(run_cli("eval --dataset \"" + data.string() + "\" --reducer identity --reducer ae --ppl 0.75 --ppl 0.5 "
                "--epochs 2 --seed 3 --out \"" + out.string() + "\"") == 0);
  CHECK(run_cli("stats --matrix \"" + (out / "accuracy.csv").string() + "\" --test wilcoxon") != 0);
  CHECK(run_cli("plotdata --manifest \"" + (out / "manifest.json").string() + "\"") == 0);
  CHECK(fs::exists(out / "plot_time.csv"));

  {
    std::ofstream m(dir / "matrix.csv");
    m << "dataset,a,b,c\nd1,0.9,0.8,0.7\nd2,0.85,0.8,0.75\nd3,0.95,0.9,0.6\nd4,0.7,0.6,0.65\n";
  }
  const auto report = dir / "report.csv";
  CHECK(run_cli("stats --matrix \"" + (dir / "matrix.csv").string() + "\" --test friedman --out \"" +
                report.string() + "\"") == 0);
  CHECK(slurp(report).rfind("configuration,average_rank,statistic,p_value", 0) == 0);
  CHECK(run_cli("stats --matrix \"" + (dir / "matrix.csv").string() + "\" --test wilcoxon --columns a") != 0);
  CHECK(run_cli("stats --matrix \"" + (dir / "matrix.csv").string() + "\" --test wilcoxon") == 0);
  CHECK(run_cli("eval --dataset \"" + data.string() + "\" --seed 1") != 0);
  fs::remove_all(dir);
}
