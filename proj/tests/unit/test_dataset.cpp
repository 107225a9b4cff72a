#include "aeknn/dataset.hpp"

#include "doctest.h"

#include <filesystem>
#include <random>
#include <set>
#include <sstream>

using namespace aeknn;

namespace {

Dataset from_text(const std::string& text, CsvOptions opts = {}) {
  std::istringstream in(text);
  return read_csv(in, opts, "inline");
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (const double v : values) m(i++, 0) = v;
  return m;
}

}  // namespace

TEST_CASE("labels map to dense indices by first appearance") {
  const Dataset d = from_text("1.0,2.0,A\n3.0,4.0,B\n5.0,6.0,A\n");
  CHECK(d.n_classes() == 2);
  CHECK(d.labels == std::vector<int>{0, 1, 0});
  CHECK(d.class_names == std::vector<std::string>{"A", "B"});
  CHECK(d.n_features() == 2);
  CHECK(d.features(2, 1) == 6.0);
}

TEST_CASE("first appearance, not lexicographic order") {
  const Dataset d = from_text("0,zeta\n1,alpha\n2,mid\n3,alpha\n");
  CHECK(d.class_names == std::vector<std::string>{"zeta", "alpha", "mid"});
  CHECK(d.labels == std::vector<int>{0, 1, 2, 1});
}

TEST_CASE("label mapping is a bijection") {
  const Dataset d = from_text("0,c\n1,a\n2,b\n3,c\n4,a\n5,b\n6,d\n");
  std::set<int> used(d.labels.begin(), d.labels.end());
  CHECK(used.size() == d.n_classes());
  std::set<std::string> names(d.class_names.begin(), d.class_names.end());
  CHECK(names.size() == d.n_classes());
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    CHECK(d.labels[i] < static_cast<int>(d.n_classes()));
}

TEST_CASE("header row and label column selection") {
  CsvOptions opts;
  opts.has_header = true;
  opts.label_column = 0;
  const Dataset d = from_text("class,x,y\nA,1,2\nB,3,4\n", opts);
  CHECK(d.n_features() == 2);
  CHECK(d.features(1, 0) == 3.0);
  CHECK(d.class_names == std::vector<std::string>{"A", "B"});
}

TEST_CASE("non-numeric feature cell names row and column") {
  try {
    from_text("1,2,A\n3,oops,B\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
}

TEST_CASE("loader rejections") {
  CHECK_THROWS_AS(from_text(""), DataError);
  CHECK_THROWS_AS(from_text("1,A\n2,A\n"), DataError);
  CHECK_THROWS_AS(from_text("1,2,A\n3,B\n"), DataError);
  CHECK_THROWS_AS(from_text("1,inf,A\n2,3,B\n"), DataError);
  CHECK_THROWS_AS(from_text("1,nan,A\n2,3,B\n"), DataError);
  CHECK_THROWS_AS(from_text("1,2,\n3,4,B\n"), DataError);
}

TEST_CASE("image segmentation file shape") {
  const std::filesystem::path path = std::string(AEKNN_DATA_DIR) + "/datasets/segment.csv";
  if (!std::filesystem::exists(path)) {
    MESSAGE("segment.csv not present; run tools/fetch_datasets.sh");
    return;
  }
  const Dataset d = load_csv(path);
  CHECK(d.n_samples() == 2310);
  CHECK(d.n_features() == 19);
  CHECK(d.n_classes() == 7);
  CHECK(d.name == "segment");
}

TEST_CASE("normalizer min and max") {
  const auto s = fit_normalizer(column({2, 4, 6}), all_rows(3));
  CHECK(s.min(0) == 2.0);
  CHECK(s.max(0) == 6.0);
}

TEST_CASE("constant feature maps to zero") {
  const Matrix x = column({5, 5, 5});
  const auto s = fit_normalizer(x, all_rows(3));
  CHECK(s.min(0) == 5.0);
  CHECK(s.max(0) == 6.0);
  CHECK(s.transform(x).isZero(0.0));
}

TEST_CASE("fit on a subset, clamp the rest") {
  const Matrix x = column({0, 10, 100});
  const auto s = fit_normalizer(x, {0, 1});
  CHECK(s.min(0) == 0.0);
  CHECK(s.max(0) == 10.0);
  // Unclamped the third row would be (100 - 0) / 10 = 10.
  CHECK(s.transform(x)(2, 0) == 1.0);
}

TEST_CASE("transform endpoints and midpoint") {
  const auto s = fit_normalizer(column({-3, 5}), all_rows(2));
  const Matrix t = s.transform(column({-3, 5, 1}));
  CHECK(t(0, 0) == 0.0);
  CHECK(t(1, 0) == 1.0);
  CHECK(t(2, 0) == 0.5);
}

TEST_CASE("normalizer errors") {
  CHECK_THROWS(fit_normalizer(column({1, 2}), {}));
  const auto s = fit_normalizer(column({1, 2}), all_rows(2));
  CHECK_THROWS(s.transform(Matrix::Zero(2, 3)));
}

TEST_CASE("fitted data lands in [0, 1] and round-trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix x(20, 6);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    const auto s = fit_normalizer(x, all_rows(20));
    CHECK((s.min.array() <= s.max.array()).all());
    const Matrix t = s.transform(x);
    CHECK(t.minCoeff() >= 0.0);
    CHECK(t.maxCoeff() <= 1.0);
    const Matrix back = s.inverse(t);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        CHECK(std::abs(back(i, j) - x(i, j)) <= 1e-12 * std::max(1.0, std::abs(x(i, j))));
  }
}

TEST_CASE("dataset transform keeps labels") {
  const Dataset d = from_text("0,A\n10,B\n5,A\n");
  const auto s = fit_normalizer(d, all_rows(3));
  const Dataset t = transform(d, s);
  CHECK(t.labels == d.labels);
  CHECK(t.features(2, 0) == 0.5);
}

TEST_CASE("two classes of five over five folds") {
  std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const FoldPlan plan = make_folds(labels, 1, 5, 3);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto rows = plan.test_rows(0, f);
    REQUIRE(rows.size() == 2);
    CHECK(labels[rows[0]] != labels[rows[1]]);
  }
}

TEST_CASE("fold plans are deterministic per seed") {
  std::vector<int> labels;
  for (int i = 0; i < 97; ++i) labels.push_back(i % 3);
  CHECK(make_folds(labels, 2, 5, 42) == make_folds(labels, 2, 5, 42));
  CHECK(make_folds(labels, 2, 5, 42).fingerprint() == make_folds(labels, 2, 5, 42).fingerprint());
  CHECK_FALSE(make_folds(labels, 2, 5, 42) == make_folds(labels, 2, 5, 43));
  const FoldPlan p = make_folds(labels, 2, 5, 42);
  CHECK(p.assignment(0) != p.assignment(1));
}

TEST_CASE("2310 samples in 2x5 folds") {
  std::vector<int> labels;
  for (int i = 0; i < 2310; ++i) labels.push_back(i % 7);
  const FoldPlan plan = make_folds(labels, 2, 5, 1);
  std::size_t splits = 0;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t f = 0; f < 5; ++f) {
      CHECK(plan.test_rows(r, f).size() == 462);
      CHECK(plan.train_rows(r, f).size() == 1848);
      ++splits;
    }
  CHECK(splits == 10);
}

TEST_CASE("folds partition the samples and are stratified") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 2 + rng() % 6;
    const std::size_t classes = 2 + rng() % 5;
    std::vector<int> labels;
    std::vector<std::size_t> class_size(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      class_size[c] = k + rng() % 30;
      for (std::size_t i = 0; i < class_size[c]; ++i) labels.push_back(static_cast<int>(c));
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const FoldPlan plan = make_folds(labels, 3, k, rng());
    for (std::size_t r = 0; r < 3; ++r) {
      std::vector<int> seen(labels.size(), 0);
      for (std::size_t f = 0; f < k; ++f) {
        std::vector<double> count(classes, 0.0);
        for (const auto row : plan.test_rows(r, f)) {
          ++seen[row];
          ++count[static_cast<std::size_t>(labels[row])];
        }
        for (std::size_t c = 0; c < classes; ++c)
          CHECK(std::abs(count[c] - static_cast<double>(class_size[c]) / static_cast<double>(k)) <= 1.0);
        const auto train = plan.train_rows(r, f);
        CHECK(train.size() + plan.test_rows(r, f).size() == labels.size());
      }
      for (const int s : seen) CHECK(s == 1);
    }
  }
}

TEST_CASE("class smaller than the fold count is rejected") {
  CHECK_THROWS(make_folds(std::vector<int>{0, 0, 0, 1, 1, 1, 1, 1}, 1, 4, 1));
}

TEST_CASE("fold plan sidecar round-trips") {
  std::vector<int> labels;
  for (int i = 0; i < 53; ++i) labels.push_back(i % 4);
  const FoldPlan plan = make_folds(labels, 2, 5, 0xfeedULL);
  std::stringstream s;
  plan.write(s);
  const FoldPlan back = FoldPlan::read(s);
  CHECK(back == plan);
  CHECK(back.seed() == 0xfeedULL);
  std::istringstream bad("not a plan\n");
  CHECK_THROWS(FoldPlan::read(bad));
}
