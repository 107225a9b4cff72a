#include "aeknn/synthetic.hpp"

#include <random>
#include <string>

namespace aeknn::synthetic {
namespace {

std::vector<std::string> class_names(std::size_t classes) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  return names;
}

}  // namespace

Dataset gaussian_blobs(std::size_t samples_per_class, std::size_t classes, std::size_t features,
                       double separation, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(0.0, separation);
  std::normal_distribution<double> gauss(0.0, noise);
  const auto d = static_cast<Eigen::Index>(features);

  std::vector<Vector> centers(classes, Vector(d));
  for (auto& c : centers)
    for (Eigen::Index j = 0; j < d; ++j) c(j) = center(rng);

  Dataset out;
  out.name = "blobs";
  out.class_names = class_names(classes);
  const std::size_t n = samples_per_class * classes;
  out.features.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    out.labels.push_back(static_cast<int>(c));
    for (Eigen::Index j = 0; j < d; ++j)
      out.features(static_cast<Eigen::Index>(i), j) = centers[c](j) + gauss(rng);
  }
  out.validate();
  return out;
}

Dataset rank3_manifold(std::size_t samples_per_class, std::size_t classes, std::size_t features,
                       double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> latent_center(-3.0, 3.0);
  const auto d = static_cast<Eigen::Index>(features);

  Eigen::MatrixXd mixing(d, 3);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) mixing(i, j) = gauss(rng);
  std::vector<Eigen::Vector3d> centers(classes);
  for (auto& c : centers) c = {latent_center(rng), latent_center(rng), latent_center(rng)};

  Dataset out;
  out.name = "rank3";
  out.class_names = class_names(classes);
  const std::size_t n = samples_per_class * classes;
  out.features.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    out.labels.push_back(static_cast<int>(c));
    const Eigen::Vector3d z = centers[c] + 0.5 * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    Vector x = mixing * z;
    for (Eigen::Index j = 0; j < d; ++j) x(j) += noise * gauss(rng);
    out.features.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  out.validate();
  return out;
}

}  // namespace aeknn::synthetic
