#pragma once

#include "aeknn/dataset.hpp"

#include <cstdint>

namespace aeknn::synthetic {

/// Isotropic Gaussian blobs with centers drawn uniformly in a cube of side
/// `separation`. Labels cycle through the classes.
Dataset gaussian_blobs(std::size_t samples_per_class, std::size_t classes, std::size_t features,
                       double separation, double noise, std::uint64_t seed);

/// Points on a 3-dimensional linear subspace of R^features: clustered latent
/// codes (one cluster per class) mapped through a random features x 3 matrix,
/// plus isotropic noise of scale `noise`.
Dataset rank3_manifold(std::size_t samples_per_class, std::size_t classes, std::size_t features,
                       double noise, std::uint64_t seed);

}  // namespace aeknn::synthetic
