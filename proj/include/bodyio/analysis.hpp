#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bodyio/motion_model.hpp"

namespace bodyio {

/// Rows are samples, columns latent dimensions.
using FeatureMatrix = Eigen::MatrixXd;

/// Stacks the IMU-encoder output of every frame of every window (one row
/// per frame). The tap sits after the IMU encoder and before the recurrent
/// layers. Throws ErrorKind::Argument when a window is not in the model's
/// representation.
FeatureMatrix collect_latents(const MotionNetModel& model,
                              const std::vector<ImuWindow>& windows);

/// Cumulative explained-variance fractions of the column-centered matrix
/// scaled by 1/sqrt(rows - 1), from its singular values (no Gram matrix).
/// `standardize` additionally divides each column by its std. Throws
/// ErrorKind::Argument with fewer than 2 rows and ErrorKind::Numerical when
/// the matrix has no variance.
std::vector<double> pca_cumulative_variance(const FeatureMatrix& features,
                                            bool standardize = false);

/// Smallest k whose cumulative fraction reaches `energy`.
std::size_t components_for_energy(const std::vector<double>& cumulative,
                                  double energy);

struct Spectrum {
  std::string representation;
  std::vector<double> cumulative;
};

/// spectrum.csv: representation,k,cumulative_fraction (k from 1).
void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<Spectrum>& spectra);

}  // namespace bodyio
