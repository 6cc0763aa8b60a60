#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "bodyio/imu.hpp"
#include "bodyio/simulator.hpp"

namespace bodyio {

/// Per-sample IMU correction and sensor uncertainty.
struct CorrectionOutput {
  Vec3 sigma_g = Vec3::Zero();  // rad/s, added to the gyro reading
  Vec3 sigma_a = Vec3::Zero();  // m/s^2, added to the accel reading
  Vec3 eta_g = Vec3::Constant(1e-2);  // rad/s std
  Vec3 eta_a = Vec3::Constant(1e-1);  // m/s^2 std
};

/// Zero corrections, constant uncertainties.
struct IdentityCorrector {
  Vec3 eta_g = Vec3::Constant(1e-2);
  Vec3 eta_a = Vec3::Constant(1e-1);

  IdentityCorrector() = default;
  IdentityCorrector(double g, double a)
      : eta_g(Vec3::Constant(g)), eta_a(Vec3::Constant(a)) {}
  IdentityCorrector(const Vec3& g, const Vec3& a) : eta_g(g), eta_a(a) {}
};

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Per-channel affine map over a causal window of raw readings.
///
/// Channels are (wx, wy, wz, ax, ay, az). For channel c at sample i:
///   z_k      = (x_c[i - k] - in_mean[c]) / in_scale[c],  k = 0 .. L-1
///   sigma_c  = weights(c, :) . z + bias[c]
///   eta_c    = softplus(eta_raw[c]) = log(1 + exp(eta_raw[c]))
/// Samples before the window start replicate the first reading.
struct AffineCorrector {
  int window_len = 16;
  Vec6 in_mean = Vec6::Zero();
  Vec6 in_scale = Vec6::Ones();
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(6, 16);
  Vec6 bias = Vec6::Zero();
  Vec6 eta_raw = Vec6::Zero();
};

using CorrectorModel = std::variant<IdentityCorrector, AffineCorrector>;

/// One correction per sample. `window` must be in Body representation.
std::vector<CorrectionOutput> correct_and_quantify(const CorrectorModel& model,
                                                   const ImuWindow& window);

/// Applies a + sigma_a and w + sigma_g.
ImuSample apply_correction(const ImuSample& s, const CorrectionOutput& c);

struct CorrectorExample {
  ImuWindow window;                 // raw (biased, noisy) Body readings
  std::vector<BiasState> bias;      // truth, same length
};

struct CorrectorTrainConfig {
  int epochs = 200;
  int window_len = 16;
  /// Gradient step as a fraction of 1 / lambda_max of each channel's
  /// normal matrix; must lie in (0, 2) for monotone descent.
  double step_fraction = 1.0;
};

/// Full-batch gradient descent on the mean squared error between the
/// predicted correction and the negated bias truth. Each channel is an
/// independent quadratic problem; with step_fraction in (0, 1] the
/// training loss never increases. `loss_history`, when given, receives the
/// loss before the first step followed by the loss after every epoch
/// (epochs + 1 entries). Throws ErrorKind::Argument on an empty dataset.
AffineCorrector train_corrector(const std::vector<CorrectorExample>& dataset,
                                const CorrectorTrainConfig& cfg = {},
                                std::vector<double>* loss_history = nullptr);

void save_corrector(const CorrectorModel& model,
                    const std::filesystem::path& path);
CorrectorModel load_corrector(const std::filesystem::path& path);

double softplus(double x);
double softplus_inverse(double y);

}  // namespace bodyio
