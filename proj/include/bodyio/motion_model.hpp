#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "bodyio/imu.hpp"
#include "bodyio/nn.hpp"
#include "bodyio/simulator.hpp"

namespace bodyio {

/// Network (or oracle) velocity output for one frame.
struct VelocityMeasurement {
  double t = 0.0;
  Vec3 v_body = Vec3::Zero();               // m/s
  Vec3 eta_v = Vec3::Constant(1.0);         // m/s, per-axis std, > 0
};

struct MotionNetConfig {
  int latent_dim = 64;                       // one of 256, 128, 64 (8 for tests)
  int gru_layers = 2;                        // bidirectional
  std::vector<int> imu_encoder_channels{32};
  std::vector<int> attitude_encoder_channels{16, 16};
  double dropout_p = 0.5;
  int window = 200;                          // training window, frames
  RepresentationKind representation = RepresentationKind::BodyPlusAttitude;
  std::uint64_t seed = 0;                    // weight initialization

  /// latent_dim must be 256, 128 or 64 unless `allow_small_latent` (tests).
  void validate(bool allow_small_latent = false) const;
};

struct LossConfig {
  double delta = 0.005;   // Huber threshold, m/s
  double lambda = 1e-4;   // covariance-loss weight
};

/// Sum over the three axes of the per-axis Huber loss:
/// e^2/2 for |e| < delta, delta (|e| - delta/2) otherwise.
double huber_loss(const Vec3& pred, const Vec3& truth, double delta);

/// e^T Sigma^-1 e + ln det Sigma with Sigma = diag(eta^2). Throws
/// ErrorKind::Argument when any eta <= 0.
double covariance_loss(const Vec3& pred, const Vec3& truth, const Vec3& eta);

/// Mean over the batch of huber + lambda * covariance.
double combined_loss(std::span<const Vec3> pred, std::span<const Vec3> truth,
                     std::span<const Vec3> eta, const LossConfig& cfg);

/// One training window with its per-frame velocity target (body frame for
/// body representations, world frame for global ones).
struct MotionExample {
  ImuWindow window;
  std::vector<Vec3> target;
};

/// Conv encoders -> stacked bidirectional GRU -> two MLP heads.
///
/// Inputs are scaled before the encoders: gyro as-is (rad/s), accelerometer
/// divided by 9.80665, attitude divided by pi. The IMU encoder is
/// conv(6 -> c...) -> conv(-> latent_dim), each followed by SiLU, then
/// dropout; its output is the latent tap used for representation analysis.
/// The attitude encoder (attitude kinds only) mirrors it without the final
/// latent projection. GRU hidden size per direction is latent_dim / 2.
/// Heads: linear(latent -> latent) SiLU linear(-> 3); the velocity head's
/// last layer starts at zero. eta = clamp(exp(raw), 1e-4, 1e2).
class MotionNetModel {
 public:
  explicit MotionNetModel(const MotionNetConfig& cfg,
                          bool allow_small_latent = false);

  const MotionNetConfig& config() const { return cfg_; }

  /// Evaluation-mode inference (no dropout); one output per input frame.
  /// Throws ErrorKind::Argument on representation mismatch or missing
  /// attitudes.
  std::vector<VelocityMeasurement> forward(const ImuWindow& window) const;

  /// IMU-encoder output (latent_dim x T) for one window.
  Eigen::MatrixXd encode_imu(const ImuWindow& window) const;

  /// Loss over a batch of equal-length windows; accumulates gradients into
  /// the parameters (after zeroing them) when `accumulate_grad` is set.
  /// `dropout_rng` enables dropout (training mode) when non-null.
  double loss_and_gradient(std::span<const MotionExample* const> batch,
                           const LossConfig& loss, bool accumulate_grad,
                           Rng* dropout_rng);

  std::vector<nn::Param*> parameters();
  std::size_t parameter_count();

  void save(const std::filesystem::path& path) const;
  static MotionNetModel load(const std::filesystem::path& path);

  MotionNetModel(const MotionNetModel& other);
  MotionNetModel& operator=(const MotionNetModel& other);
  MotionNetModel(MotionNetModel&&) noexcept;
  MotionNetModel& operator=(MotionNetModel&&) noexcept;
  ~MotionNetModel();

 private:
  struct Net;
  MotionNetConfig cfg_;
  std::unique_ptr<Net> net_;
};

struct MotionTrainConfig {
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 1e-3;
  int patience = 5;             // epochs without validation improvement
  double decay = 0.2;           // learning-rate factor on plateau
  std::uint64_t seed = 0;       // shuffling and dropout
};

struct MotionTrainReport {
  std::vector<double> train_loss;   // per epoch (mean over batches)
  std::vector<double> val_loss;     // per epoch
  std::vector<double> learning_rate;
  int best_epoch = -1;
};

/// Adam + reduce-on-plateau; returns the best-validation checkpoint.
/// Throws ErrorKind::Argument on empty datasets or mixed window lengths.
MotionNetModel train_motion_model(const std::vector<MotionExample>& train,
                                  const std::vector<MotionExample>& val,
                                  const MotionNetConfig& net_cfg,
                                  const LossConfig& loss_cfg,
                                  const MotionTrainConfig& train_cfg,
                                  MotionTrainReport* report = nullptr,
                                  bool allow_small_latent = false);

/// Mean loss of `model` over `data` in evaluation mode.
double evaluate_loss(MotionNetModel& model,
                     const std::vector<MotionExample>& data,
                     const LossConfig& loss_cfg);

/// RMS of the per-frame velocity error norm.
double velocity_rmse(const MotionNetModel& model,
                     const std::vector<MotionExample>& data);

/// Cuts a sequence into windows of `window` frames every `stride` frames,
/// in representation `kind`. Rotations come from `rotations` (ground truth
/// for training); targets are R^T v for body kinds and v for global kinds,
/// using the ground-truth attitude. Trailing frames that do not fill a
/// window are dropped.
std::vector<MotionExample> make_motion_examples(
    const std::vector<ImuSample>& imu,
    const std::vector<TrajectorySample>& truth,
    std::span<const RotationSO3> rotations, RepresentationKind kind,
    std::size_t window, std::size_t stride);

/// Ground-truth velocity seam: v_body = R^T v_world + N(0, noise_std^2) per
/// axis, eta = max(noise_std, 1e-4). Draws come from Rng(seed) in sample
/// order, x y z.
std::vector<VelocityMeasurement> oracle_predict(
    const std::vector<TrajectorySample>& truth, double noise_std,
    std::uint64_t seed);

struct OracleProvider {
  std::vector<VelocityMeasurement> measurements;  // indexed by frame
};

struct NetworkProvider {
  std::shared_ptr<const MotionNetModel> model;
};

struct ConstantZeroProvider {
  double eta = 0.1;  // m/s
};

using VelocityProvider =
    std::variant<OracleProvider, NetworkProvider, ConstantZeroProvider>;

/// Body-frame velocity for every frame of a Body-representation window.
/// `attitudes` (same length) are the current attitude estimates, used by
/// the network for attitude and gravity-removed representations.
/// `first_index` is the absolute frame index of samples[0] (oracle lookup).
std::vector<VelocityMeasurement> predict_velocity(
    const VelocityProvider& provider, std::span<const ImuSample> samples,
    std::span<const RotationSO3> attitudes, std::size_t first_index);

}  // namespace bodyio
