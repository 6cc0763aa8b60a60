#pragma once

#include <deque>
#include <filesystem>
#include <vector>

#include "bodyio/corrector.hpp"
#include "bodyio/motion_model.hpp"
#include "bodyio/preintegration.hpp"

namespace bodyio {

struct FilterState {
  NavState x;
  ErrorCovariance P;
  double t = 0.0;
};

struct EkfConfig {
  double update_rate = 20.0;        // Hz, velocity updates
  std::size_t buffer_len = 1000;    // FIFO length, samples
  Vec3 eta_bg = Vec3::Constant(1e-5);
  Vec3 eta_ba = Vec3::Constant(1e-4);
  /// Initial standard deviations, ordered like the error state.
  Vec15 initial_std = (Vec15() << Vec3::Constant(1e-3), Vec3::Constant(1e-2),
                       Vec3::Constant(1e-3), Vec3::Constant(1e-3),
                       Vec3::Constant(1e-4))
                          .finished();

  /// Throws ErrorKind::Config on nonpositive rates, empty buffer or
  /// negative stds.
  void validate() const;
  Mat15 initial_covariance() const;
};

/// Corrected-IMU prediction: applies the correction, then propagates state
/// and covariance with W from (eta_g, eta_a) of the correction and the
/// configured bias random walks. Throws ErrorKind::Argument when dt <= 0.
FilterState ekf_propagate(const FilterState& fs, const ImuSample& sample,
                          const CorrectionOutput& correction, double dt,
                          const EkfConfig& cfg, const GravityModel& g = {});

/// Jacobian of h(X) = R^T v: R^T at the velocity block, R^T [v]x at the
/// rotation block, zero elsewhere.
Eigen::Matrix<double, 3, 15> measurement_jacobian(const FilterState& fs);

/// Body-velocity update, innovation z - h(X), Joseph-form covariance.
/// Throws ErrorKind::Argument when any eta_v <= 0 and ErrorKind::Numerical
/// when the innovation covariance has condition number above 1e12.
FilterState ekf_update(const FilterState& fs, const VelocityMeasurement& z);

/// FIFO streaming runner.
///
/// Samples arrive one at a time. Frame 0 is the initial state. Every frame
/// k > 0 is reached by propagating sample k-1. A velocity update is due at
/// frame k once 1/update_rate seconds have passed since the previous one;
/// at that point the pending frames form one step batch: the corrector and
/// the provider run over the whole buffer, only the outputs of the pending
/// frames are consumed, and the provider's output for frame k drives the
/// update. The provider's attitude channel holds the propagated attitude of
/// each buffered frame (before its own update).
class StreamingEstimator {
 public:
  StreamingEstimator(VelocityProvider provider, CorrectorModel corrector,
                     EkfConfig cfg, const NavState& x0, const Mat15& p0,
                     const GravityModel& g = {});

  /// Queues one sample and returns the states finalized by it (empty while
  /// a step batch is still filling). Throws ErrorKind::Data on
  /// non-increasing timestamps.
  std::vector<FilterState> push(const ImuSample& sample);
  /// Processes any pending frames without an update.
  std::vector<FilterState> flush();

  /// Per-frame provider outputs consumed so far.
  std::size_t consumed_outputs() const { return consumed_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::vector<FilterState> process(bool update);

  VelocityProvider provider_;
  CorrectorModel corrector_;
  EkfConfig cfg_;
  GravityModel g_;
  FilterState state_;
  std::deque<ImuSample> buffer_;
  std::deque<RotationSO3> attitudes_;
  std::size_t next_index_ = 0;      // absolute index of the next sample
  std::size_t pending_ = 0;         // frames in the open step batch
  std::size_t consumed_ = 0;
  bool have_prev_ = false;
  ImuSample prev_sample_;
  CorrectionOutput prev_correction_;
  double last_update_t_ = 0.0;
};

/// Streams `samples` through a StreamingEstimator; one state per sample.
std::vector<FilterState> streaming_run(const std::vector<ImuSample>& samples,
                                       const VelocityProvider& provider,
                                       const CorrectorModel& corrector,
                                       const EkfConfig& cfg, const NavState& x0,
                                       const Mat15& p0,
                                       const GravityModel& g = {});

/// Offline reference for streaming_run(): corrections come from one pass
/// over the whole sequence and the provider sees the slice
/// [max(0, k + 1 - buffer_len), k + 1) of the full arrays at each update
/// frame k. Matches streaming_run() whenever the corrector's causal window
/// plus one step batch fits inside the buffer.
std::vector<FilterState> batch_run(const std::vector<ImuSample>& samples,
                                   const VelocityProvider& provider,
                                   const CorrectorModel& corrector,
                                   const EkfConfig& cfg, const NavState& x0,
                                   const Mat15& p0, const GravityModel& g = {});

/// Writes t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,tr_P with 9 significant digits.
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<FilterState>& states);

/// Reads a file written by write_trajectory_csv(). Only the trace of P is
/// stored, so P comes back as zero. Throws ErrorKind::Data on bad rows.
std::vector<FilterState> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace bodyio
