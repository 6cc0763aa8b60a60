#include "bodyio/ekf.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "bodyio/error.hpp"
#include "csv_util.hpp"

namespace bodyio {

namespace {

constexpr double kMaxInnovationCondition = 1e12;
// Slack on the update period so that k / rate timestamps trigger on time.
constexpr double kUpdateTimeSlack = 1e-6;

bool update_due(double t, double last, double rate) {
  return t - last >= 1.0 / rate - kUpdateTimeSlack;
}

}  // namespace

void EkfConfig::validate() const {
  if (!(update_rate > 0.0)) fail(ErrorKind::Config, "ekf.update_rate must be > 0");
  if (buffer_len < 1) fail(ErrorKind::Config, "ekf.buffer_len must be >= 1");
  if ((eta_bg.array() < 0).any() || (eta_ba.array() < 0).any()) {
    fail(ErrorKind::Config, "ekf bias random-walk stds must be >= 0");
  }
  if ((initial_std.array() < 0).any() || !initial_std.allFinite()) {
    fail(ErrorKind::Config, "ekf.initial_std entries must be finite and >= 0");
  }
}

Mat15 EkfConfig::initial_covariance() const {
  return initial_std.array().square().matrix().asDiagonal();
}

FilterState ekf_propagate(const FilterState& fs, const ImuSample& sample,
                          const CorrectionOutput& correction, double dt,
                          const EkfConfig& cfg, const GravityModel& g) {
  if (!(dt > 0.0)) fail(ErrorKind::Argument, "ekf_propagate: dt must be > 0");
  const ImuSample corrected = apply_correction(sample, correction);
  ProcessNoise noise;
  noise.eta_g = correction.eta_g;
  noise.eta_a = correction.eta_a;
  noise.eta_bg = cfg.eta_bg;
  noise.eta_ba = cfg.eta_ba;
  const auto jac = propagation_jacobians(fs.x, corrected, dt);
  FilterState out;
  out.x = propagate_state(fs.x, corrected, dt, g);
  out.P = propagate_covariance(fs.P, jac.A, jac.B, noise_covariance(noise));
  out.t = fs.t + dt;
  return out;
}

Eigen::Matrix<double, 3, 15> measurement_jacobian(const FilterState& fs) {
  Eigen::Matrix<double, 3, 15> h = Eigen::Matrix<double, 3, 15>::Zero();
  const Mat3 rt = fs.x.r.matrix().transpose();
  h.block<3, 3>(0, err::kVel) = rt;
  h.block<3, 3>(0, err::kRot) = rt * hat(fs.x.v);
  return h;
}

FilterState ekf_update(const FilterState& fs, const VelocityMeasurement& z) {
  if (!(z.eta_v.array() > 0).all()) {
    fail(ErrorKind::Argument, "ekf_update: eta_v must be > 0");
  }
  const auto h = measurement_jacobian(fs);
  const Mat3 noise = z.eta_v.array().square().matrix().asDiagonal();
  const Mat3 s = h * fs.P.P * h.transpose() + noise;
  const Eigen::JacobiSVD<Mat3> svd(s);
  const Vec3 sv = svd.singularValues();
  if (!sv.allFinite() || sv[2] <= 0.0 || sv[0] / sv[2] > kMaxInnovationCondition) {
    fail(ErrorKind::Numerical, "ekf_update: innovation covariance is singular");
  }
  const Eigen::Matrix<double, 15, 3> k = fs.P.P * h.transpose() * s.inverse();
  const Vec3 innovation = z.v_body - fs.x.r.matrix().transpose() * fs.x.v;
  FilterState out;
  out.t = fs.t;
  out.x = retract(fs.x, k * innovation);
  const Mat15 i_kh = Mat15::Identity() - k * h;
  const Mat15 p = i_kh * fs.P.P * i_kh.transpose() + k * noise * k.transpose();
  out.P.P = 0.5 * (p + p.transpose());
  return out;
}

// ------------------------------------------------------------------ streaming

StreamingEstimator::StreamingEstimator(VelocityProvider provider,
                                       CorrectorModel corrector, EkfConfig cfg,
                                       const NavState& x0, const Mat15& p0,
                                       const GravityModel& g)
    : provider_(std::move(provider)),
      corrector_(std::move(corrector)),
      cfg_(std::move(cfg)),
      g_(g) {
  cfg_.validate();
  state_.x = x0;
  state_.P.P = p0;
}

std::vector<FilterState> StreamingEstimator::push(const ImuSample& sample) {
  const double last_t = buffer_.empty() ? 0.0 : buffer_.back().t;
  if (next_index_ > 0 && !(sample.t > last_t)) {
    fail(ErrorKind::Data, "streaming: timestamps must increase (frame " +
                              std::to_string(next_index_) + ")");
  }
  if (next_index_ == 0) last_update_t_ = sample.t;
  buffer_.push_back(sample);
  if (buffer_.size() > cfg_.buffer_len) {
    buffer_.pop_front();
    attitudes_.pop_front();
  }
  ++next_index_;
  ++pending_;
  if (next_index_ > 1 && update_due(sample.t, last_update_t_, cfg_.update_rate)) {
    return process(true);
  }
  if (pending_ == cfg_.buffer_len) return process(false);
  return {};
}

std::vector<FilterState> StreamingEstimator::flush() {
  return pending_ > 0 ? process(false) : std::vector<FilterState>{};
}

std::vector<FilterState> StreamingEstimator::process(bool update) {
  const ImuWindow window{{buffer_.begin(), buffer_.end()}, {}, RepresentationKind::Body};
  const auto corrections = correct_and_quantify(corrector_, window);
  const std::size_t first_new = buffer_.size() - pending_;
  std::vector<FilterState> out;
  out.reserve(pending_);
  for (std::size_t j = first_new; j < buffer_.size(); ++j) {
    const ImuSample& s = buffer_[j];
    if (have_prev_) {
      state_ = ekf_propagate(state_, prev_sample_, prev_correction_,
                             s.t - prev_sample_.t, cfg_, g_);
    }
    state_.t = s.t;
    attitudes_.push_back(state_.x.r);
    prev_sample_ = s;
    prev_correction_ = corrections[j];
    have_prev_ = true;
    if (j + 1 < buffer_.size() || !update) out.push_back(state_);
  }
  if (update) {
    const std::vector<RotationSO3> att(attitudes_.begin(), attitudes_.end());
    const std::size_t first_index = next_index_ - buffer_.size();
    const auto outputs =
        predict_velocity(provider_, window.samples, att, first_index);
    consumed_ += pending_;
    state_ = ekf_update(state_, outputs.back());
    last_update_t_ = state_.t;
    out.push_back(state_);
  }
  pending_ = 0;
  return out;
}

std::vector<FilterState> streaming_run(const std::vector<ImuSample>& samples,
                                       const VelocityProvider& provider,
                                       const CorrectorModel& corrector,
                                       const EkfConfig& cfg, const NavState& x0,
                                       const Mat15& p0, const GravityModel& g) {
  StreamingEstimator est(provider, corrector, cfg, x0, p0, g);
  std::vector<FilterState> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    for (auto& fs : est.push(s)) out.push_back(std::move(fs));
  }
  for (auto& fs : est.flush()) out.push_back(std::move(fs));
  return out;
}

std::vector<FilterState> batch_run(const std::vector<ImuSample>& samples,
                                   const VelocityProvider& provider,
                                   const CorrectorModel& corrector,
                                   const EkfConfig& cfg, const NavState& x0,
                                   const Mat15& p0, const GravityModel& g) {
  cfg.validate();
  if (samples.empty()) return {};
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      fail(ErrorKind::Data, "batch_run: timestamps must increase (frame " +
                                std::to_string(i) + ")");
    }
  }
  const auto corrections =
      correct_and_quantify(corrector, {samples, {}, RepresentationKind::Body});
  std::vector<FilterState> out;
  out.reserve(samples.size());
  std::vector<RotationSO3> attitudes;
  attitudes.reserve(samples.size());
  FilterState fs{x0, {p0}, samples.front().t};
  double last_update = samples.front().t;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (k > 0) {
      fs = ekf_propagate(fs, samples[k - 1], corrections[k - 1],
                         samples[k].t - samples[k - 1].t, cfg, g);
      fs.t = samples[k].t;
    }
    attitudes.push_back(fs.x.r);
    if (k > 0 && update_due(samples[k].t, last_update, cfg.update_rate)) {
      const std::size_t begin = k + 1 > cfg.buffer_len ? k + 1 - cfg.buffer_len : 0;
      const std::span<const ImuSample> slice(samples.data() + begin, k + 1 - begin);
      const std::span<const RotationSO3> att(attitudes.data() + begin, k + 1 - begin);
      const auto outputs = predict_velocity(provider, slice, att, begin);
      fs = ekf_update(fs, outputs.back());
      last_update = fs.t;
    }
    out.push_back(fs);
  }
  return out;
}

// ------------------------------------------------------------------ files

namespace {
constexpr const char* kTrajectoryHeader = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,tr_P";
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<FilterState>& states) {
  auto out = csv::open_out(path.string());
  out << kTrajectoryHeader << '\n';
  for (const auto& s : states) {
    const Eigen::Vector4d q = s.x.r.quaternion();
    const double fields[] = {s.t,  s.x.p.x(), s.x.p.y(), s.x.p.z(),
                             q[0], q[1],      q[2],      q[3],
                             s.x.v.x(), s.x.v.y(), s.x.v.z(), s.P.P.trace()};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out << ',';
      out << csv::num(fields[i], 9);
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::Data, "failed writing " + path.string());
}

std::vector<FilterState> read_trajectory_csv(const std::filesystem::path& path) {
  const std::string name = path.string();
  auto in = csv::open_in(name);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || csv::trim(line) != kTrajectoryHeader) {
    csv::parse_error(name, line_no, "expected header " + std::string(kTrajectoryHeader));
  }
  std::vector<FilterState> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 12) csv::parse_error(name, line_no, "expected 12 fields");
    double v[12];
    for (int i = 0; i < 12; ++i) v[i] = csv::parse_number<double>(f[i], name, line_no);
    FilterState s;
    s.t = v[0];
    s.x.p = {v[1], v[2], v[3]};
    const double qn = std::sqrt(v[4] * v[4] + v[5] * v[5] + v[6] * v[6] + v[7] * v[7]);
    if (!(qn > 0.5)) csv::parse_error(name, line_no, "degenerate quaternion");
    s.x.r = RotationSO3::from_quaternion(v[4] / qn, v[5] / qn, v[6] / qn, v[7] / qn);
    s.x.v = {v[8], v[9], v[10]};
    out.push_back(s);
  }
  return out;
}

}  // namespace bodyio
