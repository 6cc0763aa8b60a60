#pragma once

// Run configuration: one JSON document with the sections simulator, noise,
// corrector, motion, ekf and eval plus a top-level seed. Unknown keys are
// rejected with their full path.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bodyio/corrector.hpp"
#include "bodyio/dataset_io.hpp"
#include "bodyio/ekf.hpp"
#include "bodyio/motion_model.hpp"
#include "bodyio/simulator.hpp"

namespace bodyio {

struct SimulatorSection {
  /// circle, figure8, lissajous3d, waypoint_spline, or mixed (cycles the
  /// four shapes over the corpus).
  std::string kind = "mixed";
  /// follow_velocity, spin, fixed, or mixed (cycles the three).
  std::string yaw_mode = "mixed";
  TrajectorySpec base = default_base();
  int sequences = 24;
  int unseen = 4;          // the last `unseen` sequences are test-only
  bool randomize = true;   // per-sequence amplitude, rate, phase and heading

  static TrajectorySpec default_base();
};

struct CorrectorSection {
  std::string kind = "identity";  // identity or affine
  double eta_g = 1.4142135623730951e-2;  // rad/s, matches noise.sigma_g at 200 Hz
  double eta_a = 1.4142135623730951e-1;  // m/s^2
  CorrectorTrainConfig train;
};

struct MotionSection {
  MotionNetConfig net;
  MotionTrainConfig train;
  LossConfig loss;
  int stride = 200;  // frames between training windows
};

struct EkfSection {
  EkfConfig filter;
  std::string provider = "network";  // network, oracle or zero
  double oracle_noise = 0.05;        // m/s
  double zero_eta = 0.1;             // m/s
};

struct EvalSection {
  double rte_interval = 5.0;  // s
  double tau_max = 1.0;       // m
  int n_thresholds = 100;
  std::string segment = "all";
  std::string ate_alignment = "none";  // none, or se3 (rigid fit before ATE)  // all, or test (split range of seen sequences)
  SplitSpec split;
};

struct RunConfig {
  std::uint64_t seed = 0;
  SimulatorSection simulator;
  NoiseSpec noise = default_noise();
  CorrectorSection corrector;
  MotionSection motion;
  EkfSection ekf;
  EvalSection eval;

  static NoiseSpec default_noise();

  /// Cross-field checks; throws ErrorKind::Config naming the key.
  void validate() const;
};

/// Parses a JSON document over the defaults. Throws ErrorKind::Config with
/// the key path on unknown keys, wrong types or invalid values.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Sets one value by dotted path ("motion.latent_dim") from JSON text.
void set_config_value(RunConfig& cfg, const std::string& key_path,
                      const std::string& json_value);

/// Pretty JSON of every key.
std::string dump_config(const RunConfig& cfg);

/// "section.key = value" lines for the given sections ("" for top level).
std::vector<std::string> describe_keys(const RunConfig& cfg,
                                       const std::vector<std::string>& sections);

TrajectoryKind trajectory_kind_from_string(const std::string& name);
YawMode yaw_mode_from_string(const std::string& name);

}  // namespace bodyio
