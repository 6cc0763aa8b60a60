#pragma once

// EuRoC-style sequence files.
//
//   <seq>/imu.csv          timestamp_ns,wx,wy,wz,ax,ay,az
//   <seq>/groundtruth.csv  timestamp_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz,
//                          bwx,bwy,bwz,bax,bay,baz
//
// Timestamps are integer nanoseconds on disk and float64 seconds in memory,
// measured from the first IMU stamp of the sequence. Quaternions are
// Hamilton (w, x, y, z), body to world.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bodyio/simulator.hpp"

namespace bodyio {

struct GroundTruthRecord {
  std::int64_t t_ns = 0;
  Vec3 p = Vec3::Zero();
  Eigen::Vector4d q{1.0, 0.0, 0.0, 0.0};  // w, x, y, z
  Vec3 v = Vec3::Zero();
  Vec3 b_w = Vec3::Zero();
  Vec3 b_a = Vec3::Zero();
};

/// Reads imu.csv. A first line that does not start with a digit is taken as
/// the header. `first_stamp_ns` receives the anchor stamp (0 when empty).
/// Throws ErrorKind::Data on malformed rows (with line number) and on
/// non-increasing timestamps.
std::vector<ImuSample> load_imu_csv(const std::filesystem::path& path,
                                    std::int64_t* first_stamp_ns = nullptr);

/// Writes imu.csv with stamps t0_ns + round(t * 1e9) and 17 significant
/// digits per value.
void write_imu_csv(const std::filesystem::path& path,
                   const std::vector<ImuSample>& samples, std::int64_t t0_ns = 0);

/// Reads groundtruth.csv. Quaternions off unit norm by more than 1e-6 are
/// normalized; by more than 1e-3 a warning is appended to `warnings`; by
/// more than 1e-1 the row is rejected with ErrorKind::Data.
std::vector<GroundTruthRecord> load_groundtruth_csv(
    const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

void write_groundtruth_csv(const std::filesystem::path& path,
                           const std::vector<GroundTruthRecord>& records);

/// Ground-truth records for simulator output; stamps t0_ns + round(t * 1e9).
std::vector<GroundTruthRecord> groundtruth_from_trajectory(
    const std::vector<TrajectorySample>& truth, const std::vector<BiasState>& bias,
    std::int64_t t0_ns = 0);

/// Ground truth at `times` (seconds from `anchor_ns`): linear p and v,
/// shortest-arc slerp on the quaternion. a_world and w_body are zero. A
/// query that lands on a record returns it verbatim. Throws ErrorKind::Data
/// for queries outside the record span.
std::vector<TrajectorySample> interpolate_groundtruth(
    const std::vector<GroundTruthRecord>& gt, const std::vector<double>& times,
    std::int64_t anchor_ns);

enum class SplitMode { PerSequence, HoldOutSequences };

struct SplitSpec {
  double train_frac = 0.70;
  double val_frac = 0.15;
  double test_frac = 0.15;
  SplitMode mode = SplitMode::PerSequence;
  std::vector<std::string> holdout;  // HoldOutSequences only

  void validate() const;
};

using IndexRange = std::pair<std::size_t, std::size_t>;  // [first, last)

struct SplitRanges {
  IndexRange train, val, test;
};

/// Chronological split of an n-sample sequence: floor(train_frac n) train,
/// floor(val_frac n) validation, the remainder test. Under HoldOutSequences
/// a sequence named in `holdout` goes entirely to test.
SplitRanges split_sequence(const std::string& name, std::size_t n,
                           const SplitSpec& spec);

struct CorpusEntry {
  std::string name;
  std::string role;             // "seen" or "unseen"
  std::filesystem::path path;   // sequence directory
};

/// corpus.cfg: one "name role path" line per sequence; '#' starts a
/// comment. Relative paths resolve against the manifest's directory.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& manifest);
void write_corpus(const std::filesystem::path& manifest,
                  const std::vector<CorpusEntry>& entries);

/// IMU samples plus ground truth interpolated onto their stamps.
struct Sequence {
  std::string name;
  std::vector<ImuSample> imu;
  std::vector<TrajectorySample> truth;
  std::vector<BiasState> bias;  // from the ground-truth bias columns
};

Sequence load_sequence(const std::filesystem::path& dir, const std::string& name,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace bodyio
