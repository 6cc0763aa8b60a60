#pragma once

// Subcommand implementations shared by the C API and the tests.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bodyio/analysis.hpp"
#include "bodyio/config.hpp"
#include "bodyio/metrics.hpp"

namespace bodyio {

enum class LogLevel { Info = 0, Warning = 1 };
using LogSink = std::function<void(LogLevel, const std::string&)>;

struct SimulatedSequence {
  std::string name;
  std::string role;  // seen or unseen
  TrajectorySpec spec;
  std::vector<TrajectorySample> truth;
  std::vector<ImuSample> imu;  // corrupted
  std::vector<BiasState> bias;
};

/// Sequence `index` of the corpus described by `cfg`; a pure function of
/// (cfg, index).
SimulatedSequence simulate_sequence(const RunConfig& cfg, int index);

/// Writes <out_dir>/corpus.cfg and one EuRoC-style directory per sequence.
void run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  const LogSink& log = {});

/// Open-loop integration from the ground-truth initial state.
void run_deadreckon(const RunConfig& cfg, const std::filesystem::path& seq_dir,
                    const std::optional<std::filesystem::path>& corrector,
                    const std::filesystem::path& out_csv, const LogSink& log = {});

/// Fits the affine corrector on the training split of the seen sequences.
void run_train_corrector(const RunConfig& cfg, const std::filesystem::path& corpus,
                         const std::filesystem::path& out, const LogSink& log = {});

/// Trains the motion network on the training split of the seen sequences,
/// validating on their validation split. `report_csv` receives
/// epoch,train_loss,val_loss,learning_rate.
MotionTrainReport run_train_motion(const RunConfig& cfg,
                                   const std::filesystem::path& corpus,
                                   const std::filesystem::path& out,
                                   const std::optional<std::filesystem::path>& report_csv,
                                   const LogSink& log = {});

/// Streams one sequence through the filter with the provider named by
/// cfg.ekf.provider.
void run_ekf(const RunConfig& cfg, const std::filesystem::path& seq_dir,
             const std::optional<std::filesystem::path>& motion_model,
             const std::optional<std::filesystem::path>& corrector,
             const std::filesystem::path& out_csv, const LogSink& log = {});

/// Scores <estimates_dir>/<seq>.csv for every corpus sequence that has one.
/// Returns the per-sequence rows followed by the aggregate row.
std::vector<SequenceResult> run_eval(const RunConfig& cfg,
                                     const std::filesystem::path& corpus,
                                     const std::filesystem::path& estimates_dir,
                                     const std::optional<std::filesystem::path>& out_csv,
                                     const LogSink& log = {});

/// Latent spectra of each model over the corpus evaluation windows.
std::vector<Spectrum> run_analyze(const RunConfig& cfg,
                                  const std::filesystem::path& corpus,
                                  const std::vector<std::filesystem::path>& models,
                                  const std::filesystem::path& out_csv,
                                  const LogSink& log = {});

}  // namespace bodyio
