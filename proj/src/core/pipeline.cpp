#include "bodyio/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "bodyio/analysis.hpp"
#include "bodyio/error.hpp"
#include "bodyio/random.hpp"
#include "csv_util.hpp"

namespace bodyio {

namespace fs = std::filesystem;

namespace {

// Anchor of the simulated clocks; sequences are 100 s apart.
constexpr std::int64_t kEpochNs = 1'600'000'000'000'000'000LL;
constexpr std::int64_t kSequenceGapNs = 100'000'000'000LL;

void note(const LogSink& log, LogLevel level, const std::string& msg) {
  if (log) log(level, msg);
}

bool is_mixed(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name == "mixed";
}

std::string sequence_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%03d", index);
  return buf;
}

std::vector<RotationSO3> rotations_of(const std::vector<TrajectorySample>& truth,
                                      std::size_t first = 0,
                                      std::size_t last = static_cast<std::size_t>(-1)) {
  last = std::min(last, truth.size());
  std::vector<RotationSO3> out;
  out.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) out.push_back(truth[i].r);
  return out;
}

template <typename T>
std::vector<T> slice(const std::vector<T>& v, IndexRange r) {
  return {v.begin() + static_cast<std::ptrdiff_t>(r.first),
          v.begin() + static_cast<std::ptrdiff_t>(r.second)};
}

NavState initial_state(const Sequence& seq) {
  if (seq.truth.empty()) fail(ErrorKind::Data, seq.name + ": empty sequence");
  NavState x0;
  x0.r = seq.truth.front().r;
  x0.v = seq.truth.front().v;
  x0.p = seq.truth.front().p;
  return x0;
}

CorrectorModel make_corrector(const RunConfig& cfg, const std::optional<fs::path>& path) {
  if (path) return load_corrector(*path);
  if (cfg.corrector.kind == "affine")
    fail(ErrorKind::Config, "corrector.kind is 'affine' but no corrector weights were given");
  return IdentityCorrector(cfg.corrector.eta_g, cfg.corrector.eta_a);
}

// Range of a corpus sequence that is scored or analysed.
IndexRange evaluation_range(const RunConfig& cfg, const CorpusEntry& e, std::size_t n) {
  if (cfg.eval.segment == "test" && e.role == "seen")
    return split_sequence(e.name, n, cfg.eval.split).test;
  return {0, n};
}

std::vector<Pose> poses_of(const std::vector<TrajectorySample>& truth) {
  std::vector<Pose> out;
  out.reserve(truth.size());
  for (const auto& s : truth) out.push_back({s.t, s.r, s.p});
  return out;
}

// Estimate file in either trajectory or ground-truth layout, as poses.
std::vector<Pose> load_estimate(const fs::path& path, std::int64_t anchor_ns) {
  std::string first;
  {
    auto in = csv::open_in(path.string());
    std::getline(in, first);
  }
  std::vector<Pose> out;
  if (csv::trim(first).starts_with("timestamp_ns")) {
    for (const auto& rec : load_groundtruth_csv(path)) {
      const Eigen::Vector4d q = rec.q.normalized();
      out.push_back({static_cast<double>(rec.t_ns - anchor_ns) / 1e9,
                     RotationSO3::from_quaternion(q[0], q[1], q[2], q[3]), rec.p});
    }
  } else {
    for (const auto& s : read_trajectory_csv(path)) out.push_back({s.t, s.x.r, s.x.p});
  }
  return out;
}

}  // namespace

SimulatedSequence simulate_sequence(const RunConfig& cfg, int index) {
  if (index < 0 || index >= cfg.simulator.sequences)
    fail(ErrorKind::Argument, "sequence index out of range");
  static constexpr TrajectoryKind kKinds[] = {
      TrajectoryKind::Circle, TrajectoryKind::Figure8, TrajectoryKind::Lissajous3D,
      TrajectoryKind::WaypointSpline};
  static constexpr YawMode kYaws[] = {YawMode::FollowVelocity, YawMode::Spin,
                                      YawMode::Fixed};

  TrajectorySpec spec = cfg.simulator.base;
  spec.kind = is_mixed(cfg.simulator.kind) ? kKinds[index % 4]
                                            : trajectory_kind_from_string(cfg.simulator.kind);
  spec.yaw_mode = is_mixed(cfg.simulator.yaw_mode)
                      ? kYaws[(index / 4) % 3]
                      : yaw_mode_from_string(cfg.simulator.yaw_mode);
  if (cfg.simulator.randomize) {
    Rng rng(mix_seed(cfg.seed, 0x5100 + static_cast<std::uint64_t>(index)));
    spec.amplitude *= rng.uniform(0.5, 1.5);
    spec.angular_rate *= rng.uniform(0.5, 1.5);
    spec.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    spec.spin_rate *= rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    spec.yaw0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    spec.tilt_rate *= rng.uniform(0.5, 1.5);
  }

  SimulatedSequence out;
  out.name = sequence_name(index);
  out.role = index >= cfg.simulator.sequences - cfg.simulator.unseen ? "unseen" : "seen";
  out.spec = spec;
  out.truth = generate_trajectory(spec);
  NoiseSpec noise = cfg.noise;
  noise.seed = mix_seed(cfg.seed, 0x6100 + static_cast<std::uint64_t>(index));
  auto corrupted = corrupt_imu(derive_imu(out.truth), noise, spec.imu_rate);
  out.imu = std::move(corrupted.samples);
  out.bias = std::move(corrupted.bias_truth);
  return out;
}

void run_simulate(const RunConfig& cfg, const fs::path& out_dir, const LogSink& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  std::vector<CorpusEntry> entries;
  for (int i = 0; i < cfg.simulator.sequences; ++i) {
    const auto seq = simulate_sequence(cfg, i);
    const fs::path dir = out_dir / seq.name;
    fs::create_directories(dir);
    const std::int64_t t0 = kEpochNs + i * kSequenceGapNs;
    write_imu_csv(dir / "imu.csv", seq.imu, t0);
    write_groundtruth_csv(dir / "groundtruth.csv",
                          groundtruth_from_trajectory(seq.truth, seq.bias, t0));
    entries.push_back({seq.name, seq.role, seq.name});
    note(log, LogLevel::Info,
         seq.name + " (" + seq.role + "): " + std::to_string(seq.imu.size()) + " samples");
  }
  write_corpus(out_dir / "corpus.cfg", entries);
}

void run_deadreckon(const RunConfig& cfg, const fs::path& seq_dir,
                    const std::optional<fs::path>& corrector, const fs::path& out_csv,
                    const LogSink& log) {
  cfg.validate();
  std::vector<std::string> warnings;
  const auto seq = load_sequence(seq_dir, seq_dir.filename().string(), &warnings);
  for (const auto& w : warnings) note(log, LogLevel::Warning, w);
  const auto states = dead_reckon(initial_state(seq), seq.imu, make_corrector(cfg, corrector));
  std::vector<FilterState> rows(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) rows[i] = {states[i], {}, seq.imu[i].t};
  write_trajectory_csv(out_csv, rows);
  note(log, LogLevel::Info, "wrote " + std::to_string(rows.size()) + " states");
}

void run_train_corrector(const RunConfig& cfg, const fs::path& corpus, const fs::path& out,
                         const LogSink& log) {
  cfg.validate();
  std::vector<CorrectorExample> data;
  for (const auto& e : load_corpus(corpus)) {
    if (e.role != "seen") continue;
    const auto seq = load_sequence(e.path, e.name);
    const auto train = split_sequence(e.name, seq.imu.size(), cfg.eval.split).train;
    for (std::size_t s = train.first; s + kDefaultWindowLength <= train.second;
         s += kDefaultWindowLength) {
      CorrectorExample ex;
      ex.window.samples = slice(seq.imu, {s, s + kDefaultWindowLength});
      ex.bias = slice(seq.bias, {s, s + kDefaultWindowLength});
      data.push_back(std::move(ex));
    }
  }
  if (data.empty()) fail(ErrorKind::Data, "no training windows in the seen sequences");
  std::vector<double> history;
  const auto model = train_corrector(data, cfg.corrector.train, &history);
  save_corrector(model, out);
  note(log, LogLevel::Info,
       "corrector: " + std::to_string(data.size()) + " windows, loss " +
           csv::num(history.front(), 6) + " -> " + csv::num(history.back(), 6));
}

MotionTrainReport run_train_motion(const RunConfig& cfg, const fs::path& corpus,
                                   const fs::path& out,
                                   const std::optional<fs::path>& report_csv,
                                   const LogSink& log) {
  cfg.validate();
  const auto& net = cfg.motion.net;
  const auto window = static_cast<std::size_t>(net.window);
  std::vector<MotionExample> train, val;
  for (const auto& e : load_corpus(corpus)) {
    if (e.role != "seen") continue;
    const auto seq = load_sequence(e.path, e.name);
    const auto ranges = split_sequence(e.name, seq.imu.size(), cfg.eval.split);
    auto add = [&](std::vector<MotionExample>& dst, IndexRange r, std::size_t stride) {
      const auto ex = make_motion_examples(slice(seq.imu, r), slice(seq.truth, r),
                                           rotations_of(seq.truth, r.first, r.second),
                                           net.representation, window, stride);
      dst.insert(dst.end(), ex.begin(), ex.end());
    };
    add(train, ranges.train, static_cast<std::size_t>(cfg.motion.stride));
    add(val, ranges.val, window);
  }
  if (train.empty() || val.empty())
    fail(ErrorKind::Data, "corpus yields no training or validation windows");
  note(log, LogLevel::Info,
       std::to_string(train.size()) + " training and " + std::to_string(val.size()) +
           " validation windows");

  MotionNetConfig net_cfg = net;
  net_cfg.seed = mix_seed(cfg.seed, 0x7100);
  MotionTrainConfig train_cfg = cfg.motion.train;
  train_cfg.seed = mix_seed(cfg.seed, 0x7200);
  MotionTrainReport report;
  const auto model =
      train_motion_model(train, val, net_cfg, cfg.motion.loss, train_cfg, &report);
  model.save(out);
  for (std::size_t i = 0; i < report.train_loss.size(); ++i) {
    note(log, LogLevel::Info,
         "epoch " + std::to_string(i + 1) + " train " + csv::num(report.train_loss[i], 6) +
             " val " + csv::num(report.val_loss[i], 6));
  }
  if (report_csv) {
    auto f = csv::open_out(report_csv->string());
    f << "epoch,train_loss,val_loss,learning_rate\n";
    for (std::size_t i = 0; i < report.train_loss.size(); ++i) {
      f << i + 1 << ',' << csv::num(report.train_loss[i], 9) << ','
        << csv::num(report.val_loss[i], 9) << ',' << csv::num(report.learning_rate[i], 9)
        << '\n';
    }
  }
  return report;
}

void run_ekf(const RunConfig& cfg, const fs::path& seq_dir,
             const std::optional<fs::path>& motion_model,
             const std::optional<fs::path>& corrector, const fs::path& out_csv,
             const LogSink& log) {
  cfg.validate();
  std::vector<std::string> warnings;
  const std::string name = seq_dir.filename().string();
  const auto seq = load_sequence(seq_dir, name, &warnings);
  for (const auto& w : warnings) note(log, LogLevel::Warning, w);

  VelocityProvider provider;
  if (cfg.ekf.provider == "oracle") {
    const auto key = std::hash<std::string>{}(name);
    provider = OracleProvider{oracle_predict(seq.truth, cfg.ekf.oracle_noise,
                                             mix_seed(cfg.seed, key))};
  } else if (cfg.ekf.provider == "zero") {
    provider = ConstantZeroProvider{cfg.ekf.zero_eta};
  } else {
    if (!motion_model) fail(ErrorKind::Config, "ekf.provider 'network' needs a motion model");
    provider = NetworkProvider{
        std::make_shared<const MotionNetModel>(MotionNetModel::load(*motion_model))};
  }
  const auto states =
      streaming_run(seq.imu, provider, make_corrector(cfg, corrector), cfg.ekf.filter,
                    initial_state(seq), cfg.ekf.filter.initial_covariance());
  write_trajectory_csv(out_csv, states);
  note(log, LogLevel::Info, name + ": " + std::to_string(states.size()) + " states");
}

std::vector<SequenceResult> run_eval(const RunConfig& cfg, const fs::path& corpus,
                                     const fs::path& estimates_dir,
                                     const std::optional<fs::path>& out_csv,
                                     const LogSink& log) {
  cfg.validate();
  std::vector<SequenceResult> rows;
  for (const auto& e : load_corpus(corpus)) {
    const fs::path est_path = estimates_dir / (e.name + ".csv");
    if (!fs::exists(est_path)) {
      note(log, LogLevel::Warning, e.name + ": no estimate, skipped");
      continue;
    }
    std::int64_t anchor = 0;
    load_imu_csv(e.path / "imu.csv", &anchor);
    const auto seq = load_sequence(e.path, e.name);
    const auto estimate = load_estimate(est_path, anchor);
    const auto range = evaluation_range(cfg, e, seq.truth.size());
    const auto baseline =
        dead_reckon(initial_state(seq), seq.imu,
                    IdentityCorrector(cfg.corrector.eta_g, cfg.corrector.eta_a));

    AlignedPair method, reference;
    const auto truth = poses_of(seq.truth);
    std::size_t j = 0;
    for (const auto& pose : estimate) {
      const double tol = 1e-8 * std::max(1.0, std::abs(pose.t));
      while (j < truth.size() && truth[j].t < pose.t - tol) ++j;
      if (j == truth.size() || std::abs(truth[j].t - pose.t) > tol)
        fail(ErrorKind::Data, est_path.string() + ": stamp " + csv::num(pose.t, 12) +
                                  " has no ground-truth sample");
      if (j < range.first || j >= range.second) continue;
      method.truth.push_back(truth[j]);
      method.estimate.push_back({truth[j].t, pose.r, pose.p});
      reference.truth.push_back(truth[j]);
      reference.estimate.push_back({truth[j].t, baseline[j].r, baseline[j].p});
    }
    method.validate();
    SequenceResult r;
    r.seq = e.name;
    const AteAlignment align =
        cfg.eval.ate_alignment == "se3" ? AteAlignment::Se3 : AteAlignment::None;
    r.ate_m = ate(method, align);
    const auto residuals = rte_residuals(method, cfg.eval.rte_interval);
    double sq = 0.0;
    for (double x : residuals) sq += x * x;
    r.rte_m = std::sqrt(sq / static_cast<double>(residuals.size()));
    r.auc = accuracy_auc_from_residuals(residuals, cfg.eval.tau_max, cfg.eval.n_thresholds);
    const double base = ate(reference, align);
    r.vs_baseline_pct = base > 0.0 ? improvement_percentage(base, r.ate_m) : 0.0;
    rows.push_back(r);
  }
  auto all = with_aggregate(rows);
  if (out_csv) {
    auto f = csv::open_out(out_csv->string());
    f << report_csv(all);
  }
  return all;
}

std::vector<Spectrum> run_analyze(const RunConfig& cfg, const fs::path& corpus,
                                  const std::vector<fs::path>& models,
                                  const fs::path& out_csv, const LogSink& log) {
  cfg.validate();
  if (models.empty()) fail(ErrorKind::Argument, "analyze needs at least one model");
  std::vector<Sequence> seqs;
  std::vector<IndexRange> ranges;
  for (const auto& e : load_corpus(corpus)) {
    seqs.push_back(load_sequence(e.path, e.name));
    ranges.push_back(evaluation_range(cfg, e, seqs.back().imu.size()));
  }
  std::vector<Spectrum> spectra;
  for (const auto& path : models) {
    const auto model = MotionNetModel::load(path);
    const auto kind = model.config().representation;
    const auto window = static_cast<std::size_t>(model.config().window);
    std::vector<ImuWindow> windows;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const auto r = ranges[i];
      for (auto& ex : make_motion_examples(slice(seqs[i].imu, r), slice(seqs[i].truth, r),
                                           rotations_of(seqs[i].truth, r.first, r.second),
                                           kind, window, window))
        windows.push_back(std::move(ex.window));
    }
    if (windows.empty()) fail(ErrorKind::Data, "corpus yields no analysis windows");
    const FeatureMatrix features = collect_latents(model, windows);
    if (features.rows() < features.cols()) {
      note(log, LogLevel::Warning,
           path.string() + ": only " + std::to_string(features.rows()) + " latent rows for " +
               std::to_string(features.cols()) + " dimensions; spectrum is rank-limited");
    }
    Spectrum s{std::string(to_string(kind)), pca_cumulative_variance(features)};
    note(log, LogLevel::Info,
         s.representation + ": " + std::to_string(components_for_energy(s.cumulative, 0.95)) +
             " of " + std::to_string(s.cumulative.size()) + " components for 95% variance");
    spectra.push_back(std::move(s));
  }
  write_spectrum_csv(out_csv, spectra);
  return spectra;
}

}  // namespace bodyio
