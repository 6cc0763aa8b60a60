#include "bodyio/dataset_io.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "bodyio/error.hpp"
#include "csv_util.hpp"

namespace bodyio {

namespace {

constexpr const char* kImuHeader = "timestamp_ns,wx,wy,wz,ax,ay,az";
constexpr const char* kGroundTruthHeader =
    "timestamp_ns,px,py,pz,qw,qx,qy,qz,vx,vy,vz,bwx,bwy,bwz,bax,bay,baz";

bool is_header(std::string_view line) {
  line = csv::trim(line);
  return line.empty() ||
         !(std::isdigit(static_cast<unsigned char>(line.front())) || line.front() == '-');
}

double seconds_since(std::int64_t t_ns, std::int64_t anchor_ns) {
  return static_cast<double>(t_ns - anchor_ns) / 1e9;
}

std::int64_t to_ns(double t, std::int64_t t0_ns) {
  return t0_ns + std::llround(t * 1e9);
}

// Reads data rows of a CSV with a fixed column count; calls `row` with the
// fields and line number.
template <typename RowFn>
void read_rows(const std::filesystem::path& path, std::size_t columns, RowFn row) {
  const std::string name = path.string();
  auto in = csv::open_in(name);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (first) {
      first = false;
      if (is_header(line)) continue;
    }
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != columns) {
      csv::parse_error(name, line_no,
                       "expected " + std::to_string(columns) + " fields, got " +
                           std::to_string(fields.size()));
    }
    row(fields, line_no);
  }
}

}  // namespace

std::vector<ImuSample> load_imu_csv(const std::filesystem::path& path,
                                    std::int64_t* first_stamp_ns) {
  const std::string name = path.string();
  std::vector<ImuSample> out;
  std::int64_t anchor = 0;
  std::int64_t last = 0;
  read_rows(path, 7, [&](const auto& f, std::size_t line_no) {
    const auto ns = csv::parse_number<std::int64_t>(f[0], name, line_no);
    if (out.empty()) {
      anchor = ns;
    } else if (ns <= last) {
      csv::parse_error(name, line_no, "timestamps must increase");
    }
    last = ns;
    ImuSample s;
    s.t = seconds_since(ns, anchor);
    for (int i = 0; i < 3; ++i) {
      s.w[i] = csv::parse_number<double>(f[1 + i], name, line_no);
      s.a[i] = csv::parse_number<double>(f[4 + i], name, line_no);
    }
    out.push_back(s);
  });
  if (first_stamp_ns) *first_stamp_ns = anchor;
  return out;
}

void write_imu_csv(const std::filesystem::path& path,
                   const std::vector<ImuSample>& samples, std::int64_t t0_ns) {
  auto out = csv::open_out(path.string());
  out << kImuHeader << '\n';
  for (const auto& s : samples) {
    out << to_ns(s.t, t0_ns);
    for (int i = 0; i < 3; ++i) out << ',' << csv::num(s.w[i], 17);
    for (int i = 0; i < 3; ++i) out << ',' << csv::num(s.a[i], 17);
    out << '\n';
  }
  if (!out) fail(ErrorKind::Data, "failed writing " + path.string());
}

std::vector<GroundTruthRecord> load_groundtruth_csv(
    const std::filesystem::path& path, std::vector<std::string>* warnings) {
  const std::string name = path.string();
  std::vector<GroundTruthRecord> out;
  read_rows(path, 17, [&](const auto& f, std::size_t line_no) {
    GroundTruthRecord r;
    r.t_ns = csv::parse_number<std::int64_t>(f[0], name, line_no);
    if (!out.empty() && r.t_ns <= out.back().t_ns) {
      csv::parse_error(name, line_no, "timestamps must increase");
    }
    double v[16];
    for (int i = 0; i < 16; ++i) v[i] = csv::parse_number<double>(f[1 + i], name, line_no);
    r.p = {v[0], v[1], v[2]};
    r.q = {v[3], v[4], v[5], v[6]};
    r.v = {v[7], v[8], v[9]};
    r.b_w = {v[10], v[11], v[12]};
    r.b_a = {v[13], v[14], v[15]};
    const double dev = std::abs(r.q.norm() - 1.0);
    if (dev > 1e-1 || !std::isfinite(dev)) {
      csv::parse_error(name, line_no, "quaternion norm off by " + csv::num(dev, 3));
    }
    if (dev > 1e-3 && warnings) {
      warnings->push_back(name + ":" + std::to_string(line_no) +
                          ": quaternion normalized (norm off by " + csv::num(dev, 3) + ")");
    }
    if (dev > 1e-6) r.q.normalize();
    out.push_back(r);
  });
  return out;
}

void write_groundtruth_csv(const std::filesystem::path& path,
                           const std::vector<GroundTruthRecord>& records) {
  auto out = csv::open_out(path.string());
  out << kGroundTruthHeader << '\n';
  for (const auto& r : records) {
    out << r.t_ns;
    auto put = [&](const auto& vec) {
      for (Eigen::Index i = 0; i < vec.size(); ++i) out << ',' << csv::num(vec[i], 17);
    };
    put(r.p);
    put(r.q);
    put(r.v);
    put(r.b_w);
    put(r.b_a);
    out << '\n';
  }
  if (!out) fail(ErrorKind::Data, "failed writing " + path.string());
}

std::vector<GroundTruthRecord> groundtruth_from_trajectory(
    const std::vector<TrajectorySample>& truth, const std::vector<BiasState>& bias,
    std::int64_t t0_ns) {
  if (!bias.empty() && bias.size() != truth.size()) {
    fail(ErrorKind::Argument, "groundtruth_from_trajectory: bias length mismatch");
  }
  std::vector<GroundTruthRecord> out;
  out.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    GroundTruthRecord r;
    r.t_ns = to_ns(truth[i].t, t0_ns);
    r.p = truth[i].p;
    r.q = truth[i].r.quaternion();
    r.v = truth[i].v;
    if (!bias.empty()) {
      r.b_w = bias[i].b_g;
      r.b_a = bias[i].b_a;
    }
    out.push_back(r);
  }
  return out;
}

namespace {

// Bracketing record index and blend weight for a query in seconds.
struct Bracket {
  std::size_t lo = 0;
  double alpha = 0.0;  // 0 selects lo exactly
};

Bracket bracket(const std::vector<GroundTruthRecord>& gt, double t,
                std::int64_t anchor_ns) {
  const double first = seconds_since(gt.front().t_ns, anchor_ns);
  const double last = seconds_since(gt.back().t_ns, anchor_ns);
  if (t < first || t > last) {
    fail(ErrorKind::Data, "ground truth does not cover t = " + csv::num(t, 12) +
                              " s (span " + csv::num(first, 12) + " .. " +
                              csv::num(last, 12) + ")");
  }
  const auto it = std::lower_bound(
      gt.begin(), gt.end(), t, [&](const GroundTruthRecord& r, double q) {
        return seconds_since(r.t_ns, anchor_ns) < q;
      });
  const auto hi = static_cast<std::size_t>(it - gt.begin());
  if (seconds_since(gt[hi].t_ns, anchor_ns) == t) return {hi, 0.0};
  const double t0 = seconds_since(gt[hi - 1].t_ns, anchor_ns);
  const double t1 = seconds_since(gt[hi].t_ns, anchor_ns);
  return {hi - 1, (t - t0) / (t1 - t0)};
}

}  // namespace

std::vector<TrajectorySample> interpolate_groundtruth(
    const std::vector<GroundTruthRecord>& gt, const std::vector<double>& times,
    std::int64_t anchor_ns) {
  if (gt.empty()) fail(ErrorKind::Data, "interpolate_groundtruth: no records");
  std::vector<TrajectorySample> out;
  out.reserve(times.size());
  for (const double t : times) {
    const Bracket b = bracket(gt, t, anchor_ns);
    const GroundTruthRecord& r0 = gt[b.lo];
    TrajectorySample s;
    s.t = t;
    if (b.alpha == 0.0) {
      s.p = r0.p;
      s.v = r0.v;
      s.r = RotationSO3::from_quaternion(r0.q[0], r0.q[1], r0.q[2], r0.q[3]);
    } else {
      const GroundTruthRecord& r1 = gt[b.lo + 1];
      s.p = (1.0 - b.alpha) * r0.p + b.alpha * r1.p;
      s.v = (1.0 - b.alpha) * r0.v + b.alpha * r1.v;
      const Eigen::Quaterniond q0(r0.q[0], r0.q[1], r0.q[2], r0.q[3]);
      const Eigen::Quaterniond q1(r1.q[0], r1.q[1], r1.q[2], r1.q[3]);
      const Eigen::Quaterniond q = q0.slerp(b.alpha, q1).normalized();
      s.r = RotationSO3::from_quaternion(q.w(), q.x(), q.y(), q.z());
    }
    out.push_back(s);
  }
  return out;
}

void SplitSpec::validate() const {
  if (train_frac < 0 || val_frac < 0 || test_frac < 0 ||
      std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    fail(ErrorKind::Config, "split fractions must be >= 0 and sum to 1");
  }
}

SplitRanges split_sequence(const std::string& name, std::size_t n,
                           const SplitSpec& spec) {
  spec.validate();
  if (spec.mode == SplitMode::HoldOutSequences &&
      std::find(spec.holdout.begin(), spec.holdout.end(), name) != spec.holdout.end()) {
    return {{0, 0}, {0, 0}, {0, n}};
  }
  const double dn = static_cast<double>(n);
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_frac * dn + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(spec.val_frac * dn + 1e-9));
  const std::size_t a = std::min(n, n_train);
  const std::size_t b = std::min(n, a + n_val);
  return {{0, a}, {a, b}, {b, n}};
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& manifest) {
  const std::string name = manifest.string();
  auto in = csv::open_in(name);
  const auto base = manifest.parent_path();
  std::vector<CorpusEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    CorpusEntry e;
    std::string path, extra;
    if (!(fields >> e.name)) continue;
    if (!(fields >> e.role >> path) || (fields >> extra)) {
      csv::parse_error(name, line_no, "expected 'name role path'");
    }
    if (e.role != "seen" && e.role != "unseen") {
      csv::parse_error(name, line_no, "role must be 'seen' or 'unseen'");
    }
    e.path = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base / path;
    out.push_back(std::move(e));
  }
  return out;
}

void write_corpus(const std::filesystem::path& manifest,
                  const std::vector<CorpusEntry>& entries) {
  auto out = csv::open_out(manifest.string());
  out << "# name role path\n";
  for (const auto& e : entries) {
    out << e.name << ' ' << e.role << ' ' << e.path.generic_string() << '\n';
  }
  if (!out) fail(ErrorKind::Data, "failed writing " + manifest.string());
}

Sequence load_sequence(const std::filesystem::path& dir, const std::string& name,
                       std::vector<std::string>* warnings) {
  Sequence seq;
  seq.name = name;
  std::int64_t anchor = 0;
  seq.imu = load_imu_csv(dir / "imu.csv", &anchor);
  const auto gt = load_groundtruth_csv(dir / "groundtruth.csv", warnings);
  std::vector<double> times;
  times.reserve(seq.imu.size());
  for (const auto& s : seq.imu) times.push_back(s.t);
  seq.truth = interpolate_groundtruth(gt, times, anchor);
  seq.bias.reserve(times.size());
  for (const double t : times) {
    const Bracket b = bracket(gt, t, anchor);
    const auto& r0 = gt[b.lo];
    const auto& r1 = b.alpha == 0.0 ? r0 : gt[b.lo + 1];
    seq.bias.push_back({(1.0 - b.alpha) * r0.b_w + b.alpha * r1.b_w,
                        (1.0 - b.alpha) * r0.b_a + b.alpha * r1.b_a});
  }
  return seq;
}

}  // namespace bodyio
