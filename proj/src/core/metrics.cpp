#include "bodyio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Geometry>

#include "bodyio/error.hpp"
#include "csv_util.hpp"

namespace bodyio {

void AlignedPair::validate() const {
  if (truth.size() != estimate.size()) {
    fail(ErrorKind::Data, "aligned pair: truth has " + std::to_string(truth.size()) +
                              " poses, estimate " + std::to_string(estimate.size()));
  }
  if (truth.size() < 2) fail(ErrorKind::Data, "aligned pair: need at least 2 poses");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (std::abs(truth[i].t - estimate[i].t) > 1e-9) {
      fail(ErrorKind::Data, "aligned pair: timestamps differ at index " + std::to_string(i));
    }
  }
}

double ate(const AlignedPair& pair, AteAlignment alignment) {
  pair.validate();
  const auto n = static_cast<Eigen::Index>(pair.truth.size());
  Eigen::Matrix4d fit = Eigen::Matrix4d::Identity();
  if (alignment == AteAlignment::Se3) {
    Eigen::Matrix3Xd src(3, n), dst(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      src.col(i) = pair.estimate[i].p;
      dst.col(i) = pair.truth[i].p;
    }
    fit = Eigen::umeyama(src, dst, false);
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < pair.truth.size(); ++i) {
    const Vec3 p = fit.topLeftCorner<3, 3>() * pair.estimate[i].p + fit.topRightCorner<3, 1>();
    sq += (pair.truth[i].p - p).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(pair.truth.size()));
}

std::vector<double> rte_residuals(const AlignedPair& pair, double interval) {
  pair.validate();
  const auto& tr = pair.truth;
  const auto& est = pair.estimate;
  const double span = tr.back().t - tr.front().t;
  if (!(interval > 0) || span <= interval) {
    fail(ErrorKind::Data, "rte: sequence span " + csv::num(span, 6) +
                              " s does not exceed interval " + csv::num(interval, 6) + " s");
  }
  const double dt = span / static_cast<double>(tr.size() - 1);
  const auto d = static_cast<std::size_t>(std::max(1.0, std::round(interval / dt)));
  std::vector<double> out;
  if (d >= tr.size()) return out;
  out.reserve(tr.size() - d);
  for (std::size_t i = 0; i + d < tr.size(); ++i) {
    const Vec3 dp = tr[i + d].p - tr[i].p;
    const Vec3 dp_hat = est[i + d].p - est[i].p;
    const Mat3 align = tr[i].r.matrix() * est[i].r.matrix().transpose();
    out.push_back((dp - align * dp_hat).norm());
  }
  return out;
}

double rte(const AlignedPair& pair, double interval) {
  const auto res = rte_residuals(pair, interval);
  if (res.empty()) fail(ErrorKind::Data, "rte: no complete interval");
  double sq = 0.0;
  for (double r : res) sq += r * r;
  return std::sqrt(sq / static_cast<double>(res.size()));
}

double accuracy_auc_from_residuals(const std::vector<double>& residuals,
                                   double tau_max, int n_thresholds) {
  if (!(tau_max > 0)) fail(ErrorKind::Argument, "accuracy_auc: tau_max must be > 0");
  if (n_thresholds < 1) fail(ErrorKind::Argument, "accuracy_auc: need >= 1 threshold");
  if (residuals.empty()) fail(ErrorKind::Data, "accuracy_auc: no residuals");
  std::vector<double> sorted = residuals;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (int k = 1; k <= n_thresholds; ++k) {
    const double tau = tau_max * k / n_thresholds;
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), tau) - sorted.begin();
    sum += static_cast<double>(below) / static_cast<double>(sorted.size());
  }
  return sum / n_thresholds;
}

double accuracy_auc(const AlignedPair& pair, double interval, double tau_max,
                    int n_thresholds) {
  return accuracy_auc_from_residuals(rte_residuals(pair, interval), tau_max, n_thresholds);
}

double improvement_percentage(double baseline_err, double method_err) {
  if (!(baseline_err > 0)) {
    fail(ErrorKind::Argument, "improvement_percentage: baseline must be > 0");
  }
  return 100.0 * (baseline_err - method_err) / baseline_err;
}

std::vector<SequenceResult> with_aggregate(const std::vector<SequenceResult>& results) {
  std::vector<SequenceResult> rows = results;
  if (results.empty()) return rows;
  SequenceResult mean{"mean"};
  for (const auto& r : results) {
    mean.ate_m += r.ate_m;
    mean.rte_m += r.rte_m;
    mean.auc += r.auc;
    mean.vs_baseline_pct += r.vs_baseline_pct;
  }
  const auto n = static_cast<double>(results.size());
  mean.ate_m /= n;
  mean.rte_m /= n;
  mean.auc /= n;
  mean.vs_baseline_pct /= n;
  rows.push_back(mean);
  return rows;
}

namespace {

constexpr const char* kColumns[] = {"seq", "ate_m", "rte_m", "auc", "vs_baseline_pct"};

std::vector<std::string> cells(const SequenceResult& r) {
  return {r.seq, csv::num(r.ate_m, 6), csv::num(r.rte_m, 6), csv::num(r.auc, 6),
          csv::num(r.vs_baseline_pct, 6)};
}

}  // namespace

std::string report_csv(const std::vector<SequenceResult>& rows) {
  std::string out = "seq,ate_m,rte_m,auc,vs_baseline_pct\n";
  for (const auto& r : rows) {
    const auto c = cells(r);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out += ',';
      out += c[i];
    }
    out += '\n';
  }
  return out;
}

std::string report_text(const std::vector<SequenceResult>& rows) {
  if (rows.empty()) return "no sequences\n";
  std::vector<std::vector<std::string>> table;
  table.emplace_back(std::begin(kColumns), std::end(kColumns));
  for (const auto& r : rows) table.push_back(cells(r));
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(width[i] - row[i].size(), ' ');
      out += i == 0 ? row[i] + pad : "  " + pad + row[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace bodyio
