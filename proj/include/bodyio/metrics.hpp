#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bodyio/lie.hpp"

namespace bodyio {

struct Pose {
  double t = 0.0;
  RotationSO3 r;
  Vec3 p = Vec3::Zero();
};

/// Truth and estimate on common timestamps.
struct AlignedPair {
  std::vector<Pose> truth;
  std::vector<Pose> estimate;

  /// Throws ErrorKind::Data unless both have the same length >= 2 and the
  /// stamps agree within 1e-9 s.
  void validate() const;
};

enum class AteAlignment {
  None,  // raw RMSE (default)
  Se3,   // best rigid fit of the estimate onto the truth first (Umeyama, no scale)
};

/// Position RMSE, by default without any alignment.
double ate(const AlignedPair& pair, AteAlignment alignment = AteAlignment::None);

/// Per-start-index residual norms
///   |(p[i+d] - p[i]) - R[i] Rhat[i]^T (phat[i+d] - phat[i])|
/// with d the sample count nearest to `interval` at the pair's mean rate.
/// Throws ErrorKind::Data when the span does not exceed `interval`.
std::vector<double> rte_residuals(const AlignedPair& pair, double interval = 5.0);

/// RMS of rte_residuals().
double rte(const AlignedPair& pair, double interval = 5.0);

/// Mean over thresholds tau_max * k / n (k = 1..n) of the fraction of RTE
/// residuals at or below the threshold. Throws ErrorKind::Argument when
/// tau_max <= 0 or n_thresholds < 1.
double accuracy_auc(const AlignedPair& pair, double interval, double tau_max,
                    int n_thresholds);
double accuracy_auc_from_residuals(const std::vector<double>& residuals,
                                   double tau_max, int n_thresholds);

/// 100 (baseline - method) / baseline. Throws ErrorKind::Argument when
/// baseline <= 0.
double improvement_percentage(double baseline_err, double method_err);

struct SequenceResult {
  std::string seq;
  double ate_m = 0.0;
  double rte_m = 0.0;
  double auc = 0.0;
  double vs_baseline_pct = 0.0;  // ATE improvement over dead reckoning
};

/// Per-sequence rows plus an unweighted-mean aggregate row named "mean"
/// (omitted when `results` is empty).
std::vector<SequenceResult> with_aggregate(const std::vector<SequenceResult>& results);

/// CSV with columns seq,ate_m,rte_m,auc,vs_baseline_pct.
std::string report_csv(const std::vector<SequenceResult>& rows);
/// Column-aligned text table of the same values, or "no sequences".
std::string report_text(const std::vector<SequenceResult>& rows);

}  // namespace bodyio
