#include "bodyio/analysis.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "bodyio/error.hpp"
#include "csv_util.hpp"

namespace bodyio {

FeatureMatrix collect_latents(const MotionNetModel& model,
                              const std::vector<ImuWindow>& windows) {
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::Index rows = 0;
  for (const auto& w : windows) {
    blocks.push_back(model.encode_imu(w));
    rows += blocks.back().cols();
  }
  FeatureMatrix out(rows, model.config().latent_dim);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.cols()) = b.transpose();
    r += b.cols();
  }
  return out;
}

std::vector<double> pca_cumulative_variance(const FeatureMatrix& features,
                                            bool standardize) {
  if (features.rows() < 2) fail(ErrorKind::Argument, "pca: need at least 2 rows");
  if (!features.allFinite()) fail(ErrorKind::Numerical, "pca: non-finite features");
  Eigen::MatrixXd x = features.rowwise() - features.colwise().mean();
  x /= std::sqrt(static_cast<double>(features.rows() - 1));
  if (standardize) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double n = x.col(c).norm();
      if (n > 0) x.col(c) /= n;
    }
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(x);
  const Eigen::VectorXd energy = svd.singularValues().array().square();
  const double total = energy.sum();
  if (!(total > 0)) fail(ErrorKind::Numerical, "pca: degenerate spectrum (no variance)");
  std::vector<double> out(static_cast<std::size_t>(energy.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < energy.size(); ++i) {
    acc += energy[i];
    out[static_cast<std::size_t>(i)] = std::min(1.0, acc / total);
  }
  return out;
}

std::size_t components_for_energy(const std::vector<double>& cumulative,
                                  double energy) {
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    if (cumulative[i] >= energy) return i + 1;
  }
  return cumulative.size();
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<Spectrum>& spectra) {
  auto out = csv::open_out(path.string());
  out << "representation,k,cumulative_fraction\n";
  for (const auto& s : spectra) {
    for (std::size_t k = 0; k < s.cumulative.size(); ++k) {
      out << s.representation << ',' << k + 1 << ',' << csv::num(s.cumulative[k], 12)
          << '\n';
    }
  }
  if (!out) fail(ErrorKind::Data, "failed writing " + path.string());
}

}  // namespace bodyio
