#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "bodyio/analysis.hpp"
#include "bodyio/error.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bodyio;

namespace {

FeatureMatrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  FeatureMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  return m;
}

// Cumulative eigenvalue fractions of the sample covariance.
std::vector<double> eigen_oracle(const FeatureMatrix& f) {
  const Eigen::MatrixXd c = f.rowwise() - f.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(f.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + cov.rows());
  std::sort(ev.rbegin(), ev.rend());
  const double total = std::accumulate(ev.begin(), ev.end(), 0.0);
  std::vector<double> out;
  double run = 0.0;
  for (double e : ev) out.push_back((run += std::max(e, 0.0)) / total);
  return out;
}

std::vector<ImuWindow> windows(int count, int length, std::uint64_t seed) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::Lissajous3D;
  s.yaw_mode = YawMode::Spin;
  s.duration = count * length / s.imu_rate + 0.1;
  NoiseSpec n;
  n.sigma_a = 0.01;
  n.seed = seed;
  const auto imu = corrupt_imu(derive_imu(generate_trajectory(s)), n, s.imu_rate).samples;
  std::vector<ImuWindow> out(count);
  for (int w = 0; w < count; ++w)
    out[w].samples.assign(imu.begin() + w * length, imu.begin() + (w + 1) * length);
  return out;
}

MotionNetConfig body_net(int latent) {
  MotionNetConfig c;
  c.latent_dim = latent;
  c.representation = RepresentationKind::Body;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("rank-one data has all energy in the first component") {
  Rng rng(1);
  const Eigen::RowVectorXd dir = gaussian(rng, 1, 6);
  const Eigen::RowVectorXd mean = gaussian(rng, 1, 6);
  FeatureMatrix f(50, 6);
  for (int i = 0; i < 50; ++i) f.row(i) = mean + rng.normal() * dir;
  const auto c = pca_cumulative_variance(f);
  REQUIRE(c.size() == 6);
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(components_for_energy(c, 0.95) == 1);
}

TEST_CASE("isotropic data spreads energy evenly") {
  Rng rng(2);
  const auto c = pca_cumulative_variance(gaussian(rng, 100000, 8));
  double prev = 0.0;
  for (double x : c) {
    CHECK(std::abs((x - prev) - 1.0 / 8) < 0.02);
    prev = x;
  }
}

TEST_CASE("exact rank-k data") {
  Rng rng(3);
  const FeatureMatrix f = gaussian(rng, 400, 5) * gaussian(rng, 5, 32);
  const auto c = pca_cumulative_variance(f);
  REQUIRE(c.size() == 32);
  CHECK(c[4] >= 0.999);
  CHECK(c[3] < 0.999);
  CHECK(components_for_energy(c, 0.999) <= 5);
}

TEST_CASE("spectrum is nondecreasing and ends at one") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const FeatureMatrix f = gaussian(rng, 30, 10) * gaussian(rng, 10, 10);
    for (bool standardize : {false, true}) {
      const auto c = pca_cumulative_variance(f, standardize);
      for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] >= c[i - 1]);
      CHECK(std::abs(c.back() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("row permutation and duplication leave the spectrum unchanged") {
  Rng rng(5);
  const FeatureMatrix f = gaussian(rng, 40, 6) * gaussian(rng, 6, 6);
  const auto base = pca_cumulative_variance(f);

  Eigen::PermutationMatrix<Eigen::Dynamic> perm(f.rows());
  perm.setIdentity();
  std::reverse(perm.indices().data(), perm.indices().data() + f.rows());
  const auto permuted = pca_cumulative_variance(perm * f);

  FeatureMatrix doubled(2 * f.rows(), f.cols());
  doubled << f, f;
  const auto dup = pca_cumulative_variance(doubled);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(std::abs(permuted[i] - base[i]) < 1e-12);
    CHECK(std::abs(dup[i] - base[i]) < 1e-12);
  }
}

TEST_CASE("agrees with the covariance eigen-decomposition") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index rows = 20 + trial * 2, cols = 4 + trial % 12;
    const FeatureMatrix f = gaussian(rng, rows, cols) * gaussian(rng, cols, cols);
    const auto a = pca_cumulative_variance(f);
    const auto b = eigen_oracle(f);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_CASE("degenerate inputs") {
  FeatureMatrix constant = FeatureMatrix::Constant(10, 4, 3.0);
  try {
    (void)pca_cumulative_variance(constant);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
  CHECK_THROWS_AS(pca_cumulative_variance(FeatureMatrix::Ones(1, 4)), Error);
}

TEST_CASE("latent collection shape and determinism") {
  const MotionNetModel model(body_net(64));
  auto w = windows(3, 40, 1);
  const FeatureMatrix f = collect_latents(model, w);
  CHECK(f.rows() == 120);
  CHECK(f.cols() == 64);
  CHECK(f.allFinite());
  w.push_back(w[0]);
  const FeatureMatrix g = collect_latents(model, w);
  CHECK(g.block(120, 0, 40, 64) == g.block(0, 0, 40, 64));
  CHECK(collect_latents(model, w) == g);

  ImuWindow wrong = w[0];
  wrong.kind = RepresentationKind::Global;
  CHECK_THROWS_AS(collect_latents(model, {wrong}), Error);
}

TEST_CASE("zero-weight model yields identical rows") {
  MotionNetModel model(body_net(64));
  for (auto* p : model.parameters()) p->value.setZero();
  const FeatureMatrix f = collect_latents(model, windows(2, 30, 2));
  for (Eigen::Index i = 1; i < f.rows(); ++i) CHECK(f.row(i) == f.row(0));
}

TEST_CASE("spectrum csv layout") {
  test::TempDir dir("analysis");
  write_spectrum_csv(dir / "spectrum.csv", {{"Body", {0.5, 0.9, 1.0}}, {"Global", {0.4, 1.0}}});
  std::ifstream f(dir / "spectrum.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(f, line)) lines.push_back(line);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "representation,k,cumulative_fraction");
  CHECK(lines[1].rfind("Body,1,0.5", 0) == 0);
  CHECK(lines[5].rfind("Global,2,1", 0) == 0);
}
