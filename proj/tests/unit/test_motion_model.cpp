#include <cmath>

#include "bodyio/error.hpp"
#include "bodyio/motion_model.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bodyio;

namespace {

struct Run {
  std::vector<TrajectorySample> truth;
  std::vector<ImuSample> imu;
  std::vector<RotationSO3> rotations;
};

Run simulated(TrajectoryKind kind, double duration, double tilt = 0.2) {
  TrajectorySpec s;
  s.kind = kind;
  s.yaw_mode = YawMode::Spin;
  s.duration = duration;
  s.tilt_amplitude = tilt;
  Run r;
  r.truth = generate_trajectory(s);
  r.imu = derive_imu(r.truth);
  for (const auto& x : r.truth) r.rotations.push_back(x.r);
  return r;
}

MotionNetConfig tiny_net(RepresentationKind kind = RepresentationKind::BodyPlusAttitude) {
  MotionNetConfig c;
  c.latent_dim = 8;
  c.imu_encoder_channels = {6};
  c.attitude_encoder_channels = {4, 4};
  c.representation = kind;
  c.seed = 3;
  return c;
}

double huber_scalar(double e, double delta) {
  return huber_loss(Vec3(e, 0, 0), Vec3::Zero(), delta);
}

}  // namespace

TEST_CASE("huber loss examples") {
  CHECK(huber_loss(Vec3::Zero(), Vec3::Zero(), 0.005) == 0.0);
  CHECK(huber_scalar(0.001, 0.005) == doctest::Approx(5e-7).epsilon(1e-12));
  CHECK(huber_scalar(0.01, 0.005) == doctest::Approx(3.75e-5).epsilon(1e-12));
  // Axes sum.
  CHECK(huber_loss(Vec3(0.001, -0.01, 0), Vec3::Zero(), 0.005) ==
        doctest::Approx(5e-7 + 3.75e-5).epsilon(1e-12));
}

TEST_CASE("huber loss is continuously differentiable at the threshold") {
  const double d = 0.005, h = 1e-9;
  for (double sign : {1.0, -1.0}) {
    const double e = sign * d;
    const double left = (huber_scalar(e, d) - huber_scalar(e - h, d)) / h;
    const double right = (huber_scalar(e + h, d) - huber_scalar(e, d)) / h;
    CHECK(std::abs(left - sign * d) < 1e-9);
    CHECK(std::abs(right - sign * d) < 1e-9);
    CHECK(huber_scalar(e * (1 - 1e-12), d) == doctest::Approx(huber_scalar(e, d)).epsilon(1e-10));
  }
}

TEST_CASE("covariance loss examples") {
  CHECK(covariance_loss(Vec3::Zero(), Vec3::Zero(), Vec3::Ones()) == 0.0);
  CHECK(covariance_loss(Vec3(1, 0, 0), Vec3::Zero(), Vec3::Ones()) == doctest::Approx(1.0));
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vec3 e = test::random_vec(rng);
    const Vec3 eta = test::random_vec(rng).cwiseAbs() + Vec3::Constant(0.1);
    double direct = 0;
    for (int k = 0; k < 3; ++k) direct += e[k] * e[k] / (eta[k] * eta[k]) + std::log(eta[k] * eta[k]);
    CHECK(covariance_loss(e, Vec3::Zero(), eta) == doctest::Approx(direct).epsilon(1e-13));
  }
  CHECK_THROWS_AS(covariance_loss(Vec3::Zero(), Vec3::Zero(), Vec3(1, 0, 1)), Error);
}

TEST_CASE("covariance loss is minimized at eta squared equal to e squared") {
  const Vec3 e(0.3, -0.05, 1.2);
  const Vec3 best = e.cwiseAbs();
  const double at_best = covariance_loss(e, Vec3::Zero(), best);
  for (int k = 0; k < 3; ++k) {
    for (double f : {0.9, 0.99, 1.01, 1.1}) {
      Vec3 eta = best;
      eta[k] *= f;
      CHECK(covariance_loss(e, Vec3::Zero(), eta) > at_best);
    }
    // First-order condition.
    const double h = 1e-6 * best[k];
    Vec3 up = best, down = best;
    up[k] += h;
    down[k] -= h;
    const double grad =
        (covariance_loss(e, Vec3::Zero(), up) - covariance_loss(e, Vec3::Zero(), down)) / (2 * h);
    CHECK(std::abs(grad) < 1e-6);
  }
}

TEST_CASE("combined loss examples") {
  LossConfig cfg;
  const std::vector<Vec3> pred{Vec3(0.01, 0, 0)}, truth{Vec3::Zero()}, eta{Vec3::Ones()};
  // Huber 3.75e-5 plus 1e-4 times Mahalanobis 1e-4.
  CHECK(combined_loss(pred, truth, eta, cfg) ==
        doctest::Approx(3.75e-5 + 1e-4 * 1e-4).epsilon(1e-12));

  const std::vector<Vec3> unit{Vec3(1, 0, 0)};
  const double huber_unit = huber_loss(unit[0], Vec3::Zero(), cfg.delta);
  CHECK(combined_loss(unit, truth, eta, cfg) == doctest::Approx(huber_unit + 1e-4).epsilon(1e-14));

  LossConfig no_cov;
  no_cov.lambda = 0;
  Rng rng(2);
  std::vector<Vec3> p, t, s;
  for (int i = 0; i < 2; ++i) {
    p.push_back(test::random_vec(rng, 0.02));
    t.push_back(test::random_vec(rng, 0.02));
    s.push_back(test::random_vec(rng).cwiseAbs() + Vec3::Constant(0.1));
  }
  CHECK(combined_loss(p, t, s, no_cov) ==
        doctest::Approx((huber_loss(p[0], t[0], 0.005) + huber_loss(p[1], t[1], 0.005)) / 2)
            .epsilon(1e-14));
  const double pair = combined_loss(p, t, s, cfg);
  const double mean = (combined_loss({&p[0], 1}, {&t[0], 1}, {&s[0], 1}, cfg) +
                       combined_loss({&p[1], 1}, {&t[1], 1}, {&s[1], 1}, cfg)) /
                      2;
  CHECK(std::abs(pair - mean) <= 1e-15);

  const std::vector<Vec3> two(2, Vec3::Zero());
  CHECK_THROWS_AS(combined_loss(two, truth, eta, cfg), Error);
}

TEST_CASE("forward contract") {
  const Run run = simulated(TrajectoryKind::Figure8, 2.0);
  const auto ex = make_motion_examples(run.imu, run.truth, run.rotations,
                                       RepresentationKind::BodyPlusAttitude, 100, 100);
  REQUIRE(ex.size() == 4);
  CHECK(ex[0].window.attitudes.size() == 100);

  const MotionNetModel model(tiny_net(), true);
  const auto out = model.forward(ex[0].window);
  REQUIRE(out.size() == 100);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK((out[i].eta_v.array() > 0).all());
    CHECK(out[i].v_body.norm() == 0.0);  // zero-initialized velocity head
    CHECK(out[i].t == ex[0].window.samples[i].t);
  }
  const auto again = model.forward(ex[0].window);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].eta_v == out[i].eta_v);

  ImuWindow missing = ex[0].window;
  missing.attitudes.clear();
  CHECK_THROWS_AS(model.forward(missing), Error);
  ImuWindow wrong = ex[0].window;
  wrong.kind = RepresentationKind::Global;
  CHECK_THROWS_AS(model.forward(wrong), Error);
}

TEST_CASE("config validation") {
  MotionNetConfig c;
  CHECK_NOTHROW(c.validate());
  c.latent_dim = 8;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(c.validate(true));
  c.latent_dim = 64;
  c.dropout_p = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("analytic gradients match finite differences") {
  const Run run = simulated(TrajectoryKind::Lissajous3D, 0.5);
  auto ex = make_motion_examples(run.imu, run.truth, run.rotations,
                                 RepresentationKind::BodyPlusAttitude, 12, 12);
  REQUIRE(ex.size() >= 2);
  ex.resize(2);
  MotionNetModel model(tiny_net(), true);

  // Move off the zero-initialized head so every parameter sees a gradient.
  Rng rng(9);
  for (auto* p : model.parameters())
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value(i) += 0.1 * rng.normal();

  LossConfig loss;
  loss.lambda = 0.1;
  const std::vector<const MotionExample*> batch{&ex[0], &ex[1]};
  model.loss_and_gradient(batch, loss, true, nullptr);

  const double h = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0;
  for (auto* p : model.parameters()) {
    const nn::Matrix analytic = p->grad;
    // Every entry of small tensors, a strided sample of larger ones.
    const Eigen::Index step = std::max<Eigen::Index>(1, p->value.size() / 12);
    for (Eigen::Index i = 0; i < p->value.size(); i += step) {
      const double saved = p->value(i);
      p->value(i) = saved + h;
      const double up = model.loss_and_gradient(batch, loss, false, nullptr);
      p->value(i) = saved - h;
      const double down = model.loss_and_gradient(batch, loss, false, nullptr);
      p->value(i) = saved;
      const double fd = (up - down) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(analytic(i)), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic(i)) / scale);
      ++checked;
    }
  }
  CHECK(checked > 100);
  CHECK(worst < 1e-3);
}

TEST_CASE("overfits ten windows") {
  const Run run = simulated(TrajectoryKind::Figure8, 2.5);
  auto ex = make_motion_examples(run.imu, run.truth, run.rotations,
                                 RepresentationKind::BodyPlusAttitude, 50, 50);
  REQUIRE(ex.size() == 10);
  MotionNetConfig net;
  net.dropout_p = 0.0;
  net.window = 50;
  net.seed = 1;
  // One window per step; no plateau decay.
  MotionTrainConfig train;
  train.epochs = 200;
  train.batch_size = 1;
  train.patience = 1000;
  MotionTrainReport report;
  const auto model = train_motion_model(ex, ex, net, {}, train, &report);
  CHECK(report.train_loss.size() == 200);
  CHECK(velocity_rmse(model, ex) < 0.05);
}

TEST_CASE("training is bit-reproducible under a fixed seed") {
  const Run run = simulated(TrajectoryKind::Circle, 3.0);
  const auto ex = make_motion_examples(run.imu, run.truth, run.rotations,
                                       RepresentationKind::BodyPlusAttitude, 50, 25);
  MotionNetConfig net = tiny_net();
  MotionTrainConfig train;
  train.epochs = 3;
  train.batch_size = 4;
  train.seed = 11;
  auto a = train_motion_model(ex, ex, net, {}, train, nullptr, true);
  auto b = train_motion_model(ex, ex, net, {}, train, nullptr, true);
  const auto pa = a.parameters(), pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

TEST_CASE("training rejects empty and mixed-length data") {
  const Run run = simulated(TrajectoryKind::Circle, 1.0);
  auto ex = make_motion_examples(run.imu, run.truth, run.rotations,
                                 RepresentationKind::BodyPlusAttitude, 50, 50);
  const MotionNetConfig net = tiny_net();
  CHECK_THROWS_AS(train_motion_model({}, ex, net, {}, {}, nullptr, true), Error);
  CHECK_THROWS_AS(train_motion_model(ex, {}, net, {}, {}, nullptr, true), Error);
  auto mixed = ex;
  mixed[0].window.samples.pop_back();
  mixed[0].window.attitudes.pop_back();
  mixed[0].target.pop_back();
  CHECK_THROWS_AS(train_motion_model(mixed, ex, net, {}, {}, nullptr, true), Error);
}

TEST_CASE("examples carry body or world targets") {
  const Run run = simulated(TrajectoryKind::Lissajous3D, 1.0);
  const auto body = make_motion_examples(run.imu, run.truth, run.rotations,
                                         RepresentationKind::Body, 50, 30);
  const auto global = make_motion_examples(run.imu, run.truth, run.rotations,
                                           RepresentationKind::Global, 50, 30);
  REQUIRE(body.size() == 6);  // 201 frames, windows at 0, 30, ..., 150
  for (std::size_t w = 0; w < body.size(); ++w) {
    for (std::size_t i = 0; i < 50; ++i) {
      const auto& x = run.truth[w * 30 + i];
      CHECK((body[w].target[i] - x.r.matrix().transpose() * x.v).norm() < 1e-14);
      CHECK((global[w].target[i] - x.v).norm() == 0.0);
    }
  }
}

TEST_CASE("oracle provider") {
  const Run run = simulated(TrajectoryKind::Figure8, 2.0);
  const auto clean = oracle_predict(run.truth, 0.0, 1);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK((clean[i].v_body - run.truth[i].r.matrix().transpose() * run.truth[i].v).norm() == 0.0);
    CHECK(clean[i].eta_v == Vec3::Constant(1e-4));
  }

  std::vector<TrajectorySample> still(100000);
  const auto noisy = oracle_predict(still, 0.05, 7);
  double sq = 0;
  for (const auto& m : noisy) sq += m.v_body.squaredNorm();
  CHECK(std::abs(std::sqrt(sq / (3.0 * noisy.size())) / 0.05 - 1.0) < 0.05);
  CHECK(noisy[0].eta_v == Vec3::Constant(0.05));

  const auto again = oracle_predict(still, 0.05, 7);
  CHECK(again[123].v_body == noisy[123].v_body);
  CHECK(oracle_predict(still, 0.05, 8)[123].v_body != noisy[123].v_body);
}

TEST_CASE("velocity providers") {
  std::vector<ImuSample> s(10);
  std::vector<RotationSO3> r(10);
  const auto zero = predict_velocity(ConstantZeroProvider{0.2}, s, r, 0);
  REQUIRE(zero.size() == 10);
  CHECK(zero[4].v_body.norm() == 0.0);
  CHECK(zero[4].eta_v == Vec3::Constant(0.2));

  OracleProvider oracle;
  for (int i = 0; i < 20; ++i) oracle.measurements.push_back({0.0, Vec3::Constant(i), Vec3::Ones()});
  const auto looked_up = predict_velocity(oracle, s, r, 5);
  CHECK(looked_up[0].v_body == Vec3::Constant(5));
  CHECK(looked_up[9].v_body == Vec3::Constant(14));
}

TEST_CASE("weight file round trip") {
  test::TempDir dir("motion");
  const Run run = simulated(TrajectoryKind::Circle, 0.5);
  const auto ex = make_motion_examples(run.imu, run.truth, run.rotations,
                                       RepresentationKind::BodyPlusAttitude, 40, 40);
  MotionNetModel model(tiny_net(), true);
  Rng rng(4);
  for (auto* p : model.parameters())
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value(i) = rng.normal();
  model.save(dir / "m.bin");
  const MotionNetModel back = MotionNetModel::load(dir / "m.bin");
  CHECK(back.config().latent_dim == 8);
  CHECK(back.config().representation == RepresentationKind::BodyPlusAttitude);
  const auto a = model.forward(ex[0].window), b = back.forward(ex[0].window);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].v_body == b[i].v_body);
    CHECK(a[i].eta_v == b[i].eta_v);
  }
}
