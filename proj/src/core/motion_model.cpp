#include "bodyio/motion_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bodyio/error.hpp"
#include "bodyio/weights_io.hpp"
#include "json.hpp"

namespace bodyio {

using nn::Matrix;

namespace {

constexpr double kEtaMin = 1e-4;
constexpr double kEtaMax = 1e2;

Vec3 huber_grad(const Vec3& e, double delta) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    g[i] = std::abs(e[i]) < delta ? e[i] : (e[i] > 0 ? delta : -delta);
  }
  return g;
}

// Packs B equal-length windows into (channels x T*B) inputs.
void pack_inputs(std::span<const ImuWindow* const> windows, bool attitude,
                 Matrix& imu, Matrix& att) {
  const auto b = static_cast<Eigen::Index>(windows.size());
  const auto t = static_cast<Eigen::Index>(windows.front()->size());
  imu.resize(6, t * b);
  if (attitude) att.resize(3, t * b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const ImuWindow& w = *windows[j];
    for (Eigen::Index i = 0; i < t; ++i) {
      const Eigen::Index c = i * b + j;
      const ImuSample& s = w.samples[i];
      imu.block<3, 1>(0, c) = s.w;
      imu.block<3, 1>(3, c) = s.a / kGravityMagnitude;
      if (attitude) att.col(c) = w.attitudes[i] / std::numbers::pi;
    }
  }
}

void check_window(const MotionNetConfig& cfg, const ImuWindow& w) {
  if (w.kind != cfg.representation) {
    fail(ErrorKind::Argument,
         "motion model expects " + std::string(to_string(cfg.representation)) +
             " input, got " + std::string(to_string(w.kind)));
  }
  if (w.samples.empty()) fail(ErrorKind::Argument, "motion model: empty window");
  if (has_attitude(cfg.representation) && w.attitudes.size() != w.samples.size()) {
    fail(ErrorKind::Argument, "motion model: missing attitude channel");
  }
}

}  // namespace

// ------------------------------------------------------------------ losses

double huber_loss(const Vec3& pred, const Vec3& truth, double delta) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double e = std::abs(pred[i] - truth[i]);
    sum += e < delta ? 0.5 * e * e : delta * (e - 0.5 * delta);
  }
  return sum;
}

double covariance_loss(const Vec3& pred, const Vec3& truth, const Vec3& eta) {
  if ((eta.array() <= 0).any()) {
    fail(ErrorKind::Argument, "covariance_loss: eta must be > 0");
  }
  const Vec3 e = pred - truth;
  const Eigen::Array3d var = eta.array().square();
  return (e.array().square() / var).sum() + var.log().sum();
}

double combined_loss(std::span<const Vec3> pred, std::span<const Vec3> truth,
                     std::span<const Vec3> eta, const LossConfig& cfg) {
  if (pred.size() != truth.size() || pred.size() != eta.size()) {
    fail(ErrorKind::Argument, "combined_loss: batch shape mismatch");
  }
  if (pred.empty()) fail(ErrorKind::Argument, "combined_loss: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += huber_loss(pred[i], truth[i], cfg.delta) +
           cfg.lambda * covariance_loss(pred[i], truth[i], eta[i]);
  }
  return sum / static_cast<double>(pred.size());
}

// ------------------------------------------------------------------ config

void MotionNetConfig::validate(bool allow_small_latent) const {
  const bool standard_size = latent_dim == 256 || latent_dim == 128 || latent_dim == 64;
  if (!standard_size && !(allow_small_latent && latent_dim >= 2 && latent_dim % 2 == 0)) {
    fail(ErrorKind::Config, "motion.latent_dim must be one of 256, 128, 64");
  }
  if (gru_layers < 1) fail(ErrorKind::Config, "motion.gru_layers must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    fail(ErrorKind::Config, "motion.dropout_p must lie in [0, 1)");
  }
  if (window < 1) fail(ErrorKind::Config, "motion.window must be >= 1");
  for (int c : imu_encoder_channels) {
    if (c < 1) fail(ErrorKind::Config, "motion.imu_encoder_channels entries must be >= 1");
  }
  if (has_attitude(representation) && attitude_encoder_channels.empty()) {
    fail(ErrorKind::Config, "motion.attitude_encoder_channels must be non-empty");
  }
  for (int c : attitude_encoder_channels) {
    if (c < 1) fail(ErrorKind::Config, "motion.attitude_encoder_channels entries must be >= 1");
  }
}

// ------------------------------------------------------------------ network

struct MotionNetModel::Net {
  std::vector<nn::Conv1d> imu_convs;
  std::vector<nn::SiLU> imu_acts;
  nn::Dropout imu_drop;
  std::vector<nn::Conv1d> att_convs;
  std::vector<nn::SiLU> att_acts;
  nn::Dropout att_drop;
  std::vector<nn::BiGru> grus;
  nn::Linear v_hidden, v_out, e_hidden, e_out;
  nn::SiLU v_act, e_act;
  bool attitude = false;
  int att_width = 0;

  Net(const MotionNetConfig& cfg, Rng& rng)
      : imu_drop(cfg.dropout_p), att_drop(cfg.dropout_p) {
    attitude = has_attitude(cfg.representation);
    int in = 6;
    int idx = 0;
    for (int c : cfg.imu_encoder_channels) {
      imu_convs.emplace_back("imu_enc" + std::to_string(idx++), in, c, rng);
      in = c;
    }
    imu_convs.emplace_back("imu_enc" + std::to_string(idx), in, cfg.latent_dim, rng);
    imu_acts.resize(imu_convs.size());
    int gru_in = cfg.latent_dim;
    if (attitude) {
      in = 3;
      idx = 0;
      for (int c : cfg.attitude_encoder_channels) {
        att_convs.emplace_back("att_enc" + std::to_string(idx++), in, c, rng);
        in = c;
      }
      att_acts.resize(att_convs.size());
      att_width = in;
      gru_in += in;
    }
    const int hidden = cfg.latent_dim / 2;
    for (int l = 0; l < cfg.gru_layers; ++l) {
      grus.emplace_back("gru" + std::to_string(l), l == 0 ? gru_in : cfg.latent_dim,
                        hidden, rng);
    }
    v_hidden = nn::Linear("vel_head.hidden", cfg.latent_dim, cfg.latent_dim, rng);
    v_out = nn::Linear("vel_head.out", cfg.latent_dim, 3, rng, /*zero=*/true);
    e_hidden = nn::Linear("eta_head.hidden", cfg.latent_dim, cfg.latent_dim, rng);
    e_out = nn::Linear("eta_head.out", cfg.latent_dim, 3, rng, /*zero=*/true);
  }

  void collect(std::vector<nn::Param*>& out) {
    for (auto& c : imu_convs) c.collect(out);
    for (auto& c : att_convs) c.collect(out);
    for (auto& g : grus) g.collect(out);
    v_hidden.collect(out);
    v_out.collect(out);
    e_hidden.collect(out);
    e_out.collect(out);
  }

  Matrix encode_imu_infer(const Matrix& imu, nn::SeqShape s) const {
    Matrix x = imu;
    for (const auto& conv : imu_convs) x = nn::SiLU::apply(conv.infer(x, s));
    return x;
  }

  // Evaluation forward: returns (velocity, raw eta) stacked as 6 rows.
  Matrix infer(const Matrix& imu, const Matrix& att, nn::SeqShape s) const {
    Matrix latent = encode_imu_infer(imu, s);
    Matrix x;
    if (attitude) {
      Matrix a = att;
      for (const auto& conv : att_convs) a = nn::SiLU::apply(conv.infer(a, s));
      x.resize(latent.rows() + a.rows(), latent.cols());
      x << latent, a;
    } else {
      x = std::move(latent);
    }
    for (const auto& g : grus) x = g.infer(x, s);
    Matrix out(6, x.cols());
    out.topRows(3) = v_out.infer(nn::SiLU::apply(v_hidden.infer(x)));
    out.bottomRows(3) = e_out.infer(nn::SiLU::apply(e_hidden.infer(x)));
    return out;
  }
};

MotionNetModel::MotionNetModel(const MotionNetConfig& cfg,
                               bool allow_small_latent)
    : cfg_(cfg) {
  cfg_.validate(allow_small_latent);
  Rng rng(mix_seed(cfg_.seed, 0x1417));
  net_ = std::make_unique<Net>(cfg_, rng);
}

MotionNetModel::MotionNetModel(const MotionNetModel& other)
    : cfg_(other.cfg_), net_(std::make_unique<Net>(*other.net_)) {}

MotionNetModel& MotionNetModel::operator=(const MotionNetModel& other) {
  if (this != &other) {
    cfg_ = other.cfg_;
    net_ = std::make_unique<Net>(*other.net_);
  }
  return *this;
}

MotionNetModel::MotionNetModel(MotionNetModel&&) noexcept = default;
MotionNetModel& MotionNetModel::operator=(MotionNetModel&&) noexcept = default;
MotionNetModel::~MotionNetModel() = default;

std::vector<nn::Param*> MotionNetModel::parameters() {
  std::vector<nn::Param*> out;
  net_->collect(out);
  return out;
}

std::size_t MotionNetModel::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::vector<VelocityMeasurement> MotionNetModel::forward(
    const ImuWindow& window) const {
  check_window(cfg_, window);
  const ImuWindow* ptr = &window;
  Matrix imu, att;
  pack_inputs(std::span<const ImuWindow* const>(&ptr, 1), net_->attitude, imu, att);
  const nn::SeqShape s{static_cast<Eigen::Index>(window.size()), 1};
  const Matrix out = net_->infer(imu, att, s);
  std::vector<VelocityMeasurement> result(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    result[i].t = window.samples[i].t;
    result[i].v_body = out.block<3, 1>(0, c);
    for (int k = 0; k < 3; ++k) {
      result[i].eta_v[k] = std::clamp(std::exp(out(3 + k, c)), kEtaMin, kEtaMax);
    }
  }
  return result;
}

Eigen::MatrixXd MotionNetModel::encode_imu(const ImuWindow& window) const {
  check_window(cfg_, window);
  const ImuWindow* ptr = &window;
  Matrix imu, att;
  pack_inputs(std::span<const ImuWindow* const>(&ptr, 1), false, imu, att);
  return net_->encode_imu_infer(imu, {static_cast<Eigen::Index>(window.size()), 1});
}

double MotionNetModel::loss_and_gradient(
    std::span<const MotionExample* const> batch, const LossConfig& loss,
    bool accumulate_grad, Rng* dropout_rng) {
  if (batch.empty()) fail(ErrorKind::Argument, "loss_and_gradient: empty batch");
  const std::size_t len = batch.front()->window.size();
  std::vector<const ImuWindow*> windows;
  windows.reserve(batch.size());
  for (const auto* ex : batch) {
    check_window(cfg_, ex->window);
    if (ex->window.size() != len || ex->target.size() != len) {
      fail(ErrorKind::Argument, "loss_and_gradient: windows must share one length");
    }
    windows.push_back(&ex->window);
  }
  Net& net = *net_;
  Matrix imu, att;
  pack_inputs(windows, net.attitude, imu, att);
  const auto b = static_cast<Eigen::Index>(batch.size());
  const nn::SeqShape s{static_cast<Eigen::Index>(len), b};
  const bool training = dropout_rng != nullptr;

  Matrix out;
  if (!accumulate_grad) {
    out = net.infer(imu, att, s);
  } else {
    Matrix x = imu;
    for (std::size_t i = 0; i < net.imu_convs.size(); ++i) {
      x = net.imu_acts[i].forward(net.imu_convs[i].forward(x, s));
    }
    x = net.imu_drop.forward(x, training, dropout_rng);
    if (net.attitude) {
      Matrix a = att;
      for (std::size_t i = 0; i < net.att_convs.size(); ++i) {
        a = net.att_acts[i].forward(net.att_convs[i].forward(a, s));
      }
      a = net.att_drop.forward(a, training, dropout_rng);
      Matrix cat(x.rows() + a.rows(), x.cols());
      cat << x, a;
      x = std::move(cat);
    }
    for (auto& g : net.grus) x = g.forward(x, s);
    out.resize(6, x.cols());
    out.topRows(3) = net.v_out.forward(net.v_act.forward(net.v_hidden.forward(x)));
    out.bottomRows(3) = net.e_out.forward(net.e_act.forward(net.e_hidden.forward(x)));
  }

  const Eigen::Index n = out.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix d_vel(3, n), d_raw(3, n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < b; ++j) {
    const MotionExample& ex = *batch[j];
    for (std::size_t i = 0; i < len; ++i) {
      const Eigen::Index c = static_cast<Eigen::Index>(i) * b + j;
      const Vec3 v = out.block<3, 1>(0, c);
      const Vec3 e = v - ex.target[i];
      Vec3 eta;
      Vec3 deta_draw;
      for (int k = 0; k < 3; ++k) {
        const double raw_exp = std::exp(out(3 + k, c));
        eta[k] = std::clamp(raw_exp, kEtaMin, kEtaMax);
        deta_draw[k] = (raw_exp > kEtaMin && raw_exp < kEtaMax) ? raw_exp : 0.0;
      }
      total += huber_loss(v, ex.target[i], loss.delta) +
               loss.lambda * covariance_loss(v, ex.target[i], eta);
      if (accumulate_grad) {
        const Eigen::Array3d var = eta.array().square();
        d_vel.col(c) = (huber_grad(e, loss.delta).array() +
                        loss.lambda * 2.0 * e.array() / var) *
                       inv_n;
        const Eigen::Array3d d_eta =
            loss.lambda * (-2.0 * e.array().square() / (var * eta.array()) +
                           2.0 / eta.array());
        d_raw.col(c) = (d_eta * deta_draw.array() * inv_n).matrix();
      }
    }
  }
  if (!accumulate_grad) return total * inv_n;

  auto params = parameters();
  nn::zero_grad(params);
  Matrix dx = net.v_hidden.backward(net.v_act.backward(net.v_out.backward(d_vel)));
  dx += net.e_hidden.backward(net.e_act.backward(net.e_out.backward(d_raw)));
  for (auto it = net.grus.rbegin(); it != net.grus.rend(); ++it) dx = it->backward(dx);
  Matrix d_latent = dx.topRows(cfg_.latent_dim);
  if (net.attitude) {
    Matrix da = net.att_drop.backward(dx.bottomRows(net.att_width));
    for (std::size_t i = net.att_convs.size(); i-- > 0;) {
      da = net.att_convs[i].backward(net.att_acts[i].backward(da));
    }
  }
  d_latent = net.imu_drop.backward(d_latent);
  for (std::size_t i = net.imu_convs.size(); i-- > 0;) {
    d_latent = net.imu_convs[i].backward(net.imu_acts[i].backward(d_latent));
  }
  return total * inv_n;
}

// ------------------------------------------------------------------ persistence

namespace {

nlohmann::json config_to_json(const MotionNetConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"gru_layers", c.gru_layers},
          {"imu_encoder_channels", c.imu_encoder_channels},
          {"attitude_encoder_channels", c.attitude_encoder_channels},
          {"dropout_p", c.dropout_p},
          {"window", c.window},
          {"representation", std::string(to_string(c.representation))},
          {"seed", c.seed}};
}

}  // namespace

void MotionNetModel::save(const std::filesystem::path& path) const {
  WeightFile f;
  f.variant = WeightVariant::MotionNet;
  nlohmann::json meta;
  meta["config"] = config_to_json(cfg_);
  nlohmann::json tensors = nlohmann::json::array();
  std::vector<nn::Param*> params;
  net_->collect(params);
  for (const auto* p : params) {
    tensors.push_back({{"name", p->name}, {"shape", {p->value.rows(), p->value.cols()}}});
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        f.payload.push_back(p->value(r, c));
      }
    }
  }
  meta["tensors"] = tensors;
  f.metadata = meta.dump();
  write_weight_file(path, f);
}

MotionNetModel MotionNetModel::load(const std::filesystem::path& path) {
  const WeightFile f = read_weight_file(path);
  if (f.variant != WeightVariant::MotionNet) {
    fail(ErrorKind::Data, path.string() + " does not hold a motion network");
  }
  MotionNetConfig cfg;
  try {
    const auto j = nlohmann::json::parse(f.metadata).at("config");
    cfg.latent_dim = j.at("latent_dim").get<int>();
    cfg.gru_layers = j.at("gru_layers").get<int>();
    cfg.imu_encoder_channels = j.at("imu_encoder_channels").get<std::vector<int>>();
    cfg.attitude_encoder_channels =
        j.at("attitude_encoder_channels").get<std::vector<int>>();
    cfg.dropout_p = j.at("dropout_p").get<double>();
    cfg.window = j.at("window").get<int>();
    cfg.representation =
        representation_from_string(j.at("representation").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Data, std::string("motion network metadata: ") + e.what());
  }
  MotionNetModel model(cfg, /*allow_small_latent=*/true);
  auto params = model.parameters();
  std::size_t pos = 0;
  for (auto* p : params) {
    if (pos + static_cast<std::size_t>(p->value.size()) > f.payload.size()) {
      fail(ErrorKind::Data, "motion network payload too short");
    }
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        p->value(r, c) = f.payload[pos++];
      }
    }
  }
  if (pos != f.payload.size()) fail(ErrorKind::Data, "motion network payload too long");
  return model;
}

// ------------------------------------------------------------------ training

double evaluate_loss(MotionNetModel& model, const std::vector<MotionExample>& data,
                     const LossConfig& loss_cfg) {
  if (data.empty()) fail(ErrorKind::Argument, "evaluate_loss: empty dataset");
  constexpr std::size_t kChunk = 64;
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<const MotionExample*> batch;
  for (std::size_t start = 0; start < data.size(); start += kChunk) {
    batch.clear();
    for (std::size_t i = start; i < std::min(data.size(), start + kChunk); ++i) {
      batch.push_back(&data[i]);
    }
    sum += model.loss_and_gradient(batch, loss_cfg, false, nullptr) *
           static_cast<double>(batch.size());
    count += batch.size();
  }
  return sum / static_cast<double>(count);
}

double velocity_rmse(const MotionNetModel& model,
                     const std::vector<MotionExample>& data) {
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& ex : data) {
    const auto pred = model.forward(ex.window);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      sq += (pred[i].v_body - ex.target[i]).squaredNorm();
      ++n;
    }
  }
  if (n == 0) fail(ErrorKind::Argument, "velocity_rmse: empty dataset");
  return std::sqrt(sq / static_cast<double>(n));
}

MotionNetModel train_motion_model(const std::vector<MotionExample>& train,
                                  const std::vector<MotionExample>& val,
                                  const MotionNetConfig& net_cfg,
                                  const LossConfig& loss_cfg,
                                  const MotionTrainConfig& train_cfg,
                                  MotionTrainReport* report,
                                  bool allow_small_latent) {
  if (train.empty() || val.empty()) {
    fail(ErrorKind::Argument, "train_motion_model: empty dataset");
  }
  if (train_cfg.batch_size < 1 || train_cfg.epochs < 1) {
    fail(ErrorKind::Config, "motion training needs batch_size >= 1 and epochs >= 1");
  }
  const std::size_t len = train.front().window.size();
  for (const auto* set : {&train, &val}) {
    for (const auto& ex : *set) {
      if (ex.window.size() != len) {
        fail(ErrorKind::Argument, "train_motion_model: mixed window lengths");
      }
    }
  }

  MotionNetModel model(net_cfg, allow_small_latent);
  MotionNetModel best = model;
  auto params = model.parameters();
  nn::Adam adam({train_cfg.learning_rate});
  Rng shuffle_rng(mix_seed(train_cfg.seed, 1));
  Rng dropout_rng(mix_seed(train_cfg.seed, 2));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double best_val = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;
  MotionTrainReport local;
  std::vector<const MotionExample*> batch;

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train_cfg.batch_size)) {
      batch.clear();
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(train_cfg.batch_size));
      for (std::size_t i = start; i < stop; ++i) batch.push_back(&train[order[i]]);
      epoch_loss += model.loss_and_gradient(batch, loss_cfg, true, &dropout_rng) *
                    static_cast<double>(batch.size());
      adam.step(params);
    }
    epoch_loss /= static_cast<double>(order.size());
    const double val_loss = evaluate_loss(model, val, loss_cfg);
    local.train_loss.push_back(epoch_loss);
    local.val_loss.push_back(val_loss);
    local.learning_rate.push_back(adam.lr());
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      local.best_epoch = epoch;
      bad_epochs = 0;
    } else if (++bad_epochs >= train_cfg.patience) {
      adam.set_lr(adam.lr() * train_cfg.decay);
      bad_epochs = 0;
    }
  }
  if (report) *report = std::move(local);
  return best;
}

// ------------------------------------------------------------------ data

std::vector<MotionExample> make_motion_examples(
    const std::vector<ImuSample>& imu, const std::vector<TrajectorySample>& truth,
    std::span<const RotationSO3> rotations, RepresentationKind kind,
    std::size_t window, std::size_t stride) {
  if (imu.size() != truth.size()) {
    fail(ErrorKind::Argument, "make_motion_examples: imu/truth length mismatch");
  }
  if (!rotations.empty() && rotations.size() != imu.size()) {
    fail(ErrorKind::Argument, "make_motion_examples: rotation count mismatch");
  }
  if (window == 0 || stride == 0) {
    fail(ErrorKind::Argument, "make_motion_examples: window and stride must be > 0");
  }
  std::vector<MotionExample> out;
  const bool body = is_body_frame(kind);
  for (std::size_t start = 0; start + window <= imu.size(); start += stride) {
    ImuWindow raw;
    raw.samples.assign(imu.begin() + start, imu.begin() + start + window);
    const auto rot = rotations.empty() ? rotations : rotations.subspan(start, window);
    MotionExample ex;
    ex.window = transform_representation(raw, kind, rot);
    ex.target.reserve(window);
    for (std::size_t i = start; i < start + window; ++i) {
      ex.target.push_back(body ? Vec3(truth[i].r.matrix().transpose() * truth[i].v)
                               : truth[i].v);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<VelocityMeasurement> oracle_predict(
    const std::vector<TrajectorySample>& truth, double noise_std,
    std::uint64_t seed) {
  if (!(noise_std >= 0)) fail(ErrorKind::Argument, "oracle_predict: noise_std must be >= 0");
  Rng rng(seed);
  std::vector<VelocityMeasurement> out;
  out.reserve(truth.size());
  const double eta = std::max(noise_std, 1e-4);
  for (const auto& s : truth) {
    VelocityMeasurement m;
    m.t = s.t;
    m.v_body = s.r.matrix().transpose() * s.v;
    for (int k = 0; k < 3; ++k) m.v_body[k] += noise_std * rng.normal();
    m.eta_v = Vec3::Constant(eta);
    out.push_back(m);
  }
  return out;
}

std::vector<VelocityMeasurement> predict_velocity(
    const VelocityProvider& provider, std::span<const ImuSample> samples,
    std::span<const RotationSO3> attitudes, std::size_t first_index) {
  if (const auto* oracle = std::get_if<OracleProvider>(&provider)) {
    if (first_index + samples.size() > oracle->measurements.size()) {
      fail(ErrorKind::Argument, "oracle provider: frame index beyond truth");
    }
    return {oracle->measurements.begin() + static_cast<std::ptrdiff_t>(first_index),
            oracle->measurements.begin() +
                static_cast<std::ptrdiff_t>(first_index + samples.size())};
  }
  if (const auto* zero = std::get_if<ConstantZeroProvider>(&provider)) {
    std::vector<VelocityMeasurement> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out[i].t = samples[i].t;
      out[i].v_body.setZero();
      out[i].eta_v = Vec3::Constant(zero->eta);
    }
    return out;
  }
  const auto& net = std::get<NetworkProvider>(provider);
  if (!net.model) fail(ErrorKind::Argument, "network provider: no model");
  const RepresentationKind kind = net.model->config().representation;
  if (!is_body_frame(kind)) {
    fail(ErrorKind::Argument,
         "network provider needs a body-frame model, got " +
             std::string(to_string(kind)));
  }
  ImuWindow raw;
  raw.samples.assign(samples.begin(), samples.end());
  const ImuWindow input = transform_representation(
      raw, kind,
      kind == RepresentationKind::Body ? std::span<const RotationSO3>() : attitudes);
  return net.model->forward(input);
}

}  // namespace bodyio
