#include "bodyio/nn.hpp"

#include <cmath>

namespace bodyio::nn {

namespace {

Matrix sigmoid(const Matrix& x) {
  return (1.0 + (-x.array()).exp()).inverse().matrix();
}

void uniform_fill(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace

void glorot_uniform(Matrix& m, double fan_in, double fan_out, Rng& rng) {
  uniform_fill(m, std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

void zero_grad(const std::vector<Param*>& params) {
  for (Param* p : params) p->grad.setZero();
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(const std::string& name, int in, int out, Rng& rng) {
  for (int k = 0; k < 3; ++k) {
    taps_[k] = Param(name + ".tap" + std::to_string(k), out, in);
    glorot_uniform(taps_[k].value, 3.0 * in, 3.0 * out, rng);
  }
  bias_ = Param(name + ".bias", out, 1);
}

Matrix Conv1d::forward(const Matrix& x, SeqShape s) {
  x_ = x;
  s_ = s;
  return infer(x, s);
}

Matrix Conv1d::infer(const Matrix& x, SeqShape s) const {
  const Eigen::Index shift = s.batch;
  const Eigen::Index rest = x.cols() - shift;
  Matrix y = taps_[1].value * x;
  if (rest > 0) {
    // y[t] += W0 x[t-1] + W2 x[t+1]
    y.rightCols(rest).noalias() += taps_[0].value * x.leftCols(rest);
    y.leftCols(rest).noalias() += taps_[2].value * x.rightCols(rest);
  }
  y.colwise() += bias_.value.col(0);
  return y;
}

Matrix Conv1d::backward(const Matrix& dy) {
  const Eigen::Index shift = s_.batch;
  const Eigen::Index rest = x_.cols() - shift;
  taps_[1].grad.noalias() += dy * x_.transpose();
  Matrix dx = taps_[1].value.transpose() * dy;
  if (rest > 0) {
    taps_[0].grad.noalias() += dy.rightCols(rest) * x_.leftCols(rest).transpose();
    taps_[2].grad.noalias() += dy.leftCols(rest) * x_.rightCols(rest).transpose();
    dx.leftCols(rest).noalias() += taps_[0].value.transpose() * dy.rightCols(rest);
    dx.rightCols(rest).noalias() += taps_[2].value.transpose() * dy.leftCols(rest);
  }
  bias_.grad.col(0) += dy.rowwise().sum();
  return dx;
}

void Conv1d::collect(std::vector<Param*>& out) {
  for (auto& t : taps_) out.push_back(&t);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, int in, int out, Rng& rng, bool zero)
    : weight_(name + ".weight", out, in), bias_(name + ".bias", out, 1) {
  if (!zero) glorot_uniform(weight_.value, in, out, rng);
}

Matrix Linear::forward(const Matrix& x) {
  x_ = x;
  return infer(x);
}

Matrix Linear::infer(const Matrix& x) const {
  Matrix y = weight_.value * x;
  y.colwise() += bias_.value.col(0);
  return y;
}

Matrix Linear::backward(const Matrix& dy) {
  weight_.grad.noalias() += dy * x_.transpose();
  bias_.grad.col(0) += dy.rowwise().sum();
  return weight_.value.transpose() * dy;
}

void Linear::collect(std::vector<Param*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------- SiLU

Matrix SiLU::apply(const Matrix& x) {
  return (x.array() * sigmoid(x).array()).matrix();
}

Matrix SiLU::forward(const Matrix& x) {
  x_ = x;
  sig_ = sigmoid(x);
  return (x.array() * sig_.array()).matrix();
}

Matrix SiLU::backward(const Matrix& dy) const {
  // d/dx x s(x) = s(x) (1 + x (1 - s(x)))
  return (dy.array() * sig_.array() *
          (1.0 + x_.array() * (1.0 - sig_.array())))
      .matrix();
}

// ---------------------------------------------------------------- Dropout

Matrix Dropout::forward(const Matrix& x, bool training, Rng* rng) {
  active_ = training && p_ > 0.0 && rng != nullptr;
  if (!active_) return x;
  mask_.resize(x.rows(), x.cols());
  const double keep = 1.0 - p_;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      mask_(i, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    }
  }
  return (x.array() * mask_.array()).matrix();
}

Matrix Dropout::backward(const Matrix& dy) const {
  if (!active_) return dy;
  return (dy.array() * mask_.array()).matrix();
}

// ---------------------------------------------------------------- GRU

GruDirection::GruDirection(const std::string& name, int in, int hidden,
                           bool reverse, Rng& rng)
    : hidden_(hidden),
      reverse_(reverse),
      w_in_(name + ".w_in", 3 * hidden, in),
      w_hid_(name + ".w_hid", 3 * hidden, hidden),
      b_in_(name + ".b_in", 3 * hidden, 1),
      b_hid_(name + ".b_hid", 3 * hidden, 1) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  uniform_fill(w_in_.value, bound, rng);
  uniform_fill(w_hid_.value, bound, rng);
}

Matrix GruDirection::forward(const Matrix& x, SeqShape s) {
  const Eigen::Index h = hidden_;
  const Eigen::Index b = s.batch;
  const Eigen::Index cols = x.cols();
  s_ = s;
  x_ = x;
  Matrix xp = w_in_.value * x;
  xp.colwise() += b_in_.value.col(0);

  r_.resize(h, cols);
  z_.resize(h, cols);
  n_.resize(h, cols);
  hn_.resize(h, cols);
  h_prev_.resize(h, cols);
  Matrix out(h, cols);
  Matrix state = Matrix::Zero(h, b);
  Matrix hp(3 * h, b);
  for (Eigen::Index step = 0; step < s.steps; ++step) {
    const Eigen::Index t = reverse_ ? s.steps - 1 - step : step;
    const Eigen::Index c = t * b;
    hp.noalias() = w_hid_.value * state;
    hp.colwise() += b_hid_.value.col(0);
    const Matrix r = sigmoid(xp.block(0, c, h, b) + hp.topRows(h));
    const Matrix z = sigmoid(xp.block(h, c, h, b) + hp.middleRows(h, h));
    const Matrix n = (xp.block(2 * h, c, h, b).array() +
                      r.array() * hp.bottomRows(h).array())
                         .tanh()
                         .matrix();
    r_.middleCols(c, b) = r;
    z_.middleCols(c, b) = z;
    n_.middleCols(c, b) = n;
    hn_.middleCols(c, b) = hp.bottomRows(h);
    h_prev_.middleCols(c, b) = state;
    state = ((1.0 - z.array()) * n.array() + z.array() * state.array()).matrix();
    out.middleCols(c, b) = state;
  }
  return out;
}

Matrix GruDirection::infer(const Matrix& x, SeqShape s) const {
  const Eigen::Index h = hidden_;
  const Eigen::Index b = s.batch;
  Matrix xp = w_in_.value * x;
  xp.colwise() += b_in_.value.col(0);
  Matrix out(h, x.cols());
  Matrix state = Matrix::Zero(h, b);
  Matrix hp(3 * h, b);
  for (Eigen::Index step = 0; step < s.steps; ++step) {
    const Eigen::Index t = reverse_ ? s.steps - 1 - step : step;
    const Eigen::Index c = t * b;
    hp.noalias() = w_hid_.value * state;
    hp.colwise() += b_hid_.value.col(0);
    const Matrix r = sigmoid(xp.block(0, c, h, b) + hp.topRows(h));
    const Matrix z = sigmoid(xp.block(h, c, h, b) + hp.middleRows(h, h));
    const Matrix n = (xp.block(2 * h, c, h, b).array() +
                      r.array() * hp.bottomRows(h).array())
                         .tanh()
                         .matrix();
    state = ((1.0 - z.array()) * n.array() + z.array() * state.array()).matrix();
    out.middleCols(c, b) = state;
  }
  return out;
}

Matrix GruDirection::backward(const Matrix& dh_out) {
  const Eigen::Index h = hidden_;
  const Eigen::Index b = s_.batch;
  Matrix dxp = Matrix::Zero(3 * h, dh_out.cols());
  Matrix carry = Matrix::Zero(h, b);
  Matrix gh(3 * h, b);
  for (Eigen::Index step = s_.steps; step-- > 0;) {
    const Eigen::Index t = reverse_ ? s_.steps - 1 - step : step;
    const Eigen::Index c = t * b;
    const auto r = r_.middleCols(c, b).array();
    const auto z = z_.middleCols(c, b).array();
    const auto n = n_.middleCols(c, b).array();
    const auto hn = hn_.middleCols(c, b).array();
    const auto hprev = h_prev_.middleCols(c, b).array();
    const Eigen::ArrayXXd dh = dh_out.middleCols(c, b).array() + carry.array();

    const Eigen::ArrayXXd dn_pre = dh * (1.0 - z) * (1.0 - n * n);
    const Eigen::ArrayXXd dz_pre = dh * (hprev - n) * z * (1.0 - z);
    const Eigen::ArrayXXd dr_pre = dn_pre * hn * r * (1.0 - r);

    dxp.block(0, c, h, b) = dr_pre.matrix();
    dxp.block(h, c, h, b) = dz_pre.matrix();
    dxp.block(2 * h, c, h, b) = dn_pre.matrix();
    gh.topRows(h) = dr_pre.matrix();
    gh.middleRows(h, h) = dz_pre.matrix();
    gh.bottomRows(h) = (dn_pre * r).matrix();

    w_hid_.grad.noalias() += gh * h_prev_.middleCols(c, b).transpose();
    b_hid_.grad.col(0) += gh.rowwise().sum();
    carry = (dh * z).matrix();
    carry.noalias() += w_hid_.value.transpose() * gh;
  }
  w_in_.grad.noalias() += dxp * x_.transpose();
  b_in_.grad.col(0) += dxp.rowwise().sum();
  return w_in_.value.transpose() * dxp;
}

void GruDirection::collect(std::vector<Param*>& out) {
  out.push_back(&w_in_);
  out.push_back(&w_hid_);
  out.push_back(&b_in_);
  out.push_back(&b_hid_);
}

BiGru::BiGru(const std::string& name, int in, int hidden, Rng& rng)
    : hidden_(hidden),
      fwd_(name + ".fwd", in, hidden, false, rng),
      bwd_(name + ".bwd", in, hidden, true, rng) {}

Matrix BiGru::forward(const Matrix& x, SeqShape s) {
  Matrix out(2 * hidden_, x.cols());
  out.topRows(hidden_) = fwd_.forward(x, s);
  out.bottomRows(hidden_) = bwd_.forward(x, s);
  return out;
}

Matrix BiGru::infer(const Matrix& x, SeqShape s) const {
  Matrix out(2 * hidden_, x.cols());
  out.topRows(hidden_) = fwd_.infer(x, s);
  out.bottomRows(hidden_) = bwd_.infer(x, s);
  return out;
}

Matrix BiGru::backward(const Matrix& dy) {
  Matrix dx = fwd_.backward(dy.topRows(hidden_));
  dx += bwd_.backward(dy.bottomRows(hidden_));
  return dx;
}

void BiGru::collect(std::vector<Param*>& out) {
  fwd_.collect(out);
  bwd_.collect(out);
}

// ---------------------------------------------------------------- Adam

void Adam::step(const std::vector<Param*>& params) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Param* p : params) {
    p->adam_m = cfg_.beta1 * p->adam_m + (1.0 - cfg_.beta1) * p->grad;
    p->adam_v = cfg_.beta2 * p->adam_v +
                (1.0 - cfg_.beta2) * p->grad.array().square().matrix();
    p->value.array() -= cfg_.lr * (p->adam_m.array() / c1) /
                        ((p->adam_v.array() / c2).sqrt() + cfg_.eps);
  }
}

}  // namespace bodyio::nn
