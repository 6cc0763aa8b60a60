#pragma once

// Minimal dense building blocks for the motion network: 1-D convolution,
// bidirectional GRU, linear layers and Adam. Activations are stored as
// (channels x T*B) matrices whose column t*B + b holds time step t of
// sequence b, so one GEMM covers a whole batch.

#include <Eigen/Core>
#include <string>
#include <vector>

#include "bodyio/random.hpp"

namespace bodyio::nn {

using Matrix = Eigen::MatrixXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)),
        adam_m(Matrix::Zero(rows, cols)),
        adam_v(Matrix::Zero(rows, cols)) {}
};

/// Uniform(-bound, bound) fill with bound = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix& m, double fan_in, double fan_out, Rng& rng);

struct SeqShape {
  Eigen::Index steps = 0;  // T
  Eigen::Index batch = 0;  // B
};

/// Kernel-3 "same" convolution along time with zero padding.
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(const std::string& name, int in, int out, Rng& rng);

  /// Training forward; caches the input for backward().
  Matrix forward(const Matrix& x, SeqShape s);
  Matrix infer(const Matrix& x, SeqShape s) const;
  Matrix backward(const Matrix& dy);
  void collect(std::vector<Param*>& out);

  int out_channels() const { return static_cast<int>(bias_.value.rows()); }

 private:
  Param taps_[3];
  Param bias_;
  Matrix x_;
  SeqShape s_;
};

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out, Rng& rng, bool zero = false);

  Matrix forward(const Matrix& x);
  Matrix infer(const Matrix& x) const;
  Matrix backward(const Matrix& dy);
  void collect(std::vector<Param*>& out);

 private:
  Param weight_;
  Param bias_;
  Matrix x_;
};

/// x * sigmoid(x), elementwise.
class SiLU {
 public:
  static Matrix apply(const Matrix& x);
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy) const;

 private:
  Matrix x_;
  Matrix sig_;
};

/// Inverted dropout; identity when `training` is false or p == 0.
class Dropout {
 public:
  explicit Dropout(double p = 0.0) : p_(p) {}
  Matrix forward(const Matrix& x, bool training, Rng* rng);
  Matrix backward(const Matrix& dy) const;

 private:
  double p_;
  Matrix mask_;
  bool active_ = false;
};

/// One GRU direction, PyTorch gate layout (r, z, n):
///   r = s(Wir x + bir + Whr h + bhr)
///   z = s(Wiz x + biz + Whz h + bhz)
///   n = tanh(Win x + bin + r * (Whn h + bhn))
///   h' = (1 - z) * n + z * h
class GruDirection {
 public:
  GruDirection() = default;
  GruDirection(const std::string& name, int in, int hidden, bool reverse,
               Rng& rng);

  Matrix forward(const Matrix& x, SeqShape s);
  Matrix infer(const Matrix& x, SeqShape s) const;
  Matrix backward(const Matrix& dh);
  void collect(std::vector<Param*>& out);

 private:
  int hidden_ = 0;
  bool reverse_ = false;
  Param w_in_, w_hid_, b_in_, b_hid_;
  SeqShape s_;
  Matrix x_, r_, z_, n_, hn_, h_prev_;
};

/// Forward and reverse GRU over the same input, outputs stacked
/// [forward; reverse] (2 * hidden rows).
class BiGru {
 public:
  BiGru() = default;
  BiGru(const std::string& name, int in, int hidden, Rng& rng);

  Matrix forward(const Matrix& x, SeqShape s);
  Matrix infer(const Matrix& x, SeqShape s) const;
  Matrix backward(const Matrix& dy);
  void collect(std::vector<Param*>& out);

 private:
  int hidden_ = 0;
  GruDirection fwd_, bwd_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
  void step(const std::vector<Param*>& params);
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
};

void zero_grad(const std::vector<Param*>& params);

}  // namespace bodyio::nn
