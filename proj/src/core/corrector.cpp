#include "bodyio/corrector.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "bodyio/error.hpp"
#include "bodyio/weights_io.hpp"
#include "json.hpp"

namespace bodyio {

namespace {

double channel(const ImuSample& s, int c) { return c < 3 ? s.w[c] : s.a[c - 3]; }

double bias_channel(const BiasState& b, int c) {
  return c < 3 ? b.b_g[c] : b.b_a[c - 3];
}

// Standardized causal window for channel c ending at sample i.
void fill_features(const std::vector<ImuSample>& samples, std::size_t i, int c,
                   const AffineCorrector& m, Eigen::Ref<Eigen::VectorXd> z) {
  for (int k = 0; k < m.window_len; ++k) {
    const std::size_t j = i >= static_cast<std::size_t>(k) ? i - k : 0;
    z[k] = (channel(samples[j], c) - m.in_mean[c]) / m.in_scale[c];
  }
}

}  // namespace

double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

double softplus_inverse(double y) {
  return y > 30.0 ? y : std::log(std::expm1(y));
}

ImuSample apply_correction(const ImuSample& s, const CorrectionOutput& c) {
  return {s.t, s.w + c.sigma_g, s.a + c.sigma_a};
}

std::vector<CorrectionOutput> correct_and_quantify(const CorrectorModel& model,
                                                   const ImuWindow& window) {
  if (window.samples.empty()) {
    fail(ErrorKind::Argument, "correct_and_quantify: empty window");
  }
  std::vector<CorrectionOutput> out(window.samples.size());
  if (const auto* id = std::get_if<IdentityCorrector>(&model)) {
    for (auto& o : out) {
      o.sigma_g.setZero();
      o.sigma_a.setZero();
      o.eta_g = id->eta_g;
      o.eta_a = id->eta_a;
    }
    return out;
  }
  const auto& m = std::get<AffineCorrector>(model);
  Vec6 eta;
  for (int c = 0; c < 6; ++c) eta[c] = std::max(softplus(m.eta_raw[c]), 1e-12);
  Eigen::VectorXd z(m.window_len);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int c = 0; c < 6; ++c) {
      fill_features(window.samples, i, c, m, z);
      const double sigma = m.weights.row(c).dot(z) + m.bias[c];
      if (c < 3) {
        out[i].sigma_g[c] = sigma;
        out[i].eta_g[c] = eta[c];
      } else {
        out[i].sigma_a[c - 3] = sigma;
        out[i].eta_a[c - 3] = eta[c];
      }
    }
  }
  return out;
}

AffineCorrector train_corrector(const std::vector<CorrectorExample>& dataset,
                                const CorrectorTrainConfig& cfg,
                                std::vector<double>* loss_history) {
  std::size_t total = 0;
  for (const auto& ex : dataset) {
    if (ex.bias.size() != ex.window.samples.size()) {
      fail(ErrorKind::Argument, "corrector example: bias/sample length mismatch");
    }
    total += ex.window.samples.size();
  }
  if (dataset.empty() || total == 0) {
    fail(ErrorKind::Argument, "train_corrector: empty dataset");
  }
  if (cfg.window_len < 1) fail(ErrorKind::Config, "corrector.window_len must be >= 1");
  if (cfg.epochs < 0) fail(ErrorKind::Config, "corrector.epochs must be >= 0");
  if (!(cfg.step_fraction > 0 && cfg.step_fraction < 2)) {
    fail(ErrorKind::Config, "corrector.step_fraction must lie in (0, 2)");
  }

  AffineCorrector m;
  m.window_len = cfg.window_len;
  m.weights = Eigen::MatrixXd::Zero(6, cfg.window_len);
  const double n = static_cast<double>(total);

  // Input standardization and a noise-std estimate from first differences.
  Vec6 sum = Vec6::Zero(), sum2 = Vec6::Zero(), diff2 = Vec6::Zero();
  double n_diff = 0.0;
  for (const auto& ex : dataset) {
    const auto& s = ex.window.samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (int c = 0; c < 6; ++c) {
        const double x = channel(s[i], c);
        sum[c] += x;
        sum2[c] += x * x;
        if (i > 0) {
          const double d = x - channel(s[i - 1], c);
          diff2[c] += d * d;
        }
      }
      if (i > 0) n_diff += 1.0;
    }
  }
  for (int c = 0; c < 6; ++c) {
    m.in_mean[c] = sum[c] / n;
    const double var = std::max(sum2[c] / n - m.in_mean[c] * m.in_mean[c], 0.0);
    m.in_scale[c] = std::sqrt(var) > 1e-9 ? std::sqrt(var) : 1.0;
    const double noise = n_diff > 0 ? std::sqrt(diff2[c] / n_diff / 2.0) : 1e-3;
    m.eta_raw[c] = softplus_inverse(std::max(noise, 1e-6));
  }

  // Normal equations per channel over theta = [weights, bias].
  const int dim = cfg.window_len + 1;
  std::vector<Eigen::MatrixXd> gram(6, Eigen::MatrixXd::Zero(dim, dim));
  std::vector<Eigen::VectorXd> rhs(6, Eigen::VectorXd::Zero(dim));
  Vec6 y2 = Vec6::Zero();
  Eigen::VectorXd f(dim);
  for (const auto& ex : dataset) {
    const auto& s = ex.window.samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (int c = 0; c < 6; ++c) {
        fill_features(s, i, c, m, f.head(cfg.window_len));
        f[cfg.window_len] = 1.0;
        const double y = -bias_channel(ex.bias[i], c);
        gram[c].selfadjointView<Eigen::Lower>().rankUpdate(f, 1.0 / n);
        rhs[c] += f * (y / n);
        y2[c] += y * y / n;
      }
    }
  }

  std::vector<Eigen::VectorXd> theta(6, Eigen::VectorXd::Zero(dim));
  Vec6 step;
  for (int c = 0; c < 6; ++c) {
    gram[c] = gram[c].selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram[c],
                                                      Eigen::EigenvaluesOnly);
    step[c] = cfg.step_fraction / std::max(es.eigenvalues().maxCoeff(), 1e-300);
  }
  auto loss = [&]() {
    double total_loss = 0.0;
    for (int c = 0; c < 6; ++c) {
      total_loss += theta[c].dot(gram[c] * theta[c]) -
                    2.0 * theta[c].dot(rhs[c]) + y2[c];
    }
    return std::max(total_loss / 6.0, 0.0);
  };

  if (loss_history) {
    loss_history->clear();
    loss_history->push_back(loss());
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int c = 0; c < 6; ++c) {
      theta[c] -= step[c] * (gram[c] * theta[c] - rhs[c]);
    }
    if (loss_history) loss_history->push_back(loss());
  }
  for (int c = 0; c < 6; ++c) {
    m.weights.row(c) = theta[c].head(cfg.window_len).transpose();
    m.bias[c] = theta[c][cfg.window_len];
  }
  return m;
}

void save_corrector(const CorrectorModel& model,
                    const std::filesystem::path& path) {
  WeightFile f;
  nlohmann::json meta;
  if (const auto* id = std::get_if<IdentityCorrector>(&model)) {
    f.variant = WeightVariant::IdentityCorrector;
    meta["tensors"] = {{"eta_g", {3}}, {"eta_a", {3}}};
    for (int i = 0; i < 3; ++i) f.payload.push_back(id->eta_g[i]);
    for (int i = 0; i < 3; ++i) f.payload.push_back(id->eta_a[i]);
  } else {
    const auto& m = std::get<AffineCorrector>(model);
    f.variant = WeightVariant::AffineCorrector;
    meta["window_len"] = m.window_len;
    meta["tensors"] = {{"in_mean", {6}},
                       {"in_scale", {6}},
                       {"weights", {6, m.window_len}},
                       {"bias", {6}},
                       {"eta_raw", {6}}};
    auto push = [&f](const auto& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) f.payload.push_back(v[i]);
    };
    push(m.in_mean);
    push(m.in_scale);
    for (int r = 0; r < 6; ++r) {
      for (int k = 0; k < m.window_len; ++k) f.payload.push_back(m.weights(r, k));
    }
    push(m.bias);
    push(m.eta_raw);
  }
  f.metadata = meta.dump();
  write_weight_file(path, f);
}

CorrectorModel load_corrector(const std::filesystem::path& path) {
  const WeightFile f = read_weight_file(path);
  const auto& p = f.payload;
  if (f.variant == WeightVariant::IdentityCorrector) {
    if (p.size() != 6) fail(ErrorKind::Data, "identity corrector: bad payload size");
    IdentityCorrector id(Vec3(p[0], p[1], p[2]), Vec3(p[3], p[4], p[5]));
    if ((id.eta_g.array() <= 0).any() || (id.eta_a.array() <= 0).any()) {
      fail(ErrorKind::Data, "identity corrector: uncertainties must be > 0");
    }
    return id;
  }
  if (f.variant != WeightVariant::AffineCorrector) {
    fail(ErrorKind::Data, path.string() + " does not hold a corrector model");
  }
  int len = 0;
  try {
    len = nlohmann::json::parse(f.metadata).at("window_len").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Data, std::string("corrector metadata: ") + e.what());
  }
  if (len < 1 || p.size() != static_cast<std::size_t>(6 * 4 + 6 * len)) {
    fail(ErrorKind::Data, "affine corrector: bad payload size");
  }
  AffineCorrector m;
  m.window_len = len;
  m.weights.resize(6, len);
  std::size_t pos = 0;
  auto pull = [&](auto& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = p[pos++];
  };
  pull(m.in_mean);
  pull(m.in_scale);
  for (int r = 0; r < 6; ++r) {
    for (int k = 0; k < len; ++k) m.weights(r, k) = p[pos++];
  }
  pull(m.bias);
  pull(m.eta_raw);
  return m;
}

}  // namespace bodyio
