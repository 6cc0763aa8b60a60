#include "bodyio/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "bodyio/error.hpp"
#include "json.hpp"

namespace bodyio {

using nlohmann::json;

namespace {

std::string normalize(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '_' || c == '-' || c == ' ') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

struct Field {
  std::string section;  // "" for top level
  std::string key;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;

  std::string path() const { return section.empty() ? key : section + "." + key; }
};

// Binds a member reached through `access` to JSON.
template <typename T, typename Access>
Field field_of(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](const RunConfig& c) {
            return json(access(const_cast<RunConfig&>(c)));
          },
          [access](RunConfig& c, const json& j) { access(c) = j.get<T>(); }};
}

template <typename Access>
Field vec3_field(std::string section, std::string key, Access access) {
  return {std::move(section), std::move(key),
          [access](const RunConfig& c) {
            const Vec3& v = access(const_cast<RunConfig&>(c));
            return json::array({v.x(), v.y(), v.z()});
          },
          [access](RunConfig& c, const json& j) {
            const auto v = j.get<std::vector<double>>();
            if (v.size() != 3) throw std::invalid_argument("expected 3 numbers");
            access(c) = Vec3(v[0], v[1], v[2]);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(field_of<std::uint64_t>("", "seed", [](RunConfig& c) -> auto& { return c.seed; }));

    const std::string sim = "simulator";
    f.push_back(field_of<std::string>(sim, "kind", [](RunConfig& c) -> auto& { return c.simulator.kind; }));
    f.push_back(field_of<std::string>(sim, "yaw_mode", [](RunConfig& c) -> auto& { return c.simulator.yaw_mode; }));
    f.push_back(field_of<double>(sim, "amplitude", [](RunConfig& c) -> auto& { return c.simulator.base.amplitude; }));
    f.push_back(field_of<double>(sim, "angular_rate", [](RunConfig& c) -> auto& { return c.simulator.base.angular_rate; }));
    f.push_back(field_of<double>(sim, "spin_rate", [](RunConfig& c) -> auto& { return c.simulator.base.spin_rate; }));
    f.push_back(field_of<double>(sim, "duration", [](RunConfig& c) -> auto& { return c.simulator.base.duration; }));
    f.push_back(field_of<double>(sim, "imu_rate", [](RunConfig& c) -> auto& { return c.simulator.base.imu_rate; }));
    f.push_back(field_of<double>(sim, "phase", [](RunConfig& c) -> auto& { return c.simulator.base.phase; }));
    f.push_back(field_of<double>(sim, "yaw0", [](RunConfig& c) -> auto& { return c.simulator.base.yaw0; }));
    f.push_back(field_of<double>(sim, "tilt_amplitude", [](RunConfig& c) -> auto& { return c.simulator.base.tilt_amplitude; }));
    f.push_back(field_of<double>(sim, "tilt_rate", [](RunConfig& c) -> auto& { return c.simulator.base.tilt_rate; }));
    f.push_back(field_of<bool>(sim, "thrust_aligned", [](RunConfig& c) -> auto& { return c.simulator.base.thrust_aligned; }));
    f.push_back(field_of<double>(sim, "drag", [](RunConfig& c) -> auto& { return c.simulator.base.drag; }));
    f.push_back(field_of<int>(sim, "sequences", [](RunConfig& c) -> auto& { return c.simulator.sequences; }));
    f.push_back(field_of<int>(sim, "unseen", [](RunConfig& c) -> auto& { return c.simulator.unseen; }));
    f.push_back(field_of<bool>(sim, "randomize", [](RunConfig& c) -> auto& { return c.simulator.randomize; }));

    const std::string noise = "noise";
    f.push_back(field_of<double>(noise, "sigma_g", [](RunConfig& c) -> auto& { return c.noise.sigma_g; }));
    f.push_back(field_of<double>(noise, "sigma_a", [](RunConfig& c) -> auto& { return c.noise.sigma_a; }));
    f.push_back(field_of<double>(noise, "sigma_bg", [](RunConfig& c) -> auto& { return c.noise.sigma_bg; }));
    f.push_back(field_of<double>(noise, "sigma_ba", [](RunConfig& c) -> auto& { return c.noise.sigma_ba; }));
    f.push_back(vec3_field(noise, "b_g0", [](RunConfig& c) -> auto& { return c.noise.b_g0; }));
    f.push_back(vec3_field(noise, "b_a0", [](RunConfig& c) -> auto& { return c.noise.b_a0; }));

    const std::string cor = "corrector";
    f.push_back(field_of<std::string>(cor, "kind", [](RunConfig& c) -> auto& { return c.corrector.kind; }));
    f.push_back(field_of<double>(cor, "eta_g", [](RunConfig& c) -> auto& { return c.corrector.eta_g; }));
    f.push_back(field_of<double>(cor, "eta_a", [](RunConfig& c) -> auto& { return c.corrector.eta_a; }));
    f.push_back(field_of<int>(cor, "window_len", [](RunConfig& c) -> auto& { return c.corrector.train.window_len; }));
    f.push_back(field_of<int>(cor, "epochs", [](RunConfig& c) -> auto& { return c.corrector.train.epochs; }));
    f.push_back(field_of<double>(cor, "step_fraction", [](RunConfig& c) -> auto& { return c.corrector.train.step_fraction; }));

    const std::string mot = "motion";
    f.push_back(field_of<int>(mot, "latent_dim", [](RunConfig& c) -> auto& { return c.motion.net.latent_dim; }));
    f.push_back(field_of<int>(mot, "gru_layers", [](RunConfig& c) -> auto& { return c.motion.net.gru_layers; }));
    f.push_back(field_of<std::vector<int>>(mot, "imu_encoder_channels", [](RunConfig& c) -> auto& { return c.motion.net.imu_encoder_channels; }));
    f.push_back(field_of<std::vector<int>>(mot, "attitude_encoder_channels", [](RunConfig& c) -> auto& { return c.motion.net.attitude_encoder_channels; }));
    f.push_back(field_of<double>(mot, "dropout_p", [](RunConfig& c) -> auto& { return c.motion.net.dropout_p; }));
    f.push_back(field_of<int>(mot, "window", [](RunConfig& c) -> auto& { return c.motion.net.window; }));
    f.push_back(field_of<int>(mot, "stride", [](RunConfig& c) -> auto& { return c.motion.stride; }));
    f.push_back({mot, "representation",
                 [](const RunConfig& c) { return json(std::string(to_string(c.motion.net.representation))); },
                 [](RunConfig& c, const json& j) {
                   c.motion.net.representation = representation_from_string(j.get<std::string>());
                 }});
    f.push_back(field_of<int>(mot, "epochs", [](RunConfig& c) -> auto& { return c.motion.train.epochs; }));
    f.push_back(field_of<int>(mot, "batch_size", [](RunConfig& c) -> auto& { return c.motion.train.batch_size; }));
    f.push_back(field_of<double>(mot, "learning_rate", [](RunConfig& c) -> auto& { return c.motion.train.learning_rate; }));
    f.push_back(field_of<int>(mot, "patience", [](RunConfig& c) -> auto& { return c.motion.train.patience; }));
    f.push_back(field_of<double>(mot, "decay", [](RunConfig& c) -> auto& { return c.motion.train.decay; }));
    f.push_back(field_of<double>(mot, "huber_delta", [](RunConfig& c) -> auto& { return c.motion.loss.delta; }));
    f.push_back(field_of<double>(mot, "cov_lambda", [](RunConfig& c) -> auto& { return c.motion.loss.lambda; }));

    const std::string ekf = "ekf";
    f.push_back(field_of<double>(ekf, "update_rate", [](RunConfig& c) -> auto& { return c.ekf.filter.update_rate; }));
    f.push_back(field_of<std::size_t>(ekf, "buffer_len", [](RunConfig& c) -> auto& { return c.ekf.filter.buffer_len; }));
    f.push_back(vec3_field(ekf, "eta_bg", [](RunConfig& c) -> auto& { return c.ekf.filter.eta_bg; }));
    f.push_back(vec3_field(ekf, "eta_ba", [](RunConfig& c) -> auto& { return c.ekf.filter.eta_ba; }));
    f.push_back({ekf, "initial_std",
                 [](const RunConfig& c) {
                   const auto& s = c.ekf.filter.initial_std;
                   return json(std::vector<double>(s.data(), s.data() + 15));
                 },
                 [](RunConfig& c, const json& j) {
                   const auto v = j.get<std::vector<double>>();
                   if (v.size() != 15) throw std::invalid_argument("expected 15 numbers");
                   for (int i = 0; i < 15; ++i) c.ekf.filter.initial_std[i] = v[i];
                 }});
    f.push_back(field_of<std::string>(ekf, "provider", [](RunConfig& c) -> auto& { return c.ekf.provider; }));
    f.push_back(field_of<double>(ekf, "oracle_noise", [](RunConfig& c) -> auto& { return c.ekf.oracle_noise; }));
    f.push_back(field_of<double>(ekf, "zero_eta", [](RunConfig& c) -> auto& { return c.ekf.zero_eta; }));

    const std::string ev = "eval";
    f.push_back(field_of<double>(ev, "rte_interval", [](RunConfig& c) -> auto& { return c.eval.rte_interval; }));
    f.push_back(field_of<double>(ev, "tau_max", [](RunConfig& c) -> auto& { return c.eval.tau_max; }));
    f.push_back(field_of<int>(ev, "n_thresholds", [](RunConfig& c) -> auto& { return c.eval.n_thresholds; }));
    f.push_back(field_of<std::string>(ev, "segment", [](RunConfig& c) -> auto& { return c.eval.segment; }));
    f.push_back(field_of<std::string>(ev, "ate_alignment", [](RunConfig& c) -> auto& { return c.eval.ate_alignment; }));
    f.push_back(field_of<double>(ev, "train_frac", [](RunConfig& c) -> auto& { return c.eval.split.train_frac; }));
    f.push_back(field_of<double>(ev, "val_frac", [](RunConfig& c) -> auto& { return c.eval.split.val_frac; }));
    f.push_back(field_of<double>(ev, "test_frac", [](RunConfig& c) -> auto& { return c.eval.split.test_frac; }));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& path) {
  for (const auto& f : fields()) {
    if (f.path() == path) return &f;
  }
  return nullptr;
}

void apply(RunConfig& cfg, const Field& f, const json& value) {
  try {
    f.set(cfg, value);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, f.path() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    fail(ErrorKind::Config, f.path() + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::Config, f.path() + ": " + e.what());
  }
}

bool is_section(const std::string& name) {
  for (const auto& f : fields()) {
    if (f.section == name && !name.empty()) return true;
  }
  return false;
}

}  // namespace

TrajectorySpec SimulatorSection::default_base() {
  TrajectorySpec s;
  s.amplitude = 2.0;
  s.angular_rate = 0.6;
  s.duration = 60.0;
  s.thrust_aligned = true;
  s.drag = 0.3;
  return s;
}

NoiseSpec RunConfig::default_noise() {
  NoiseSpec n;
  n.sigma_g = 1e-3;
  n.sigma_a = 1e-2;
  n.sigma_bg = 1e-5;
  n.sigma_ba = 1e-4;
  return n;
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  const std::string n = normalize(name);
  if (n == "circle") return TrajectoryKind::Circle;
  if (n == "figure8") return TrajectoryKind::Figure8;
  if (n == "lissajous3d" || n == "lissajous") return TrajectoryKind::Lissajous3D;
  if (n == "waypointspline" || n == "spline") return TrajectoryKind::WaypointSpline;
  fail(ErrorKind::Config, "unknown trajectory kind '" + name + "'");
}

YawMode yaw_mode_from_string(const std::string& name) {
  const std::string n = normalize(name);
  if (n == "followvelocity") return YawMode::FollowVelocity;
  if (n == "spin") return YawMode::Spin;
  if (n == "fixed") return YawMode::Fixed;
  fail(ErrorKind::Config, "unknown yaw mode '" + name + "'");
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& key, const std::string& why) {
    if (!ok) fail(ErrorKind::Config, key + ": " + why);
  };
  auto rethrow_as = [](const std::string& section, auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      const std::string what = e.what();
      fail(ErrorKind::Config, what.starts_with(section + ".") ? what : section + ": " + what);
    }
  };
  if (normalize(simulator.kind) != "mixed") trajectory_kind_from_string(simulator.kind);
  if (normalize(simulator.yaw_mode) != "mixed") yaw_mode_from_string(simulator.yaw_mode);
  rethrow_as("simulator", [&] { simulator.base.validate(); });
  check(simulator.sequences >= 1, "simulator.sequences", "must be >= 1");
  check(simulator.unseen >= 0 && simulator.unseen <= simulator.sequences,
        "simulator.unseen", "must lie in [0, sequences]");
  rethrow_as("noise", [&] { noise.validate(); });
  check(corrector.kind == "identity" || corrector.kind == "affine", "corrector.kind",
        "must be 'identity' or 'affine'");
  check(corrector.eta_g > 0, "corrector.eta_g", "must be > 0");
  check(corrector.eta_a > 0, "corrector.eta_a", "must be > 0");
  check(corrector.train.window_len >= 1, "corrector.window_len", "must be >= 1");
  check(corrector.train.epochs >= 0, "corrector.epochs", "must be >= 0");
  check(corrector.train.step_fraction > 0 && corrector.train.step_fraction < 2,
        "corrector.step_fraction", "must lie in (0, 2)");
  rethrow_as("motion", [&] { motion.net.validate(); });
  check(motion.stride >= 1, "motion.stride", "must be >= 1");
  check(motion.train.epochs >= 1, "motion.epochs", "must be >= 1");
  check(motion.train.batch_size >= 1, "motion.batch_size", "must be >= 1");
  check(motion.train.learning_rate > 0, "motion.learning_rate", "must be > 0");
  check(motion.train.patience >= 1, "motion.patience", "must be >= 1");
  check(motion.train.decay > 0 && motion.train.decay <= 1, "motion.decay",
        "must lie in (0, 1]");
  check(motion.loss.delta > 0, "motion.huber_delta", "must be > 0");
  check(motion.loss.lambda >= 0, "motion.cov_lambda", "must be >= 0");
  rethrow_as("ekf", [&] { ekf.filter.validate(); });
  check(ekf.filter.update_rate <= simulator.base.imu_rate, "ekf.update_rate",
        "must not exceed simulator.imu_rate");
  check(ekf.provider == "network" || ekf.provider == "oracle" || ekf.provider == "zero",
        "ekf.provider", "must be 'network', 'oracle' or 'zero'");
  check(ekf.oracle_noise >= 0, "ekf.oracle_noise", "must be >= 0");
  check(ekf.zero_eta > 0, "ekf.zero_eta", "must be > 0");
  check(eval.rte_interval > 0, "eval.rte_interval", "must be > 0");
  check(eval.tau_max > 0, "eval.tau_max", "must be > 0");
  check(eval.n_thresholds >= 1, "eval.n_thresholds", "must be >= 1");
  check(eval.segment == "all" || eval.segment == "test", "eval.segment",
        "must be 'all' or 'test'");
  check(eval.ate_alignment == "none" || eval.ate_alignment == "se3", "eval.ate_alignment",
        "must be 'none' or 'se3'");
  rethrow_as("eval", [&] { eval.split.validate(); });
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (is_section(key)) {
      if (!value.is_object()) fail(ErrorKind::Config, key + ": expected an object");
      for (const auto& [sub, v] : value.items()) {
        const Field* f = find_field(key + "." + sub);
        if (!f) fail(ErrorKind::Config, key + "." + sub + ": unknown key");
        apply(cfg, *f, v);
      }
    } else {
      const Field* f = find_field(key);
      if (!f) fail(ErrorKind::Config, key + ": unknown key");
      apply(cfg, *f, value);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void set_config_value(RunConfig& cfg, const std::string& key_path,
                      const std::string& json_value) {
  const Field* f = find_field(key_path);
  if (!f) fail(ErrorKind::Config, key_path + ": unknown key");
  json value;
  try {
    value = json::parse(json_value);
  } catch (const json::exception&) {
    value = json_value;  // bare words are taken as strings
  }
  apply(cfg, *f, value);
}

std::string dump_config(const RunConfig& cfg) {
  json doc = json::object();
  for (const auto& f : fields()) {
    if (f.section.empty()) {
      doc[f.key] = f.get(cfg);
    } else {
      doc[f.section][f.key] = f.get(cfg);
    }
  }
  return doc.dump(2) + "\n";
}

std::vector<std::string> describe_keys(const RunConfig& cfg,
                                       const std::vector<std::string>& sections) {
  std::vector<std::string> out;
  for (const auto& f : fields()) {
    if (std::find(sections.begin(), sections.end(), f.section) == sections.end()) continue;
    out.push_back(f.path() + " = " + f.get(cfg).dump());
  }
  return out;
}

}  // namespace bodyio
