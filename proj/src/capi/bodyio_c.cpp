#include "bodyio/bodyio.h"

#include <cstring>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <new>
#include <optional>
#include <string>

#include "bodyio/config.hpp"
#include "bodyio/error.hpp"
#include "bodyio/pipeline.hpp"

struct bfio_config {
  bodyio::RunConfig cfg;
};

struct bfio_filter {
  std::unique_ptr<bodyio::StreamingEstimator> estimator;
  std::deque<bodyio::FilterState> ready;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
bfio_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void forward_log(bodyio::LogLevel level, const std::string& msg) {
  std::lock_guard lock(g_log_mutex);
  if (g_log_fn) g_log_fn(static_cast<bfio_log_level>(level), msg.c_str(), g_log_user);
}

bfio_status status_of(bodyio::ErrorKind kind) {
  switch (kind) {
    case bodyio::ErrorKind::Argument: return BFIO_ERR_ARGUMENT;
    case bodyio::ErrorKind::Config: return BFIO_ERR_CONFIG;
    case bodyio::ErrorKind::Data: return BFIO_ERR_DATA;
    case bodyio::ErrorKind::Numerical: return BFIO_ERR_NUMERICAL;
  }
  return BFIO_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into status codes and the thread's
// last-error message.
template <typename Fn>
bfio_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BFIO_OK;
  } catch (const bodyio::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return BFIO_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return BFIO_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) bodyio::fail(bodyio::ErrorKind::Argument, what);
}

std::optional<std::filesystem::path> optional_path(const char* p) {
  if (p == nullptr || *p == '\0') return std::nullopt;
  return std::filesystem::path(p);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bodyio::CorrectorModel filter_corrector(const bodyio::RunConfig& cfg, const char* path) {
  if (auto p = optional_path(path)) return bodyio::load_corrector(*p);
  if (cfg.corrector.kind == "affine")
    bodyio::fail(bodyio::ErrorKind::Config,
                 "corrector.kind is 'affine' but no corrector weights were given");
  return bodyio::IdentityCorrector(cfg.corrector.eta_g, cfg.corrector.eta_a);
}

void export_state(const bodyio::FilterState& fs, bfio_nav_state* out) {
  out->t = fs.t;
  const Eigen::Vector4d q = fs.x.r.quaternion();
  for (int i = 0; i < 3; ++i) {
    out->p[i] = fs.x.p[i];
    out->v[i] = fs.x.v[i];
    out->b_a[i] = fs.x.b_a[i];
    out->b_g[i] = fs.x.b_g[i];
  }
  for (int i = 0; i < 4; ++i) out->q[i] = q[i];
  out->trace_p = fs.P.P.trace();
}

}  // namespace

extern "C" {

const char* bfio_version(void) { return "0.1.0"; }

const char* bfio_last_error(void) { return g_last_error.c_str(); }

void bfio_string_free(char* s) { delete[] s; }

void bfio_set_log_handler(bfio_log_fn fn, void* user) {
  std::lock_guard lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

bfio_status bfio_config_new(bfio_config** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new bfio_config{};
  });
}

bfio_status bfio_config_parse(const char* json, bfio_config** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = new bfio_config{bodyio::parse_config(json)};
  });
}

bfio_status bfio_config_load(const char* path, bfio_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new bfio_config{bodyio::load_config(path)};
  });
}

void bfio_config_free(bfio_config* cfg) { delete cfg; }

bfio_status bfio_config_set(bfio_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    bodyio::set_config_value(cfg->cfg, key, value);
  });
}

bfio_status bfio_config_set_seed(bfio_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    cfg->cfg.seed = seed;
  });
}

bfio_status bfio_config_seed(const bfio_config* cfg, uint64_t* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = cfg->cfg.seed;
  });
}

bfio_status bfio_config_validate(const bfio_config* cfg) {
  return guarded([&] {
    require(cfg != nullptr, "null config");
    cfg->cfg.validate();
  });
}

bfio_status bfio_config_dump(const bfio_config* cfg, char** out_json) {
  return guarded([&] {
    require(cfg && out_json, "null argument");
    *out_json = copy_string(bodyio::dump_config(cfg->cfg));
  });
}

bfio_status bfio_config_describe(const bfio_config* cfg, const char* sections,
                                 char** out_text) {
  return guarded([&] {
    require(cfg && sections && out_text, "null argument");
    std::vector<std::string> names;
    std::string s = sections;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      names.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    std::string text;
    for (const auto& line : bodyio::describe_keys(cfg->cfg, names)) text += line + "\n";
    *out_text = copy_string(text);
  });
}

bfio_status bfio_simulate(const bfio_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg && out_dir, "null argument");
    bodyio::run_simulate(cfg->cfg, out_dir, forward_log);
  });
}

bfio_status bfio_deadreckon(const bfio_config* cfg, const char* seq_dir,
                            const char* corrector, const char* out_csv) {
  return guarded([&] {
    require(cfg && seq_dir && out_csv, "null argument");
    bodyio::run_deadreckon(cfg->cfg, seq_dir, optional_path(corrector), out_csv,
                           forward_log);
  });
}

bfio_status bfio_train_corrector(const bfio_config* cfg, const char* corpus,
                                 const char* out_path) {
  return guarded([&] {
    require(cfg && corpus && out_path, "null argument");
    bodyio::run_train_corrector(cfg->cfg, corpus, out_path, forward_log);
  });
}

bfio_status bfio_train_motion(const bfio_config* cfg, const char* corpus,
                              const char* out_path, const char* report_csv) {
  return guarded([&] {
    require(cfg && corpus && out_path, "null argument");
    bodyio::run_train_motion(cfg->cfg, corpus, out_path, optional_path(report_csv),
                             forward_log);
  });
}

bfio_status bfio_run_ekf(const bfio_config* cfg, const char* seq_dir,
                         const char* motion_model, const char* corrector,
                         const char* out_csv) {
  return guarded([&] {
    require(cfg && seq_dir && out_csv, "null argument");
    bodyio::run_ekf(cfg->cfg, seq_dir, optional_path(motion_model), optional_path(corrector),
                    out_csv, forward_log);
  });
}

bfio_status bfio_eval(const bfio_config* cfg, const char* corpus, const char* estimates_dir,
                      const char* out_csv, char** out_text) {
  return guarded([&] {
    require(cfg && corpus && estimates_dir, "null argument");
    const auto rows =
        bodyio::run_eval(cfg->cfg, corpus, estimates_dir, optional_path(out_csv), forward_log);
    if (out_text) *out_text = copy_string(bodyio::report_text(rows));
  });
}

bfio_status bfio_analyze(const bfio_config* cfg, const char* corpus,
                         const char* const* models, size_t n_models, const char* out_csv) {
  return guarded([&] {
    require(cfg && corpus && out_csv && (models || n_models == 0), "null argument");
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < n_models; ++i) {
      require(models[i] != nullptr, "null model path");
      paths.emplace_back(models[i]);
    }
    bodyio::run_analyze(cfg->cfg, corpus, paths, out_csv, forward_log);
  });
}

bfio_status bfio_filter_new(const bfio_config* cfg, const char* motion_model,
                            const char* corrector, const bfio_nav_state* x0,
                            bfio_filter** out) {
  return guarded([&] {
    require(cfg && x0 && out, "null argument");
    const auto& c = cfg->cfg;
    c.validate();
    bodyio::VelocityProvider provider;
    if (c.ekf.provider == "zero") {
      provider = bodyio::ConstantZeroProvider{c.ekf.zero_eta};
    } else if (c.ekf.provider == "network") {
      const auto path = optional_path(motion_model);
      if (!path) bodyio::fail(bodyio::ErrorKind::Config, "ekf.provider 'network' needs a motion model");
      provider = bodyio::NetworkProvider{
          std::make_shared<const bodyio::MotionNetModel>(bodyio::MotionNetModel::load(*path))};
    } else {
      bodyio::fail(bodyio::ErrorKind::Config,
                   "ekf.provider 'oracle' needs ground truth and cannot stream");
    }
    bodyio::NavState x;
    x.r = bodyio::RotationSO3::from_quaternion(x0->q[0], x0->q[1], x0->q[2], x0->q[3]);
    x.p = bodyio::Vec3(x0->p[0], x0->p[1], x0->p[2]);
    x.v = bodyio::Vec3(x0->v[0], x0->v[1], x0->v[2]);
    x.b_a = bodyio::Vec3(x0->b_a[0], x0->b_a[1], x0->b_a[2]);
    x.b_g = bodyio::Vec3(x0->b_g[0], x0->b_g[1], x0->b_g[2]);
    auto f = std::make_unique<bfio_filter>();
    f->estimator = std::make_unique<bodyio::StreamingEstimator>(
        std::move(provider), filter_corrector(c, corrector), c.ekf.filter, x,
        c.ekf.filter.initial_covariance());
    *out = f.release();
  });
}

void bfio_filter_free(bfio_filter* f) { delete f; }

bfio_status bfio_filter_push(bfio_filter* f, double t, const double w[3], const double a[3],
                             size_t* n_ready) {
  return guarded([&] {
    require(f && w && a, "null argument");
    bodyio::ImuSample s;
    s.t = t;
    s.w = bodyio::Vec3(w[0], w[1], w[2]);
    s.a = bodyio::Vec3(a[0], a[1], a[2]);
    for (auto& st : f->estimator->push(s)) f->ready.push_back(std::move(st));
    if (n_ready) *n_ready = f->ready.size();
  });
}

bfio_status bfio_filter_flush(bfio_filter* f, size_t* n_ready) {
  return guarded([&] {
    require(f != nullptr, "null filter");
    for (auto& st : f->estimator->flush()) f->ready.push_back(std::move(st));
    if (n_ready) *n_ready = f->ready.size();
  });
}

bfio_status bfio_filter_pop(bfio_filter* f, bfio_nav_state* out) {
  return guarded([&] {
    require(f && out, "null argument");
    require(!f->ready.empty(), "no state is waiting");
    export_state(f->ready.front(), out);
    f->ready.pop_front();
  });
}

}  // extern "C"
