// bodyio command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bodyio/bodyio.h"

namespace {

// Exit codes: 0 ok, 2 usage or configuration, 3 data, 4 numerical, 5 internal.
int exit_code(bfio_status s) {
  switch (s) {
    case BFIO_OK: return 0;
    case BFIO_ERR_ARGUMENT:
    case BFIO_ERR_CONFIG: return 2;
    case BFIO_ERR_DATA: return 3;
    case BFIO_ERR_NUMERICAL: return 4;
    default: return 5;
  }
}

struct Failure {
  bfio_status status;
};

void check(bfio_status s) {
  if (s != BFIO_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(bfio_config* c) const { bfio_config_free(c); }
};
using ConfigPtr = std::unique_ptr<bfio_config, ConfigDeleter>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  bfio_string_free(s);
  return out;
}

// Default values of the keys a subcommand reads, for its --help footer.
std::string keys_footer(const char* sections) {
  bfio_config* raw = nullptr;
  if (bfio_config_new(&raw) != BFIO_OK) return {};
  ConfigPtr cfg(raw);
  char* text = nullptr;
  if (bfio_config_describe(cfg.get(), sections, &text) != BFIO_OK) return {};
  return "\nConfig keys (defaults; change with --set key=value):\n" + take_string(text);
}

void log_to_stderr(bfio_log_level level, const char* message, void*) {
  std::fprintf(stderr, "%s%s\n", level == BFIO_LOG_WARNING ? "warning: " : "", message);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Body-frame inertial odometry toolkit"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_version_flag("--version", bfio_version());

  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::vector<std::string> overrides;
  bool dump_defaults = false;
  bool quiet = false;
  app.add_option("--seed", seed, "Master seed (else BODYFRAME_IO_SEED, else the config)");
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Override one config key, key=value (repeatable)");
  app.add_flag("--dump-defaults", dump_defaults, "Print the effective configuration and exit");
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  // Each subcommand fills `action`, run once the config is assembled.
  std::function<void(const bfio_config*)> action;

  std::string out, seq, corpus, corrector, model, report, estimates, provider, shape;
  std::vector<std::string> models;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic corpus");
  sim->add_option("--out", out, "Output directory")->required();
  sim->add_option("--spec", shape, "Shorthand for --set simulator.kind=...")
      ->check(CLI::IsMember({"circle", "figure8", "lissajous3d", "waypoint_spline", "mixed"}));
  sim->footer(keys_footer(",simulator,noise"));
  sim->callback([&] {
    action = [&](const bfio_config* c) { check(bfio_simulate(c, out.c_str())); };
  });

  auto* dr = app.add_subcommand("deadreckon", "Open-loop IMU integration of one sequence");
  dr->add_option("--seq", seq, "Sequence directory")->required()->check(CLI::ExistingDirectory);
  dr->add_option("--corrector", corrector, "Corrector weights (default: identity)");
  dr->add_option("--out", out, "Trajectory CSV")->required();
  dr->footer(keys_footer("corrector"));
  dr->callback([&] {
    action = [&](const bfio_config* c) {
      check(bfio_deadreckon(c, seq.c_str(), corrector.c_str(), out.c_str()));
    };
  });

  auto* tc = app.add_subcommand("train-corrector", "Fit the affine IMU corrector");
  tc->add_option("--corpus", corpus, "corpus.cfg")->required()->check(CLI::ExistingFile);
  tc->add_option("--out", out, "Weights file")->required();
  tc->footer(keys_footer(",corrector,eval"));
  tc->callback([&] {
    action = [&](const bfio_config* c) {
      check(bfio_train_corrector(c, corpus.c_str(), out.c_str()));
    };
  });

  auto* tm = app.add_subcommand("train-motion", "Train the velocity network");
  tm->add_option("--corpus", corpus, "corpus.cfg")->required()->check(CLI::ExistingFile);
  tm->add_option("--out", out, "Weights file")->required();
  tm->add_option("--report", report, "Per-epoch loss CSV");
  tm->footer(keys_footer(",motion,eval"));
  tm->callback([&] {
    action = [&](const bfio_config* c) {
      check(bfio_train_motion(c, corpus.c_str(), out.c_str(),
                              report.empty() ? nullptr : report.c_str()));
    };
  });

  auto* ekf = app.add_subcommand("run-ekf", "Filter one sequence with velocity updates");
  ekf->add_option("--seq", seq, "Sequence directory")->required()->check(CLI::ExistingDirectory);
  ekf->add_option("--model", model, "Motion network weights");
  ekf->add_option("--corrector", corrector, "Corrector weights (default: identity)");
  ekf->add_option("--provider", provider, "Shorthand for --set ekf.provider=...")
      ->check(CLI::IsMember({"network", "oracle", "zero"}));
  ekf->add_option("--out", out, "Trajectory CSV")->required();
  ekf->footer(keys_footer(",ekf,corrector"));
  ekf->callback([&] {
    action = [&](const bfio_config* c) {
      check(bfio_run_ekf(c, seq.c_str(), model.c_str(), corrector.c_str(), out.c_str()));
    };
  });

  auto* ev = app.add_subcommand("eval", "Score estimated trajectories against ground truth");
  ev->add_option("--corpus", corpus, "corpus.cfg")->required()->check(CLI::ExistingFile);
  ev->add_option("--estimates", estimates, "Directory of <seq>.csv estimates")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("--out", out, "Report CSV");
  ev->footer(keys_footer("eval,corrector"));
  ev->callback([&] {
    action = [&](const bfio_config* c) {
      char* text = nullptr;
      check(bfio_eval(c, corpus.c_str(), estimates.c_str(), out.empty() ? nullptr : out.c_str(),
                      &text));
      std::cout << take_string(text);
    };
  });

  auto* an = app.add_subcommand("analyze", "PCA spectrum of the network latent space");
  an->add_option("--corpus", corpus, "corpus.cfg")->required()->check(CLI::ExistingFile);
  an->add_option("--model", models, "Motion network weights (repeatable)")->required();
  an->add_option("--out", out, "Spectrum CSV")->required();
  an->footer(keys_footer("eval"));
  an->callback([&] {
    action = [&](const bfio_config* c) {
      std::vector<const char*> ptrs;
      for (const auto& m : models) ptrs.push_back(m.c_str());
      check(bfio_analyze(c, corpus.c_str(), ptrs.data(), ptrs.size(), out.c_str()));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    bfio_config* raw = nullptr;
    check(config_path.empty() ? bfio_config_new(&raw)
                              : bfio_config_load(config_path.c_str(), &raw));
    ConfigPtr cfg(raw);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return 2;
      }
      check(bfio_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }
    if (!shape.empty()) check(bfio_config_set(cfg.get(), "simulator.kind", shape.c_str()));
    if (!provider.empty()) check(bfio_config_set(cfg.get(), "ekf.provider", provider.c_str()));
    if (seed) {
      check(bfio_config_set_seed(cfg.get(), *seed));
    } else if (const char* env = std::getenv("BODYFRAME_IO_SEED")) {
      try {
        check(bfio_config_set_seed(cfg.get(), std::stoull(env)));
      } catch (const std::logic_error&) {
        std::cerr << "error: BODYFRAME_IO_SEED is not an unsigned integer\n";
        return 2;
      }
    }
    check(bfio_config_validate(cfg.get()));

    if (dump_defaults) {
      char* json = nullptr;
      check(bfio_config_dump(cfg.get(), &json));
      std::cout << take_string(json);
      return 0;
    }
    if (!action) {
      std::cout << app.help();
      return 2;
    }
    if (!quiet) bfio_set_log_handler(log_to_stderr, nullptr);
    action(cfg.get());
  } catch (const Failure& f) {
    std::cerr << "error: " << bfio_last_error() << "\n";
    return exit_code(f.status);
  }
  return 0;
}
