#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stop_token>
#include <thread>

#include <CLI11.hpp>

#include "slicehub/corpus.hpp"
#include "slicehub/error.hpp"
#include "slicehub/experiments.hpp"
#include "slicehub/http_api.hpp"
#include "slicehub/repository.hpp"

namespace {

using namespace slicehub;

struct StoreOptions {
  std::string store = "slicehub-store";
  std::size_t grid_size = 16;
  double fraction = 0.10;
  std::size_t parallelism_cap = kMaxParallelism;
  std::string engine;
  std::string settings;
  double filament_diameter = 2.85;
};

void add_store_options(CLI::App* cmd, StoreOptions& opts) {
  cmd->add_option("--store", opts.store, "Repository directory")->envname("SLICEHUB_STORE");
  cmd->add_option("--grid-size", opts.grid_size, "Levels per grid axis")->check(CLI::Range(2, 65));
  cmd->add_option("--default-fraction", opts.fraction, "Share of cells sliced for new models")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--parallelism-cap", opts.parallelism_cap, "Upper bound on concurrent jobs")
      ->check(CLI::Range(1, 1000));
  cmd->add_option("--engine", opts.engine, "External slicing engine (synthetic slicer if unset)");
  cmd->add_option("--settings", opts.settings, "Engine settings JSON passed with -j");
  cmd->add_option("--filament-diameter", opts.filament_diameter, "mm, for length-reporting engines");
}

std::unique_ptr<Repository> open_repository(const StoreOptions& opts) {
  RepositoryConfig config;
  config.root = opts.store;
  config.grid_size = opts.grid_size;
  config.default_fraction = opts.fraction;
  config.parallelism_cap = opts.parallelism_cap;
  config.default_parallelism = std::min<std::size_t>(256, opts.parallelism_cap);

  std::shared_ptr<const SlicerBackend> backend;
  if (opts.engine.empty()) {
    backend = std::make_shared<SyntheticSlicer>();
  } else {
    ExternalEngineConfig engine;
    engine.engine_path = opts.engine;
    engine.settings_file = opts.settings;
    engine.filament_diameter_mm = opts.filament_diameter;
    backend = std::make_shared<ExternalSlicer>(engine);
  }
  return std::make_unique<Repository>(config, backend);
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_status(const Orchestrator& orch, const BatchId& id) {
  const BatchStatus st = orch.status(id);
  std::cout << "batch " << id << ": " << st.completed << "/" << st.total << " done, " << st.failed
            << " failed\n";
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoul(item));
  return out;
}

HttpService* g_service = nullptr;

void handle_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slicehub: shared repository of slicing results"};
  app.require_subcommand(1);

  StoreOptions store;

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  add_store_options(serve, store);
  std::string host = "0.0.0.0";
  int port = 8080;
  double backfill_interval_s = 0.0;
  std::size_t backfill_capacity = 256;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->envname("SLICEHUB_PORT");
  serve->add_option("--backfill-interval", backfill_interval_s,
                    "Seconds between backfill ticks (0 disables)");
  serve->add_option("--backfill-capacity", backfill_capacity, "Jobs queued per backfill tick");

  auto* add = app.add_subcommand("add", "Add an STL model");
  add_store_options(add, store);
  std::string stl_path, name, tags, printer, material;
  bool no_share = false;
  add->add_option("stl", stl_path)->required()->check(CLI::ExistingFile);
  add->add_option("--name", name);
  add->add_option("--tags", tags, "Comma-separated");
  add->add_option("--printer", printer);
  add->add_option("--material", material);
  add->add_flag("--no-share", no_share, "Slice locally and print the document; store nothing");

  auto* slice = app.add_subcommand("slice", "Slice more cells of a stored model");
  add_store_options(slice, store);
  std::string model_id;
  double fraction = 0.10;
  std::size_t parallelism = 256;
  slice->add_option("id", model_id)->required();
  slice->add_option("--fraction", fraction)->check(CLI::Range(0.0, 1.0));
  slice->add_option("--parallelism", parallelism)->check(CLI::Range(1, 1000));
  slice->add_option("--printer", printer);
  slice->add_option("--material", material);

  auto* backfill = app.add_subcommand("backfill", "Fill missing results, popular models first");
  add_store_options(backfill, store);
  std::size_t capacity = 256;
  backfill->add_option("--capacity", capacity);

  auto* eval = app.add_subcommand("eval", "Grid-size and interpolation experiments");
  eval->require_subcommand(1);
  std::size_t n_models = 20;
  std::uint64_t seed = 42;
  std::string sizes = "2,3,5,9,17,31";
  std::string sublattices = "2,3,5,9,16";
  std::string out_path;
  std::size_t n_constraints = 20;
  auto* eval_constraints = eval->add_subcommand("constraints", "Constraint-match error vs grid size");
  eval_constraints->add_option("--models", n_models);
  eval_constraints->add_option("--sizes", sizes);
  eval_constraints->add_option("--constraints", n_constraints);
  eval_constraints->add_option("--seed", seed);
  eval_constraints->add_option("--out", out_path, "CSV path (stdout if unset)");
  auto* eval_interp = eval->add_subcommand("interp", "Interpolation error vs sliced sub-lattice");
  eval_interp->add_option("--models", n_models);
  eval_interp->add_option("--sublattices", sublattices);
  eval_interp->add_option("--seed", seed);
  eval_interp->add_option("--out", out_path, "CSV path (stdout if unset)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      auto repo = open_repository(store);
      HttpService service(*repo);
      const int bound = service.bind(host, port);
      if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
      }
      g_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);

      std::jthread backfiller;
      if (backfill_interval_s > 0.0) {
        backfiller = std::jthread([&repo, backfill_interval_s, backfill_capacity](std::stop_token stop) {
          const auto interval = std::chrono::duration<double>(backfill_interval_s);
          auto next = std::chrono::steady_clock::now();
          while (!stop.stop_requested()) {
            if (std::chrono::steady_clock::now() >= next) {
              try {
                repo->backfill_tick(backfill_capacity);
              } catch (const std::exception& e) {
                std::cerr << "backfill: " << e.what() << "\n";
              }
              next = std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
          }
        });
      }
      std::cout << "slicehub listening on " << host << ":" << bound << " (store " << store.store
                << ")" << std::endl;
      service.listen_after_bind();
      g_service = nullptr;
      return 0;
    }

    if (*add) {
      auto repo = open_repository(store);
      std::vector<std::string> tag_list;
      std::stringstream ss(tags);
      for (std::string t; std::getline(ss, t, ',');) {
        if (!t.empty()) tag_list.push_back(t);
      }
      if (name.empty()) name = std::filesystem::path(stl_path).stem().string();
      const AddModelResult added =
          repo->add_model(read_all(stl_path), name, tag_list, !no_share, printer, material);
      if (added.document) {
        std::cout << serialize(*added.document) << "\n";
        return 0;
      }
      std::cout << added.model_id << (added.created ? " (new)" : " (already stored)") << "\n";
      if (added.batch_id) {
        repo->orchestrator().wait(*added.batch_id);
        print_status(repo->orchestrator(), *added.batch_id);
      }
      return 0;
    }

    if (*slice) {
      auto repo = open_repository(store);
      const auto batch = repo->slice_fraction(model_id, printer, material, fraction, parallelism);
      if (!batch) {
        std::cout << "nothing to slice\n";
        return 0;
      }
      repo->orchestrator().wait(*batch);
      print_status(repo->orchestrator(), *batch);
      return 0;
    }

    if (*backfill) {
      auto repo = open_repository(store);
      const auto batches = repo->backfill_tick(capacity);
      for (const BatchId& id : batches) {
        repo->orchestrator().wait(id);
        print_status(repo->orchestrator(), id);
      }
      if (batches.empty()) std::cout << "nothing to backfill\n";
      return 0;
    }

    if (*eval) {
      const auto corpus = generate_corpus(n_models, seed);
      std::vector<ExperimentReport> reports;
      if (*eval_constraints) {
        const auto grid_sizes = parse_sizes(sizes);
        reports = constraint_error_experiment(corpus, grid_sizes, n_constraints, seed);
      } else {
        const auto ks = parse_sizes(sublattices);
        reports = interpolation_error_experiment(corpus, ks, seed);
      }
      if (out_path.empty()) {
        write_csv(std::cout, reports);
      } else {
        std::ofstream out(out_path);
        write_csv(out, reports);
        std::cout << "wrote " << out_path << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
