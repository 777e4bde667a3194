// drq: generate, split, inspect and score driving reasoning QA datasets.
//
// Exit status: 0 success, 2 input error, 3 embedding provider unavailable.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drq/augment.hpp"
#include "drq/config.hpp"
#include "drq/embedder.hpp"
#include "drq/qa_gen.hpp"
#include "drq/remote_provider.hpp"
#include "drq/runner.hpp"
#include "drq/scene.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitProvider = 3;

std::vector<fs::path> scene_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw drq::Error(drq::ErrorCode::kMalformedInput, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw drq::Error(drq::ErrorCode::kMalformedInput, "no .json scene files in " + dir.string());
  return files;
}

drq::TaskMask parse_tasks(const std::vector<std::string>& names) {
  if (names.empty()) return drq::TaskMask::all();
  drq::TaskMask m;
  m.enabled = {false, false, false};
  for (const auto& n : names) {
    auto t = drq::parse_task(n);
    if (!t) throw drq::Error(drq::ErrorCode::kInvalidArgument, "unknown task '" + n + "'");
    m.set(*t, true);
  }
  return m;
}

struct Provider {
  std::unique_ptr<drq::EmbeddingProvider> base;
  std::unique_ptr<drq::EmbeddingCache> cache;
  std::unique_ptr<drq::CachedProvider> cached;

  drq::EmbeddingProvider& get() { return cached ? static_cast<drq::EmbeddingProvider&>(*cached) : *base; }
};

Provider make_provider(const drq::RunnerConfig& cfg) {
  Provider p;
  if (cfg.provider == "remote") {
    drq::RemoteOptions o;
    o.endpoint = cfg.endpoint;
    o.batch_size = cfg.batch_size;
    o.max_in_flight = cfg.max_in_flight;
    auto remote = std::make_unique<drq::RemoteProvider>(o);
    remote->health();
    p.base = std::move(remote);
  } else {
    p.base = std::make_unique<drq::OfflineProvider>();
  }
  if (!cfg.cache_path.empty()) {
    p.cache = std::make_unique<drq::EmbeddingCache>(cfg.cache_path);
    p.cached = std::make_unique<drq::CachedProvider>(*p.base, *p.cache);
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driving reasoning QA toolkit"};
  app.set_version_flag("--version", std::string(drq::kToolkitVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bool lenient = false;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_flag("--lenient", lenient, "accept unknown keys in scene files");

  // Overrides for configuration values.
  double tau = 0, beta = 0, iou_thr = 0, ratio = 0;
  int horizon = 0;
  std::size_t workers = 0;
  std::string provider, endpoint, cache_path;
  bool no_sampling = false;
  auto* o_tau = app.add_option("--tau", tau, "visual similarity offset");
  auto* o_beta = app.add_option("--beta", beta, "visual similarity scale");
  auto* o_iou = app.add_option("--iou-threshold", iou_thr, "box accuracy threshold");
  auto* o_horizon = app.add_option("--horizon", horizon, "prediction horizon in frames");
  auto* o_workers = app.add_option("--workers", workers, "evaluation threads (0: all cores)");
  auto* o_provider = app.add_option("--provider", provider, "offline or remote")->check(CLI::IsMember({"offline", "remote"}));
  auto* o_endpoint = app.add_option("--endpoint", endpoint, "embedding service base URL");
  auto* o_cache = app.add_option("--cache", cache_path, "embedding cache file");
  auto* o_nosamp = app.add_flag("--no-sampling", no_sampling, "enumerate every multi-object subset");

  auto* gen = app.add_subcommand("generate", "build a QA dataset from scene files");
  std::string scene_dir, out_path, stats_path;
  std::uint64_t seed = 0;
  std::vector<std::string> tasks;
  gen->add_option("scene_dir", scene_dir, "directory of scene .json files")->required();
  gen->add_option("-o,--out", out_path, "output JSONL")->required();
  gen->add_option("--seed", seed, "sampling seed");
  gen->add_option("--tasks", tasks, "perception, prediction, reasoning")->delimiter(',');
  gen->add_option("--stats", stats_path, "write the stats table as JSON here");

  auto* split = app.add_subcommand("split", "split a dataset into train and validation by scene");
  std::string in_path, train_path, val_path;
  split->add_option("dataset", in_path)->required()->check(CLI::ExistingFile);
  split->add_option("--train", train_path)->required();
  split->add_option("--val", val_path)->required();
  split->add_option("--seed", seed);
  auto* o_ratio = split->add_option("--ratio", ratio, "fraction of scenes for training");

  auto* eval = app.add_subcommand("evaluate", "score predictions against references");
  std::string ref_path, pred_path, report_path, csv_path;
  eval->add_option("references", ref_path)->required()->check(CLI::ExistingFile);
  eval->add_option("predictions", pred_path)->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", report_path, "report JSON (default: stdout)");
  eval->add_option("--csv", csv_path, "per-record CSV");

  auto* stats = app.add_subcommand("stats", "count records per task and target");
  bool stats_json = false;
  stats->add_option("dataset", in_path)->required()->check(CLI::ExistingFile);
  stats->add_flag("--json", stats_json, "print JSON instead of the text table");

  auto* check = app.add_subcommand("check-provider", "ping the embedding service health endpoint");

  auto* aug = app.add_subcommand("augment", "emit rephrasing requests for an external language model");
  std::string prompts_path;
  aug->add_option("dataset", in_path)->required()->check(CLI::ExistingFile);
  aug->add_option("-o,--out", out_path)->required();
  aug->add_option("--prompts", prompts_path, "prompt set JSON")->check(CLI::ExistingFile);

  auto* merge = app.add_subcommand("merge-augmented", "apply rephrased answers to a dataset");
  std::string responses_path;
  merge->add_option("dataset", in_path)->required()->check(CLI::ExistingFile);
  merge->add_option("responses", responses_path)->required()->check(CLI::ExistingFile);
  merge->add_option("-o,--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    drq::RunnerConfig cfg;
    if (!config_path.empty()) cfg = drq::parse_config_ini(drq::read_file(config_path));
    if (o_tau->count()) cfg.metric.tau = tau;
    if (o_beta->count()) cfg.metric.beta = beta;
    if (o_iou->count()) cfg.iou_threshold = iou_thr;
    if (o_horizon->count()) cfg.generate.horizon = horizon;
    if (o_workers->count()) cfg.workers = workers;
    if (o_provider->count()) cfg.provider = provider;
    if (o_endpoint->count()) cfg.endpoint = endpoint;
    if (o_cache->count()) cfg.cache_path = cache_path;
    if (o_nosamp->count()) cfg.generate.sampling = false;
    if (o_ratio->count()) cfg.split_ratio = ratio;
    cfg.validate();

    if (*gen) {
      const auto mask = parse_tasks(tasks);
      std::vector<drq::QARecord> all;
      for (const auto& file : scene_files(scene_dir)) {
        drq::SceneSequence scene;
        try {
          scene = drq::load_scene(drq::read_file(file), lenient);
        } catch (const drq::Error& e) {
          throw drq::Error(e.code(), file.string() + ": " + e.what());
        }
        try {
          auto recs = drq::generate(scene, mask, seed, cfg.generate);
          all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
        } catch (const drq::Error& e) {
          if (e.code() != drq::ErrorCode::kEmptyScene) throw;
          std::cerr << "warning: " << file.string() << ": " << e.what() << '\n';
        }
      }
      drq::write_file(out_path, drq::to_jsonl(all));
      const auto table = drq::count_records(all);
      if (!stats_path.empty()) drq::write_file(stats_path, table.to_json().dump(2) + "\n");
      std::cout << table.to_text();
    } else if (*split) {
      const auto res = drq::split_by_scene(drq::read_file(in_path), cfg.split_ratio, seed);
      auto lines = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& l : v) s += l + "\n";
        return s;
      };
      drq::write_file(train_path, lines(res.train_lines));
      drq::write_file(val_path, lines(res.val_lines));
      std::cout << "train: " << res.train_scenes.size() << " scenes, " << res.train_lines.size() << " records\n"
                << "val: " << res.val_scenes.size() << " scenes, " << res.val_lines.size() << " records\n";
    } else if (*eval) {
      auto refs = drq::parse_dataset(drq::read_file(ref_path), ref_path);
      const auto preds = drq::parse_predictions(drq::read_file(pred_path), pred_path);
      auto prov = make_provider(cfg);
      const auto report = drq::evaluate(std::move(refs), preds, cfg, prov.get());
      const std::string body = drq::to_json(report).dump(2) + "\n";
      if (report_path.empty()) {
        std::cout << body;
      } else {
        drq::write_file(report_path, body);
      }
      if (!csv_path.empty()) drq::write_file(csv_path, drq::to_csv(report));
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*stats) {
      const auto table = drq::count_records(drq::parse_dataset(drq::read_file(in_path), in_path));
      std::cout << (stats_json ? table.to_json().dump(2) + "\n" : table.to_text());
    } else if (*check) {
      drq::RemoteOptions o;
      o.endpoint = cfg.endpoint;
      drq::RemoteProvider remote(o);
      std::cout << remote.health().dump() << '\n';
    } else if (*aug) {
      const auto prompts = prompts_path.empty() ? drq::default_prompt_set()
                                                : drq::parse_prompt_set(drq::read_file(prompts_path));
      std::string out;
      for (const auto& r : drq::parse_dataset(drq::read_file(in_path), in_path)) {
        out += drq::to_json(drq::emit_augmentation_prompt(r, prompts)).dump() + "\n";
      }
      drq::write_file(out_path, out);
    } else if (*merge) {
      auto records = drq::parse_dataset(drq::read_file(in_path), in_path);
      std::vector<nlohmann::json> responses;
      for (const auto& [n, line] : drq::read_lines(drq::read_file(responses_path))) {
        responses.push_back(drq::parse_line(line, n, responses_path));
      }
      const auto outcome = drq::merge_augmented(std::move(records), responses);
      drq::write_file(out_path, drq::to_jsonl(outcome.records));
      std::cout << "applied " << outcome.applied << ", rejected " << outcome.rejected.size() << '\n';
      for (const auto& r : outcome.rejected) std::cerr << "rejected: " << r << '\n';
    }
  } catch (const drq::Error& e) {
    std::cerr << "drq: " << e.what() << '\n';
    return e.code() == drq::ErrorCode::kProviderUnavailable ? kExitProvider : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "drq: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
