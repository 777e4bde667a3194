#ifndef DRQ_RUNNER_HPP
#define DRQ_RUNNER_HPP

// Batch operations behind the command-line tool: dataset statistics,
// scene-disjoint splitting and report-producing evaluation.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "drq/adrscore.hpp"
#include "drq/caption_metrics.hpp"
#include "drq/chain.hpp"
#include "drq/config.hpp"
#include "drq/embedder.hpp"
#include "drq/error.hpp"
#include "drq/qa_gen.hpp"
#include "drq/util.hpp"
#include "drq/visual_metrics.hpp"

namespace drq {

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMalformedInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMalformedInput, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Non-blank lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) out.emplace_back(n, line);
  }
  return out;
}

inline nlohmann::json parse_line(const std::string& line, std::size_t number, const std::string& source) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, source + ":" + std::to_string(number) + ": " + e.what());
  }
}

inline std::vector<QARecord> parse_dataset(const std::string& text, const std::string& source = "dataset") {
  std::vector<QARecord> records;
  for (const auto& [n, line] : read_lines(text)) {
    try {
      records.push_back(qa_record_from_json(parse_line(line, n, source)));
    } catch (const Error& e) {
      throw Error(e.code(), source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Statistics

// Record counts laid out as target rows x task columns.
struct TaskTargetTable {
  std::array<std::array<std::size_t, 3>, 4> counts{};

  void add(Task task, Target target) { ++counts[static_cast<std::size_t>(target)][static_cast<std::size_t>(task)]; }

  std::size_t row_total(Target t) const {
    const auto& r = counts[static_cast<std::size_t>(t)];
    return r[0] + r[1] + r[2];
  }

  std::size_t column_total(Task t) const {
    std::size_t s = 0;
    for (const auto& r : counts) s += r[static_cast<std::size_t>(t)];
    return s;
  }

  std::size_t total() const {
    std::size_t s = 0;
    for (auto t : kAllTasks) s += column_total(t);
    return s;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (auto target : kAllTargets) {
      nlohmann::ordered_json row;
      row["target"] = std::string(to_string(target));
      for (auto task : kAllTasks) row[std::string(to_string(task))] = counts[static_cast<std::size_t>(target)][static_cast<std::size_t>(task)];
      row["total"] = row_total(target);
      rows.push_back(std::move(row));
    }
    nlohmann::ordered_json totals;
    for (auto task : kAllTasks) totals[std::string(to_string(task))] = column_total(task);
    totals["total"] = total();
    nlohmann::ordered_json j;
    j["rows"] = std::move(rows);
    j["totals"] = std::move(totals);
    return j;
  }

  std::string to_text() const {
    static constexpr std::array<const char*, 4> kRowNames = {"Ego vehicle", "Single object", "Multi objects", "Scenario"};
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-14s %12s %12s %12s %10s\n", "Target", "Perception", "Prediction", "Reasoning", "Total");
    out += buf;
    for (auto target : kAllTargets) {
      const auto& r = counts[static_cast<std::size_t>(target)];
      std::snprintf(buf, sizeof(buf), "%-14s %12zu %12zu %12zu %10zu\n", kRowNames[static_cast<std::size_t>(target)], r[0],
                    r[1], r[2], row_total(target));
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-14s %12zu %12zu %12zu %10zu\n", "Total", column_total(Task::kPerception),
                  column_total(Task::kPrediction), column_total(Task::kReasoning), total());
    out += buf;
    return out;
  }
};

inline TaskTargetTable count_records(const std::vector<QARecord>& records) {
  TaskTargetTable t;
  for (const auto& r : records) t.add(r.task, r.target);
  return t;
}

// ---------------------------------------------------------------------------
// Split

struct SplitResult {
  std::vector<std::string> train_lines;
  std::vector<std::string> val_lines;
  std::vector<std::string> train_scenes;
  std::vector<std::string> val_scenes;
};

// Assigns whole scenes to train or validation; records keep file order.
inline SplitResult split_by_scene(const std::string& dataset_text, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "ratio must lie in [0, 1]");
  std::vector<std::pair<std::string, std::string>> rows;  // (scene_id, line)
  std::set<std::string> scene_set;
  for (const auto& [n, line] : read_lines(dataset_text)) {
    const auto j = parse_line(line, n, "dataset");
    if (!j.is_object() || !j.contains("scene_id") || !j["scene_id"].is_string()) {
      throw Error(ErrorCode::kSchemaViolation, "dataset:" + std::to_string(n) + ": record without scene_id");
    }
    scene_set.insert(j["scene_id"].get<std::string>());
    rows.emplace_back(j["scene_id"].get<std::string>(), line);
  }
  if (scene_set.size() < 2) {
    throw Error(ErrorCode::kSingleScene, "need at least two scenes to split, found " + std::to_string(scene_set.size()));
  }
  std::vector<std::string> scenes(scene_set.begin(), scene_set.end());
  PortableRng rng(seed);
  rng.shuffle(std::span<std::string>(scenes));
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(scenes.size())));

  SplitResult out;
  out.train_scenes.assign(scenes.begin(), scenes.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val_scenes.assign(scenes.begin() + static_cast<std::ptrdiff_t>(n_train), scenes.end());
  std::sort(out.train_scenes.begin(), out.train_scenes.end());
  std::sort(out.val_scenes.begin(), out.val_scenes.end());
  const std::unordered_set<std::string> train(out.train_scenes.begin(), out.train_scenes.end());
  for (auto& [scene, line] : rows) {
    (train.count(scene) ? out.train_lines : out.val_lines).push_back(std::move(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Prediction {
  std::string record_id;
  std::string text;
};

// Lines carry {"record_id", "prediction"}; a line without "prediction" but
// with "reference" (a dataset line) is read as predicting its reference.
inline std::vector<Prediction> parse_predictions(const std::string& text, const std::string& source = "predictions") {
  std::vector<Prediction> out;
  for (const auto& [n, line] : read_lines(text)) {
    const auto j = parse_line(line, n, source);
    const std::string where = source + ":" + std::to_string(n);
    if (!j.is_object() || !j.contains("record_id") || !j["record_id"].is_string()) {
      throw Error(ErrorCode::kSchemaViolation, where + ": missing record_id");
    }
    const char* key = j.contains("prediction") ? "prediction" : "reference";
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorCode::kSchemaViolation, where + ": missing prediction text");
    }
    out.push_back({j["record_id"].get<std::string>(), j[key].get<std::string>()});
  }
  return out;
}

enum class RecordFlag { kNone, kMissing, kError };

inline std::string_view to_string(RecordFlag f) {
  switch (f) {
    case RecordFlag::kNone: return "ok";
    case RecordFlag::kMissing: return "missing";
    case RecordFlag::kError: return "error";
  }
  return "ok";
}

struct RecordResult {
  std::string record_id;
  Task task = Task::kPerception;
  Target target = Target::kScenario;
  std::string sub_task;
  RecordFlag flag = RecordFlag::kNone;
  std::string error;
  ScoreBreakdown semantic;
  ScoreBreakdown visual;
  std::vector<std::string> warnings;
  std::vector<IdentifiedElement> pred_elements;
  std::vector<IdentifiedElement> ref_elements;
  std::string prediction_text;
  std::string reference_text;
};

struct ScoreMeans {
  double ra = 0.0, rd = 0.0, ms = 0.0, total = 0.0;
};

struct AggregateRow {
  Task task = Task::kPerception;
  Target target = Target::kScenario;
  std::size_t count = 0;
  std::size_t flagged = 0;
  ScoreMeans semantic;
  ScoreMeans visual;
};

struct CaptionScores {
  std::optional<double> bleu4;
  std::optional<double> rouge_l;
  std::optional<double> cider;
  std::map<std::string, std::string> notes;
};

struct MetricReport {
  nlohmann::ordered_json config;
  std::string provider_id;
  std::vector<RecordResult> records;  // sorted by record_id
  std::vector<AggregateRow> aggregates;
  AggregateRow overall;
  ElementSummary visual;
  CaptionScores caption;
  std::vector<std::string> warnings;
  double elapsed_seconds = 0.0;
};

namespace detail {

inline std::vector<IdentifiedElement> number_elements(const std::string& record_id, const ReasoningChain& chain) {
  std::vector<IdentifiedElement> out;
  std::size_t locs = 0, mots = 0;
  for (const auto& s : chain.steps) {
    for (const auto& e : s.elements) {
      const bool loc = e.kind() == ElementKind::kLoc;
      out.emplace_back(record_id + (loc ? "#loc" + std::to_string(locs++) : "#mot" + std::to_string(mots++)), e);
    }
  }
  return out;
}

inline double mean_magnitude(const std::vector<IdentifiedElement>& elements) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [_, e] : elements) {
    if (e.kind() == ElementKind::kLoc) {
      const auto& b = e.box();
      sum += std::abs(b.x1) + std::abs(b.y1) + std::abs(b.x2) + std::abs(b.y2);
      n += 4;
    } else {
      for (const auto& p : e.points()) {
        sum += std::abs(p.x) + std::abs(p.y);
        n += 2;
      }
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

inline void accumulate(ScoreMeans& m, const ScoreBreakdown& s) {
  m.ra += s.ra;
  m.rd += s.rd;
  m.ms += s.ms;
  m.total += s.total;
}

inline void finish(ScoreMeans& m, std::size_t n) {
  if (n == 0) return;
  const auto d = static_cast<double>(n);
  m.ra /= d;
  m.rd /= d;
  m.ms /= d;
  m.total /= d;
}

inline RecordResult evaluate_one(const QARecord& ref, const Prediction* pred, const RunnerConfig& cfg,
                                 EmbeddingProvider& provider) {
  RecordResult r;
  r.record_id = ref.record_id;
  r.task = ref.task;
  r.target = ref.target;
  r.sub_task = ref.sub_task;
  r.reference_text = serialize(ref.reference);
  r.ref_elements = number_elements(ref.record_id, ref.reference);
  r.semantic.mode = ScoreMode::kSemantic;
  r.visual.mode = ScoreMode::kVisualAdapted;
  if (!pred) {
    r.flag = RecordFlag::kMissing;
    return r;
  }
  r.prediction_text = pred->text;
  try {
    const ReasoningChain hyp = parse_chain(pred->text, cfg.lenient_predictions);
    r.pred_elements = number_elements(ref.record_id, hyp);
    const auto sim = embedding_similarity(provider, hyp, ref.reference);
    r.semantic = score(hyp, ref.reference, cfg.metric, sim, ScoreMode::kSemantic);
    r.visual = score(hyp, ref.reference, cfg.metric, sim, ScoreMode::kVisualAdapted);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProviderUnavailable || e.code() == ErrorCode::kDimensionMismatch) throw;
    r.flag = RecordFlag::kError;
    r.error = e.code() == ErrorCode::kEmptyInput ? std::string("EmptyChain: prediction has no steps") : e.what();
    r.semantic = ScoreBreakdown{};
    r.visual = ScoreBreakdown{};
    r.visual.mode = ScoreMode::kVisualAdapted;
    return r;
  }
  const double pm = mean_magnitude(r.pred_elements);
  const double rm = mean_magnitude(r.ref_elements);
  if (pm > 0.0 && rm > 0.0 && std::max(pm, rm) / std::min(pm, rm) > 100.0) {
    r.warnings.push_back("coordinate magnitudes differ by more than 100x; unit mismatch suspected");
  }
  return r;
}

}  // namespace detail

inline MetricReport evaluate(std::vector<QARecord> refs, const std::vector<Prediction>& preds, const RunnerConfig& cfg,
                             EmbeddingProvider& provider) {
  const auto started = std::chrono::steady_clock::now();
  cfg.validate();
  std::sort(refs.begin(), refs.end(), [](const QARecord& a, const QARecord& b) { return a.record_id < b.record_id; });
  for (std::size_t i = 1; i < refs.size(); ++i) {
    if (refs[i].record_id == refs[i - 1].record_id) {
      throw Error(ErrorCode::kSchemaViolation, "duplicate reference record_id " + refs[i].record_id);
    }
  }
  std::unordered_set<std::string> ref_ids;
  for (const auto& r : refs) ref_ids.insert(r.record_id);
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.record_id, &p).second) {
      throw Error(ErrorCode::kSchemaViolation, "duplicate prediction record_id " + p.record_id);
    }
    if (!ref_ids.count(p.record_id)) {
      throw Error(ErrorCode::kSchemaViolation, "prediction record_id not in references: " + p.record_id);
    }
  }

  MetricReport report;
  report.config = config_echo(cfg);
  report.provider_id = provider.info().provider_id;
  report.records.resize(refs.size());

  std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(refs.size(), 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < refs.size(); i = next++) {
            auto it = by_id.find(refs[i].record_id);
            report.records[i] = detail::evaluate_one(refs[i], it == by_id.end() ? nullptr : it->second, cfg, provider);
          }
        } catch (...) {
          failures[w] = std::current_exception();
          next = refs.size();
        }
      });
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  for (auto& r : report.records) {
    r.semantic.provider_id = report.provider_id;
    r.visual.provider_id = report.provider_id;
  }

  // Aggregates, in target-row / task-column order.
  std::map<std::pair<int, int>, AggregateRow> groups;
  for (const auto& r : report.records) {
    auto& g = groups[{static_cast<int>(r.target), static_cast<int>(r.task)}];
    g.task = r.task;
    g.target = r.target;
    for (auto* row : {&g, &report.overall}) {
      ++row->count;
      row->flagged += r.flag != RecordFlag::kNone;
      detail::accumulate(row->semantic, r.semantic);
      detail::accumulate(row->visual, r.visual);
    }
  }
  for (auto& [_, g] : groups) {
    detail::finish(g.semantic, g.count);
    detail::finish(g.visual, g.count);
    report.aggregates.push_back(g);
  }
  detail::finish(report.overall.semantic, report.overall.count);
  detail::finish(report.overall.visual, report.overall.count);

  // Visual elements across the whole batch.
  std::vector<IdentifiedElement> all_pred, all_ref;
  std::set<std::string> warned;
  for (const auto& r : report.records) {
    all_pred.insert(all_pred.end(), r.pred_elements.begin(), r.pred_elements.end());
    all_ref.insert(all_ref.end(), r.ref_elements.begin(), r.ref_elements.end());
    for (const auto& w : r.warnings) {
      if (warned.insert(w).second) report.warnings.push_back(w);
    }
  }
  report.visual = evaluate_elements(all_pred, all_ref, cfg.iou_threshold);

  // Caption baselines over answered records.
  Corpus corpus;
  for (const auto& r : report.records) {
    if (r.flag == RecordFlag::kMissing) continue;
    corpus.entries.push_back({tokenize(r.prediction_text), {tokenize(r.reference_text)}});
  }
  report.caption.notes["meteor"] = "not computed: requires external synonym and paraphrase resources";
  if (corpus.entries.empty()) {
    report.caption.notes["bleu4"] = report.caption.notes["rouge_l"] = report.caption.notes["cider"] =
        "no predictions to score";
  } else {
    report.caption.bleu4 = bleu4(corpus);
    report.caption.rouge_l = rouge_l(corpus);
    if (corpus.entries.size() >= 2) {
      report.caption.cider = cider(corpus);
    } else {
      report.caption.notes["cider"] = "needs at least 2 answered records";
    }
  }

  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

namespace detail {

inline nlohmann::ordered_json means_json(const ScoreMeans& m) {
  return {{"ra", m.ra}, {"rd", m.rd}, {"ms", m.ms}, {"total", m.total}};
}

inline nlohmann::ordered_json breakdown_json(const ScoreBreakdown& s) {
  nlohmann::ordered_json j;
  j["alignment_h_to_r"] = s.alignment_h_to_r;
  j["alignment_r_to_h"] = s.alignment_r_to_h;
  j["ra"] = s.ra;
  j["rd"] = s.rd;
  j["ms"] = s.ms;
  j["total"] = s.total;
  return j;
}

template <typename T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const MetricReport& rep) {
  nlohmann::ordered_json j;
  j["toolkit"] = {{"name", kToolkitName}, {"version", kToolkitVersion}, {"wording_version", kWordingVersion}};
  j["provider_id"] = rep.provider_id;
  j["config"] = rep.config;

  std::size_t missing = 0, errors = 0;
  for (const auto& r : rep.records) {
    missing += r.flag == RecordFlag::kMissing;
    errors += r.flag == RecordFlag::kError;
  }
  j["summary"] = {{"records", rep.records.size()}, {"flagged", missing + errors}, {"missing", missing}, {"errors", errors}};

  nlohmann::ordered_json overall;
  overall["count"] = rep.overall.count;
  overall["flagged"] = rep.overall.flagged;
  overall["adrscore"] = detail::means_json(rep.overall.semantic);
  overall["adrscore_s"] = detail::means_json(rep.overall.visual);
  j["overall"] = std::move(overall);

  nlohmann::ordered_json aggs = nlohmann::ordered_json::array();
  for (const auto& a : rep.aggregates) {
    nlohmann::ordered_json row;
    row["task"] = std::string(to_string(a.task));
    row["target"] = std::string(to_string(a.target));
    row["count"] = a.count;
    row["flagged"] = a.flagged;
    row["adrscore"] = detail::means_json(a.semantic);
    row["adrscore_s"] = detail::means_json(a.visual);
    aggs.push_back(std::move(row));
  }
  j["aggregates"] = std::move(aggs);

  const auto& v = rep.visual;
  j["visual"] = {{"box_accuracy", detail::optional_json(v.box_accuracy)},
                 {"mean_ade", detail::optional_json(v.mean_ade)},
                 {"iou_threshold", rep.config["visual"]["iou_threshold"]},
                 {"gt_boxes", v.gt_boxes},
                 {"gt_trajectories", v.gt_trajectories},
                 {"matched", v.matched},
                 {"missing", v.missing},
                 {"surplus", v.surplus},
                 {"length_mismatch", v.length_mismatch}};

  nlohmann::ordered_json caption;
  caption["bleu4"] = detail::optional_json(rep.caption.bleu4);
  caption["rouge_l"] = detail::optional_json(rep.caption.rouge_l);
  caption["cider"] = detail::optional_json(rep.caption.cider);
  caption["meteor"] = nullptr;
  caption["notes"] = rep.caption.notes;
  j["caption"] = std::move(caption);

  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  nlohmann::ordered_json errs = nlohmann::ordered_json::array();
  for (const auto& r : rep.records) {
    nlohmann::ordered_json row;
    row["record_id"] = r.record_id;
    row["task"] = std::string(to_string(r.task));
    row["sub_task"] = r.sub_task;
    row["target"] = std::string(to_string(r.target));
    row["flag"] = std::string(to_string(r.flag));
    row["adrscore"] = detail::breakdown_json(r.semantic);
    row["adrscore_s"] = detail::breakdown_json(r.visual);
    if (!r.warnings.empty()) row["warnings"] = r.warnings;
    records.push_back(std::move(row));
    if (r.flag == RecordFlag::kError) errs.push_back({{"record_id", r.record_id}, {"error", r.error}});
  }
  j["records"] = std::move(records);
  j["errors"] = std::move(errs);
  j["warnings"] = rep.warnings;
  j["timing"] = {{"elapsed_seconds", rep.elapsed_seconds}};
  return j;
}

inline std::string to_csv(const MetricReport& rep) {
  std::string out = "record_id,task,sub_task,target,flag,ra,rd,ms,adrscore,ra_s,rd_s,ms_s,adrscore_s\n";
  auto num = [](double v) { return format_fixed(v, 6); };
  for (const auto& r : rep.records) {
    out += r.record_id + "," + std::string(to_string(r.task)) + ",\"" + r.sub_task + "\"," +
           std::string(to_string(r.target)) + "," + std::string(to_string(r.flag)) + "," + num(r.semantic.ra) + "," +
           num(r.semantic.rd) + "," + num(r.semantic.ms) + "," + num(r.semantic.total) + "," + num(r.visual.ra) + "," +
           num(r.visual.rd) + "," + num(r.visual.ms) + "," + num(r.visual.total) + "\n";
  }
  return out;
}

}  // namespace drq

#endif  // DRQ_RUNNER_HPP
