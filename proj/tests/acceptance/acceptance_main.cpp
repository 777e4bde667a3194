// Acceptance suite: one PASS/FAIL line per criterion, offline provider only.
// Exit status is the number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "drq/adrscore.hpp"
#include "drq/caption_metrics.hpp"
#include "drq/config.hpp"
#include "drq/embedder.hpp"
#include "drq/qa_gen.hpp"
#include "drq/runner.hpp"
#include "drq/templates.hpp"
#include "drq/visual_metrics.hpp"

using namespace drq;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kFixtures = DRQ_FIXTURES;

// sha256 of the scene_a dataset at seed 7, horizon 2. Recorded once;
// another platform producing different bytes fails here.
constexpr std::string_view kSceneAGolden = "bbd24b1beb5d199d0544fc92d35f9f9737c64b990ff3ca448d13ca8ca3863aba";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

SceneSequence scene(const std::string& name) { return load_scene(read_file(kFixtures / name)); }

// Short horizon so a 5-frame scene yields all three tasks.
GenerateOptions short_horizon() {
  GenerateOptions o;
  o.horizon = 2;
  return o;
}

ReasoningChain named_chain(char prefix, std::size_t n) {
  ReasoningChain c;
  for (std::size_t i = 0; i < n; ++i) c.steps.push_back({prefix + std::to_string(i), {}});
  return c;
}

SemanticSimilarity table_similarity(const std::vector<std::vector<double>>& t) {
  return [&t](const Step& h, const Step& r) {
    return t.at(std::stoul(h.text.substr(1))).at(std::stoul(r.text.substr(1)));
  };
}

Outcome metric_identity() {
  const auto all = generate(scene("scenes/scene_a.json"), TaskMask::all(), 7, short_horizon());
  std::vector<QARecord> refs;
  const std::size_t stride = all.size() / 50;
  for (std::size_t i = 0; refs.size() < 50; i += stride) refs.push_back(all[i]);
  std::vector<Prediction> preds;
  for (const auto& r : refs) preds.push_back({r.record_id, serialize(r.reference)});

  const auto t0 = Clock::now();
  OfflineProvider provider;
  const auto rep = evaluate(refs, preds, {}, provider);
  const double elapsed = seconds_since(t0);

  double worst = 0.0;
  for (const auto& r : rep.records) {
    if (r.flag != RecordFlag::kNone) return {false, r.record_id + " flagged " + std::string(to_string(r.flag))};
    for (const auto* b : {&r.semantic, &r.visual}) {
      for (double v : {b->ra, b->rd, b->ms, b->total}) worst = std::max(worst, std::abs(v - 1.0));
    }
  }
  std::set<Task> tasks;
  for (const auto& r : refs) tasks.insert(r.task);
  return {worst <= 1e-9 && elapsed < 5.0 && tasks.size() == 3,
          "50 records, max |score - 1| = " + fmt(worst) + ", " + fmt(elapsed) + " s"};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = len(rng), k = len(rng);
    std::vector<std::vector<double>> t(n, std::vector<double>(k));
    for (auto& row : t) {
      for (auto& x : row) x = val(rng);
    }
    // brute force
    std::vector<double> alpha(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) alpha[i] = *std::max_element(t[i].begin(), t[i].end());
    double sum = 0.0;
    for (double a : alpha) sum += a;
    const double ra = sum / static_cast<double>(n);
    const double rd = *std::min_element(alpha.begin(), alpha.end());
    double ms = 2.0;
    for (std::size_t j = 0; j < k; ++j) {
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) best = std::max(best, t[i][j]);
      ms = std::min(ms, best);
    }
    const double total = (ra + rd + ms) / 3.0;
    const auto b = score(named_chain('h', n), named_chain('r', k), {}, table_similarity(t));
    if (b.ra != ra || b.rd != rd || b.ms != ms || b.total != total || b.alignment_h_to_r != alpha) ++mismatches;
  }
  return {mismatches == 0, "1000 random pairs, " + std::to_string(mismatches) + " mismatches"};
}

Outcome visual_constants() {
  const MetricConfig cfg;
  const std::vector<std::pair<double, double>> cases = {{0, 1}, {5, 1}, {10, 0.5}, {15, 0}, {25, 0}};
  const SemanticSimilarity unused = [](const Step&, const Step&) { return -1.0; };
  std::string got;
  bool ok = cfg.tau == 15.0 && cfg.beta == 10.0;
  for (const auto& [m, expected] : cases) {
    // a box step whose every coordinate is off by sqrt(M)
    const double d = std::sqrt(m);
    const Step a{"a", {VisualElement::loc({0, 0, 10, 10})}};
    const Step b{"b", {VisualElement::loc({d, d, 10 + d, 10 + d})}};
    const double s = step_similarity(a, b, cfg, unused, ScoreMode::kVisualAdapted);
    ok = ok && std::abs(s - expected) <= 1e-9 && std::abs(visual_similarity(m, cfg) - expected) <= 1e-9;
    got += (got.empty() ? "" : ", ") + fmt(s);
  }
  return {ok, "M {0,5,10,15,25} -> {" + got + "}"};
}

Outcome worked_stub() {
  const std::vector<std::vector<double>> t = {{0.2, 0.9, 0.1}, {0.4, 0.3, 0.8}};
  const auto b = score(named_chain('h', 2), named_chain('r', 3), {}, table_similarity(t));
  const bool ok = std::abs(b.ra - 0.85) <= 1e-6 && std::abs(b.rd - 0.80) <= 1e-6 && std::abs(b.ms - 0.40) <= 1e-6 &&
                  std::abs(b.total - 0.683333) <= 1e-6;
  return {ok, "RA " + fmt(b.ra) + ", RD " + fmt(b.rd) + ", MS " + fmt(b.ms) + ", total " + fmt(b.total)};
}

Outcome geometry() {
  const std::vector<Point2> a = {{0, 0}, {1, 1}, {2, 2}};
  const std::vector<Point2> b = {{3, 4}, {4, 5}, {5, 6}};
  const double d = ade(a, b);
  const double i = iou({0, 0, 10, 10}, {5, 0, 15, 10});
  const std::vector<IdentifiedElement> gt = {{"a", VisualElement::loc({0, 0, 10, 10})},
                                             {"b", VisualElement::loc({0, 0, 10, 10})},
                                             {"c", VisualElement::loc({0, 0, 10, 10})},
                                             {"d", VisualElement::loc({0, 0, 10, 10})}};
  const std::vector<IdentifiedElement> pred = {{"a", VisualElement::loc({0, 0, 10, 10})},
                                               {"b", VisualElement::loc({0, 0, 10, 6})},
                                               {"c", VisualElement::loc({0, 0, 10, 4})},
                                               {"d", VisualElement::loc({20, 20, 30, 30})}};
  const auto acc = evaluate_elements(pred, gt, 0.5).box_accuracy.value_or(-1.0);
  return {d == 5.0 && std::abs(i - 1.0 / 3.0) <= 1e-6 && acc == 0.5,
          "ADE " + fmt(d) + ", IoU " + fmt(i) + ", box accuracy " + fmt(acc)};
}

Outcome template_registry() {
  std::map<Task, int> counts;
  for (const auto& t : list_templates()) ++counts[t.task];
  std::ifstream in(kFixtures / "template_table.tsv");
  std::string line;
  std::getline(in, line);
  int rows = 0, verbatim = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string task, sub, target, question;
    std::getline(ss, task, '\t');
    std::getline(ss, sub, '\t');
    std::getline(ss, target, '\t');
    std::getline(ss, question, '\t');
    ++rows;
    const auto tk = parse_task(task);
    const auto tg = parse_target(target);
    for (const auto& t : list_templates()) {
      if (tk && tg && t.task == *tk && t.target == *tg && t.sub_task == sub && t.question_text == question) {
        ++verbatim;
        break;
      }
    }
  }
  const int p = counts[Task::kPerception], q = counts[Task::kPrediction], r = counts[Task::kReasoning];
  return {p == 12 && q == 14 && r == 6 && rows == 32 && verbatim == 32,
          std::to_string(p) + "/" + std::to_string(q) + "/" + std::to_string(r) + " templates, " +
              std::to_string(verbatim) + " of " + std::to_string(rows) + " table rows verbatim"};
}

Outcome generation_determinism() {
  const auto s = scene("scenes/scene_a.json");
  const auto first = generate(s, TaskMask::all(), 7, short_horizon());
  const std::string a = to_jsonl(first);
  const std::string b = to_jsonl(generate(scene("scenes/scene_a.json"), TaskMask::all(), 7, short_horizon()));
  std::size_t round_trips = 0, total = 0;
  for (const auto& name : {"scenes/scene_a.json", "turn_arc.json", "crowded.json"}) {
    for (const auto& r : generate(scene(name), TaskMask::all(), 11, short_horizon())) {
      ++total;
      const std::string text = serialize(r.reference);
      try {
        if (parse_chain(text) == r.reference && serialize(parse_chain(text)) == text) ++round_trips;
      } catch (const Error&) {
      }
    }
  }
  const std::string hash = sha256_hex(a);
  const bool golden = hash == kSceneAGolden;
  return {a == b && golden && round_trips == total,
          std::to_string(first.size()) + " records, runs identical: " + (a == b ? "yes" : "no") +
              ", golden hash: " + (golden ? "match" : "MISMATCH " + hash) + ", chains round-tripped " +
              std::to_string(round_trips) + "/" + std::to_string(total)};
}

Outcome split_contract() {
  std::string text;
  for (int i = 0; i < 10; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "split_scenes/split_%02d.json", i);
    text += to_jsonl(generate(scene(name), TaskMask::all(), 1));
  }
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = split_by_scene(text, 0.7, seed);
    std::set<std::string> train(s.train_scenes.begin(), s.train_scenes.end());
    bool disjoint = true;
    for (const auto& v : s.val_scenes) disjoint = disjoint && !train.count(v);
    good += disjoint && s.train_scenes.size() == 7 && s.val_scenes.size() == 3;
  }
  return {good == 100, std::to_string(good) + "/100 seeds disjoint with 7/3 scenes"};
}

Corpus corpus(const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  Corpus c;
  for (const auto& [cand, refs] : rows) {
    CorpusEntry e{tokenize(cand), {}};
    for (const auto& r : refs) e.references.push_back(tokenize(r));
    c.entries.push_back(std::move(e));
  }
  return c;
}

Corpus identical(Corpus c) {
  for (auto& e : c.entries) e.candidate = e.references.front();
  return c;
}

Outcome caption_metrics() {
  // Toy corpora and goldens shared with tests/oracles/caption_oracle.py.
  const Corpus bleu_c = corpus({
      {"the vehicle in front of the ego is moving slowly", {"the vehicle in front of the ego is stopped now"}},
      {"a pedestrian stands at the left side of the road",
       {"a pedestrian is standing on the left side of the road", "there is a pedestrian to the left"}},
  });
  const Corpus rouge_c = corpus({
      {"the car ahead will turn left soon", {"the car in front will turn left"}},
      {"the cyclist is parked on the right", {"a cyclist on the right is parked"}},
  });
  const Corpus cider_c = corpus({
      {"the vehicle ahead is moving towards the ego", {"the vehicle in front is approaching the ego"}},
      {"a pedestrian is standing at the left side", {"the pedestrian is waiting on the left side"}},
      {"the ego vehicle should slow down for safety now", {"the ego vehicle will slow down because of risk"}},
  });
  const double b = bleu4(bleu_c), r = rouge_l(rouge_c), c = cider(cider_c);
  const bool golden = std::abs(b - 0.641115056895) <= 1e-6 && std::abs(r - 0.642857142857) <= 1e-6 &&
                      std::abs(c - 1.886185287110) <= 1e-6;
  const double bi = bleu4(identical(bleu_c)), ri = rouge_l(identical(rouge_c)), ci = cider(identical(cider_c));
  const bool trivial = bi == 1.0 && ri == 1.0 && ci == 10.0;
  return {golden && trivial, "BLEU-4 " + fmt(b) + ", ROUGE-L " + fmt(r) + ", CIDEr " + fmt(c) + "; identical " +
                                 fmt(bi) + " / " + fmt(ri) + " / " + fmt(ci)};
}

}  // namespace

int main() {
  const auto suite_start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric identity", metric_identity},
      {"oracle equivalence", oracle_equivalence},
      {"visual similarity constants", visual_constants},
      {"worked stub case", worked_stub},
      {"geometry", geometry},
      {"template registry", template_registry},
      {"generation determinism and chain grammar", generation_determinism},
      {"split contract", split_contract},
      {"caption metrics", caption_metrics},
  };
  int failed = 0;
  bool all_ran = true;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
      all_ran = false;
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  // Nothing above constructs a network client; only OfflineProvider is used.
  const double total = seconds_since(suite_start);
  const bool offline_ok = all_ran && total < 120.0;
  failed += !offline_ok;
  std::printf("%s  offline suite runtime: %s s with the offline provider, no network\n", offline_ok ? "PASS" : "FAIL",
              fmt(total).c_str());
  std::printf("%d of %zu criteria failed\n", failed, criteria.size() + 1);
  return failed;
}
