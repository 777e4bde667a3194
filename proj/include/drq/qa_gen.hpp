#ifndef DRQ_QA_GEN_HPP
#define DRQ_QA_GEN_HPP

// Question-answer generation from the scene database.
//
// Every template in the registry is answered by a fixed sentence skeleton
// (see kWordingVersion). Perception answers are one step; prediction answers
// perceive then predict; reasoning answers perceive (with <LOC>), predict
// (with <MOT>) and conclude. Scenario-level "no" answers drop the steps that
// would describe a non-existent object.

#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drq/chain.hpp"
#include "drq/error.hpp"
#include "drq/scene.hpp"
#include "drq/templates.hpp"
#include "drq/util.hpp"

namespace drq {

// Bumped whenever any answer skeleton below changes wording.
inline constexpr std::string_view kWordingVersion = "wording-1";

inline constexpr double kTooCloseMeters = 10.0;

struct QARecord {
  std::string record_id;
  std::string scene_id;
  std::size_t frame_index = 0;
  Task task = Task::kPerception;
  std::string sub_task;
  Target target = Target::kScenario;
  std::string question;
  ReasoningChain reference;
  std::vector<std::string> referred_object_ids;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

// One object as seen by an answer builder.
struct Subject {
  std::string id;
  Category category = Category::kOther;
  BBox bbox;
  DerivedLabels labels;
  std::optional<Trajectory> trajectory;
};

struct EgoView {
  EgoLabels labels;
  std::optional<Trajectory> trajectory;
};

// Inputs to one answer. `subjects` holds the referred objects for single and
// multi targets, and every object in the frame for scenario and ego targets.
struct ChainInput {
  std::vector<Subject> subjects;
  std::optional<EgoView> ego;
};

namespace detail {

inline std::string category_phrase(Category c) {
  switch (c) {
    case Category::kVehicle: return "a vehicle";
    case Category::kPedestrian: return "a pedestrian";
    case Category::kCyclist: return "a cyclist";
    case Category::kOther: return "an object";
  }
  return "an object";
}

inline std::string category_noun(Category c) {
  return c == Category::kOther ? "object" : std::string(to_string(c));
}

inline std::string meters(double d) { return format_fixed(d, 1) + " meters"; }

inline std::string speed_text(double v) { return format_fixed(v, 1) + " m/s"; }

inline std::string position_phrase(RelativePosition p) {
  switch (p) {
    case RelativePosition::kFront: return "in front of";
    case RelativePosition::kFrontLeft: return "at the front left of";
    case RelativePosition::kFrontRight: return "at the front right of";
    case RelativePosition::kLeft: return "at the left of";
    case RelativePosition::kRight: return "at the right of";
    case RelativePosition::kRear: return "behind";
  }
  return "near";
}

inline std::string turn_phrase(Turn t) {
  switch (t) {
    case Turn::kLeft: return "turn left";
    case Turn::kRight: return "turn right";
    case Turn::kStraight: return "go straight";
  }
  return "go straight";
}

inline std::string trend_phrase(Trend t) {
  switch (t) {
    case Trend::kApproach: return "approach the ego vehicle";
    case Trend::kStayAway: return "stay away from the ego vehicle";
    case Trend::kStatic: return "keep its distance to the ego vehicle";
  }
  return "keep its distance to the ego vehicle";
}

inline std::string merge_phrase(Merge m) {
  switch (m) {
    case Merge::kMergeIn: return "merge into the ego lane";
    case Merge::kMergeOut: return "merge out of the ego lane";
    case Merge::kNone: return "not merge in or out of the ego lane";
  }
  return "not merge in or out of the ego lane";
}

inline bool is_stopped(MotionStatus m) { return m != MotionStatus::kMoving; }

inline std::string inst(std::size_t i) { return "<Inst" + std::to_string(i + 1) + ">"; }

inline std::string list_text(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

inline std::string be(std::size_t n) { return n == 1 ? "is" : "are"; }

// Appends "the <noun> at <LOC>(...)" for each selected scenario subject.
inline void name_scene_objects(StepBuilder& b, const std::vector<const Subject*>& subjects) {
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (i) b.text((i + 1 == subjects.size()) ? " and " : ", ");
    b.text("the " + category_noun(subjects[i]->category) + " at ").loc(subjects[i]->bbox);
  }
}

inline bool risky(const DerivedLabels& l) {
  if (l.merge == Merge::kMergeIn) return true;
  return l.distance_to_ego < kTooCloseMeters &&
         (l.trend == Trend::kApproach || l.relative_position == RelativePosition::kFront);
}

inline std::string activity(const Subject& s) {
  if (s.labels.motion_status == MotionStatus::kParked) return "parked";
  if (s.labels.motion_status == MotionStatus::kStopped) return "waiting";
  if (s.category == Category::kPedestrian) return "walking";
  switch (s.labels.turn) {
    case Turn::kLeft: return "turning left";
    case Turn::kRight: return "turning right";
    case Turn::kStraight: break;
  }
  return "driving straight";
}

inline std::string activity_cause(const DerivedLabels& l) {
  if (l.motion_status == MotionStatus::kParked) return "it stays still throughout the scene";
  if (l.motion_status == MotionStatus::kStopped) return "it has slowed to a halt";
  switch (l.trend) {
    case Trend::kApproach: return "it is heading towards the ego vehicle";
    case Trend::kStayAway: return "it is moving away from the ego vehicle";
    case Trend::kStatic: break;
  }
  return "it keeps pace with the ego vehicle";
}

inline std::string future_action(const DerivedLabels& l) {
  if (l.motion_status == MotionStatus::kParked) return "remain parked";
  if (is_stopped(l.future_motion)) {
    return is_stopped(l.motion_status) ? "remain stopped" : "come to a stop";
  }
  switch (l.turn) {
    case Turn::kLeft: return "turn left";
    case Turn::kRight: return "turn right";
    case Turn::kStraight: break;
  }
  return "keep going straight";
}

[[noreturn]] inline void mismatch(const TemplateSpec& t, const std::string& why) {
  throw Error(ErrorCode::kTemplateInputMismatch,
              std::string(t.sub_task) + "/" + std::string(to_string(t.target)) + ": " + why);
}

// Nearest subject satisfying `pred`, or nullptr.
template <typename Pred>
const Subject* nearest(const std::vector<Subject>& subjects, Pred pred) {
  const Subject* best = nullptr;
  for (const auto& s : subjects) {
    if (!pred(s)) continue;
    if (!best || s.labels.distance_to_ego < best->labels.distance_to_ego) best = &s;
  }
  return best;
}

template <typename Pred>
std::vector<const Subject*> select(const std::vector<Subject>& subjects, Pred pred) {
  std::vector<const Subject*> out;
  for (const auto& s : subjects) {
    if (pred(s)) out.push_back(&s);
  }
  return out;
}

template <typename Pred>
std::vector<std::string> select_inst(const std::vector<Subject>& subjects, Pred pred) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (pred(subjects[i])) out.push_back(inst(i));
  }
  return out;
}

class ChainWriter {
 public:
  ChainWriter(const ChainInput& in, const TemplateSpec& t) : in_(in), t_(t) { validate(); }

  ReasoningChain write() {
    switch (t_.answer_builder) {
      case AnswerBuilder::kCategorySingle: return one(StepBuilder().text("The referred object is " + category_phrase(s0().category)));
      case AnswerBuilder::kCategoryMulti: return multi_answer(
          [](const Subject& s) { return s.category == Category::kVehicle; },
          "a vehicle", "vehicles", "No, none of these objects is a vehicle", "Yes, ");
      case AnswerBuilder::kCategoryScenario: {
        std::size_t n = 0;
        for (const auto& s : in_.subjects) n += s.category == Category::kVehicle;
        return one(StepBuilder().text("There " + be(n) + " " + std::to_string(n) +
                                      (n == 1 ? " vehicle" : " vehicles") + " in the driving scenario"));
      }
      case AnswerBuilder::kAttributeSingle:
        return one(StepBuilder().text("The referred object is " + std::string(to_string(s0().labels.motion_status))));
      case AnswerBuilder::kAttributeMulti: return multi_answer(
          [](const Subject& s) { return is_stopped(s.labels.motion_status); },
          "stopped", "stopped", "None of these objects is stopped", "");
      case AnswerBuilder::kAttributeScenario: return scenario_yes_no(
          [](const Subject& s) { return s.labels.motion_status == MotionStatus::kParked; },
          "parked", "No, there are no objects parked in the driving scenario");
      case AnswerBuilder::kDistanceSingle:
        return one(StepBuilder().text("The referred object is " + meters(s0().labels.distance_to_ego) + " away from the ego"));
      case AnswerBuilder::kDistanceMulti: {
        std::size_t best = 0;
        for (std::size_t i = 1; i < in_.subjects.size(); ++i) {
          if (in_.subjects[i].labels.distance_to_ego < in_.subjects[best].labels.distance_to_ego) best = i;
        }
        return one(StepBuilder().text(inst(best) + " is closest to the ego at " +
                                      meters(in_.subjects[best].labels.distance_to_ego)));
      }
      case AnswerBuilder::kDistanceScenario: return scenario_yes_no(
          [](const Subject& s) { return s.labels.distance_to_ego < kTooCloseMeters; },
          "too close to the ego", "No, there are no objects too close to the ego");
      case AnswerBuilder::kPositionSingle:
        return one(StepBuilder()
                       .text("The referred object is located " + position_phrase(s0().labels.relative_position) +
                             " the ego at ")
                       .loc(s0().bbox));
      case AnswerBuilder::kPositionMulti: return multi_answer(
          [](const Subject& s) {
            return s.labels.relative_position == RelativePosition::kLeft ||
                   s.labels.relative_position == RelativePosition::kFrontLeft;
          },
          "located at left of the ego", "located at left of the ego",
          "None of these objects is located at left of the ego", "");
      case AnswerBuilder::kPositionScenario: return scenario_yes_no(
          [](const Subject& s) { return s.labels.relative_position == RelativePosition::kFront; },
          "right in front of the ego", "No, there are no objects right in front of the ego");

      case AnswerBuilder::kMotionSingle:
        return two(StepBuilder().text("The referred object is " + category_phrase(s0().category) + " at ").loc(s0().bbox),
                   StepBuilder().text("Its future trajectory is ").mot(s0().trajectory->points));
      case AnswerBuilder::kMotionEgo:
        return two(ego_status_step(), StepBuilder().text("The future trajectory of the ego vehicle is ")
                                          .mot(in_.ego->trajectory->points));
      case AnswerBuilder::kMovingStrategySingle:
        return two(StepBuilder()
                       .text("The referred object is " + category_phrase(s0().category) + " at ")
                       .loc(s0().bbox)
                       .text(", currently " + std::string(to_string(s0().labels.motion_status))),
                   StepBuilder().text("It will be " + std::string(to_string(s0().labels.future_motion)) +
                                      " in a few seconds"));
      case AnswerBuilder::kMovingStrategyMulti: return multi_predict(
          [](const Subject& s) { return std::string(to_string(s.labels.motion_status)); },
          [](const Subject& s) { return is_stopped(s.labels.future_motion); },
          "will be stopped in a few seconds", "None of these objects will be stopped in a few seconds");
      case AnswerBuilder::kMovingStrategyEgo:
        return two(ego_status_step(), StepBuilder().text("The ego vehicle will be " +
                                                         std::string(to_string(in_.ego->labels.future_motion)) +
                                                         " in a few seconds"));
      case AnswerBuilder::kTurnSingle:
        return two(StepBuilder().text("The referred object is " + category_phrase(s0().category) + " at ").loc(s0().bbox),
                   StepBuilder().text("It will " + turn_phrase(s0().labels.turn)));
      case AnswerBuilder::kTurnMulti: return multi_predict(
          [](const Subject& s) { return std::string(to_string(s.labels.motion_status)); },
          [](const Subject& s) { return s.labels.turn == Turn::kLeft; },
          "will turn left", "None of these objects will turn left");
      case AnswerBuilder::kTurnScenario: return scenario_predict(
          [](const Subject& s) { return s.labels.turn == Turn::kRight; },
          "will turn right", "No, there will be no objects turning right in the driving scenario");
      case AnswerBuilder::kTrendSingle:
        return two(StepBuilder().text("The referred object is " + meters(s0().labels.distance_to_ego) + " away from the ego"),
                   StepBuilder().text("It will " + trend_phrase(s0().labels.trend)));
      case AnswerBuilder::kTrendMulti: return multi_predict(
          [](const Subject& s) { return meters(s.labels.distance_to_ego) + " away"; },
          [](const Subject& s) { return s.labels.trend == Trend::kApproach; },
          "will approach the ego vehicle", "None of these objects will approach the ego vehicle");
      case AnswerBuilder::kTrendScenario: return scenario_predict(
          [](const Subject& s) { return s.labels.trend == Trend::kApproach; },
          "will approach the ego vehicle", "No, there will be no objects approaching the ego vehicle");
      case AnswerBuilder::kMergeSingle:
        return two(StepBuilder()
                       .text("The referred object is at ")
                       .loc(s0().bbox)
                       .text(", " + position_phrase(s0().labels.relative_position) + " the ego"),
                   StepBuilder().text("It will " + merge_phrase(s0().labels.merge)));
      case AnswerBuilder::kMergeMulti: return multi_predict(
          [](const Subject& s) { return position_phrase(s.labels.relative_position) + " the ego"; },
          [](const Subject& s) { return s.labels.merge != Merge::kNone; },
          "will merge in or out of the ego lane", "None of these objects will merge in or out of the ego lane");
      case AnswerBuilder::kMergeScenario: return scenario_predict(
          [](const Subject& s) { return s.labels.merge != Merge::kNone; },
          "will merge in or out of the ego lane", "No, there will be no objects merging in or out of the ego lane");

      case AnswerBuilder::kDrivingStrategySingle:
        return three(object_perceive_step(s0(), ", " + std::string(to_string(s0().labels.motion_status))),
                     object_predict_step(s0(), turn_phrase(s0().labels.turn)),
                     StepBuilder().text("So the referred object is " + activity(s0()) + " because " +
                                        activity_cause(s0().labels)));
      case AnswerBuilder::kDrivingStrategyEgo: {
        const Subject* ahead = nearest(in_.subjects, [](const Subject& s) {
          return s.labels.relative_position == RelativePosition::kFront && s.labels.distance_to_ego < kTooCloseMeters;
        });
        StepBuilder s1 = ego_status_step();
        if (ahead) s1.text(", with ").text("the " + category_noun(ahead->category) + " at ").loc(ahead->bbox).text(" ahead");
        const auto& ego = in_.ego->labels;
        std::string act;
        if (is_stopped(ego.motion_status)) {
          act = "waiting";
        } else {
          act = ego.turn == Turn::kLeft ? "turning left" : ego.turn == Turn::kRight ? "turning right" : "driving straight";
        }
        std::string cause = ahead ? "an object is close ahead"
                            : is_stopped(ego.future_motion) ? "it is coming to a stop"
                                                            : "the road ahead is clear";
        return three(std::move(s1),
                     StepBuilder().text("The future trajectory of the ego vehicle is ").mot(in_.ego->trajectory->points),
                     StepBuilder().text("So the ego vehicle is " + act + " because " + cause));
      }
      case AnswerBuilder::kRiskSingle: {
        const auto& l = s0().labels;
        return three(object_perceive_step(s0(), ", " + meters(l.distance_to_ego) + " away from the ego"),
                     object_predict_step(s0(), l.merge != Merge::kNone ? merge_phrase(l.merge) : trend_phrase(l.trend)),
                     StepBuilder().text(std::string("So the referred object is ") + (risky(l) ? "risky" : "not risky") +
                                        " to the ego vehicle's normal driving"));
      }
      case AnswerBuilder::kRiskScenario: {
        const Subject* threat = nearest(in_.subjects, [](const Subject& s) { return risky(s.labels); });
        if (!threat) {
          const std::size_t n = in_.subjects.size();
          return two(StepBuilder().text("There " + be(n) + " " + std::to_string(n) + (n == 1 ? " object" : " objects") +
                                        " in the driving scenario and none of them threatens the ego vehicle"),
                     StepBuilder().text("So there is no risk to the ego vehicle's normal driving"));
        }
        const auto& l = threat->labels;
        StepBuilder s1;
        s1.text("The " + category_noun(threat->category) + " at ").loc(threat->bbox).text(" is " + meters(l.distance_to_ego) +
                                                                                           " away from the ego");
        StepBuilder s3;
        s3.text("So there is a risk to the ego vehicle's normal driving");
        if (!threat->trajectory) return two(std::move(s1), std::move(s3));
        return three(std::move(s1),
                     StepBuilder()
                         .text("Its future trajectory is ")
                         .mot(threat->trajectory->points)
                         .text(" and it will " + (l.merge != Merge::kNone ? merge_phrase(l.merge) : trend_phrase(l.trend))),
                     std::move(s3));
      }
      case AnswerBuilder::kControlSingle: {
        const auto& l = s0().labels;
        return three(object_perceive_step(s0(), ", " + std::string(to_string(l.motion_status))),
                     object_predict_step(s0(), trend_phrase(l.trend)),
                     StepBuilder().text("So in a few seconds the referred object will " + future_action(l) + " because " +
                                        (risky(l) ? "it is close to the ego vehicle" : "its path is clear")));
      }
      case AnswerBuilder::kControlEgo: {
        const Subject* threat = nearest(in_.subjects, [](const Subject& s) { return risky(s.labels); });
        StepBuilder s1 = ego_status_step();
        if (threat) {
          s1.text(", with ").text("the " + category_noun(threat->category) + " at ").loc(threat->bbox).text(" nearby");
        }
        const auto& ego = in_.ego->labels;
        std::string action;
        std::string cause;
        if (threat) {
          action = "slow down";
          cause = "an object may cut into its path";
        } else if (is_stopped(ego.future_motion)) {
          action = is_stopped(ego.motion_status) ? "remain stopped" : "come to a stop";
          cause = "traffic ahead is stopping";
        } else {
          action = ego.turn == Turn::kLeft ? "keep its speed and turn left"
                   : ego.turn == Turn::kRight ? "keep its speed and turn right"
                                              : "keep its speed and go straight";
          cause = "the road ahead is clear";
        }
        return three(std::move(s1),
                     StepBuilder().text("The future trajectory of the ego vehicle is ").mot(in_.ego->trajectory->points),
                     StepBuilder().text("So the ego vehicle should " + action + " because " + cause));
      }
    }
    mismatch(t_, "unknown answer builder");
  }

 private:
  void validate() const {
    switch (t_.target) {
      case Target::kSingleObject:
        if (in_.subjects.size() != 1) mismatch(t_, "needs exactly one subject");
        break;
      case Target::kMultiObjects:
        if (in_.subjects.size() < 2) mismatch(t_, "needs at least two subjects");
        break;
      case Target::kEgo:
        if (!in_.ego) mismatch(t_, "needs ego state");
        break;
      case Target::kScenario:
        break;
    }
    const bool needs_traj = t_.answer_builder == AnswerBuilder::kMotionSingle ||
                            (t_.task == Task::kReasoning && t_.target == Target::kSingleObject);
    if (needs_traj && !in_.subjects.front().trajectory) mismatch(t_, "needs the object's future trajectory");
    const bool needs_ego_traj = t_.target == Target::kEgo && (t_.answer_builder == AnswerBuilder::kMotionEgo ||
                                                              t_.task == Task::kReasoning);
    if (needs_ego_traj && !in_.ego->trajectory) mismatch(t_, "needs the ego future trajectory");
  }

  const Subject& s0() const { return in_.subjects.front(); }

  static ReasoningChain one(const StepBuilder& a) { return {{a.build()}}; }
  static ReasoningChain two(const StepBuilder& a, const StepBuilder& b) { return {{a.build(), b.build()}}; }
  static ReasoningChain three(const StepBuilder& a, const StepBuilder& b, const StepBuilder& c) {
    return {{a.build(), b.build(), c.build()}};
  }

  StepBuilder ego_status_step() const {
    const auto& e = in_.ego->labels;
    StepBuilder b;
    b.text("The ego vehicle is " + std::string(to_string(e.motion_status)) + " at " + speed_text(e.speed));
    return b;
  }

  static StepBuilder object_perceive_step(const Subject& s, const std::string& tail) {
    StepBuilder b;
    b.text("The referred object is " + category_phrase(s.category) + " at ").loc(s.bbox).text(tail);
    return b;
  }

  static StepBuilder object_predict_step(const Subject& s, const std::string& phrase) {
    StepBuilder b;
    b.text("Its future trajectory is ").mot(s.trajectory->points).text(" and it will " + phrase);
    return b;
  }

  template <typename Pred>
  ReasoningChain multi_answer(Pred pred, const std::string& singular, const std::string& plural,
                              const std::string& none, const std::string& yes) const {
    const auto hits = select_inst(in_.subjects, pred);
    if (hits.empty()) return one(StepBuilder().text(none));
    return one(StepBuilder().text(yes + list_text(hits) + " " + be(hits.size()) + " " +
                                  (hits.size() == 1 ? singular : plural)));
  }

  template <typename Pred>
  ReasoningChain scenario_yes_no(Pred pred, const std::string& predicate, const std::string& none) const {
    const auto hits = select(in_.subjects, pred);
    if (hits.empty()) return one(StepBuilder().text(none));
    StepBuilder b;
    b.text("Yes, ");
    name_scene_objects(b, hits);
    b.text(" " + be(hits.size()) + " " + predicate);
    return one(b);
  }

  template <typename Describe, typename Pred>
  ReasoningChain multi_predict(Describe describe, Pred pred, const std::string& predicate,
                               const std::string& none) const {
    std::vector<std::string> facts;
    for (std::size_t i = 0; i < in_.subjects.size(); ++i) {
      facts.push_back(inst(i) + " is " + describe(in_.subjects[i]));
    }
    StepBuilder first;
    first.text(list_text(facts));
    const auto hits = select_inst(in_.subjects, pred);
    StepBuilder second;
    second.text(hits.empty() ? none : list_text(hits) + " " + predicate);
    return two(first, second);
  }

  template <typename Pred>
  ReasoningChain scenario_predict(Pred pred, const std::string& predicate, const std::string& none) const {
    const auto hits = select(in_.subjects, pred);
    if (hits.empty()) return one(StepBuilder().text(none));
    StepBuilder first;
    name_scene_objects(first, hits);
    first.text(" " + be(hits.size()) + " observed in the driving scenario");
    StepBuilder second;
    second.text(std::string("Yes, ") + (hits.size() == 1 ? "it " : "they ") + predicate);
    return two(first, second);
  }

  const ChainInput& in_;
  const TemplateSpec& t_;
};

}  // namespace detail

// Builds the reference chain answering `tmpl` from precomputed labels.
inline ReasoningChain build_chain(const ChainInput& input, const TemplateSpec& tmpl) {
  return detail::ChainWriter(input, tmpl).write();
}

// Single-object convenience form.
inline ReasoningChain build_chain(const DerivedLabels& labels, const std::optional<Trajectory>& traj,
                                  const TemplateSpec& tmpl, Category category = Category::kVehicle,
                                  BBox bbox = {0.0, 0.0, 1.0, 1.0}) {
  if (tmpl.target != Target::kSingleObject) {
    detail::mismatch(tmpl, "single-object form used for a non single-object template");
  }
  ChainInput in;
  in.subjects.push_back({"object", category, bbox, labels, traj});
  return build_chain(in, tmpl);
}

// ---------------------------------------------------------------------------
// Generation

struct TaskMask {
  std::array<bool, 3> enabled = {true, true, true};

  static TaskMask all() { return {}; }
  static TaskMask only(Task t) {
    TaskMask m;
    m.enabled = {false, false, false};
    m.enabled[static_cast<std::size_t>(t)] = true;
    return m;
  }
  bool contains(Task t) const { return enabled[static_cast<std::size_t>(t)]; }
  void set(Task t, bool on) { enabled[static_cast<std::size_t>(t)] = on; }
};

struct GenerateOptions {
  int horizon = kDefaultHorizon;
  bool sampling = true;
  std::size_t multi_subset_cap = 8;
  std::size_t min_subset_size = 2;
  std::size_t max_subset_size = 3;
  LabelThresholds thresholds;
};

namespace detail {

// All index subsets of size [lo, hi] over n items, lexicographic within size.
inline std::vector<std::vector<std::size_t>> enumerate_subsets(std::size_t n, std::size_t lo, std::size_t hi) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t k = lo; k <= hi && k <= n; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      out.push_back(idx);
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

inline std::string record_id(const std::string& scene_id, std::size_t frame, std::size_t tmpl, std::size_t ordinal) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "/f%03zu/t%02zu/%03zu", frame, tmpl, ordinal);
  return scene_id + buf;
}

inline std::string describe_referents(const std::vector<Subject>& subjects, Target target) {
  if (target == Target::kSingleObject) {
    return " The referred object is <Inst1> at " + render_element(VisualElement::loc(subjects.front().bbox)) + ".";
  }
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    parts.push_back(inst(i) + " at " + render_element(VisualElement::loc(subjects[i].bbox)));
  }
  return " These objects are " + list_text(parts) + ".";
}

}  // namespace detail

// Instantiates every enabled template for every eligible (frame, target).
// Output order is (frame, template registry order, object order).
inline std::vector<QARecord> generate(const SceneSequence& scene, const TaskMask& tasks, std::uint64_t seed,
                                      const GenerateOptions& opts = {}) {
  const int h = opts.horizon;
  const auto& th = opts.thresholds;
  std::vector<QARecord> records;
  bool any_eligible = false;

  for (std::size_t f = 0; f < scene.size(); ++f) {
    const KeyFrame& frame = scene.frames[f];
    const bool future_ok = h >= 2 && f + static_cast<std::size_t>(h) < scene.size();

    auto subject_at = [&](const ObjectEntry& o, int horizon, bool with_traj) {
      Subject s{o.object_id, o.category, o.bbox, derive_labels(o.object_id, scene, f, horizon, th), std::nullopt};
      if (with_traj && tracked_through(o.object_id, scene, f, horizon)) {
        s.trajectory = future_trajectory(o.object_id, scene, f, horizon);
      }
      return s;
    };

    for (std::size_t ti = 0; ti < kTemplates.size(); ++ti) {
      const TemplateSpec& t = kTemplates[ti];
      if (!tasks.contains(t.task)) continue;
      const bool perception = t.task == Task::kPerception;
      if (!perception && !future_ok) continue;
      any_eligible = true;
      const int horizon = perception ? 0 : h;

      // Object-level prediction/reasoning targets must be tracked through the horizon.
      std::vector<Subject> pool;
      for (const auto& o : frame.objects) {
        const bool tracked = perception || tracked_through(o.object_id, scene, f, horizon);
        if (t.target == Target::kScenario || t.target == Target::kEgo || tracked) {
          pool.push_back(subject_at(o, horizon, !perception));
        }
      }

      auto emit = [&](ChainInput input, std::size_t ordinal) {
        QARecord r;
        r.record_id = detail::record_id(scene.scene_id, f, ti, ordinal);
        r.scene_id = scene.scene_id;
        r.frame_index = f;
        r.task = t.task;
        r.sub_task = std::string(t.sub_task);
        r.target = t.target;
        r.question = std::string(t.question_text);
        if (t.target == Target::kSingleObject || t.target == Target::kMultiObjects) {
          r.question += detail::describe_referents(input.subjects, t.target);
          for (const auto& s : input.subjects) r.referred_object_ids.push_back(s.id);
        }
        r.reference = build_chain(input, t);
        records.push_back(std::move(r));
      };

      switch (t.target) {
        case Target::kSingleObject:
          for (std::size_t i = 0; i < pool.size(); ++i) emit(ChainInput{{pool[i]}, std::nullopt}, i);
          break;
        case Target::kMultiObjects: {
          auto subsets = detail::enumerate_subsets(pool.size(), opts.min_subset_size, opts.max_subset_size);
          std::vector<std::size_t> chosen(subsets.size());
          for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
          if (opts.sampling && chosen.size() > opts.multi_subset_cap) {
            PortableRng rng(hash_combine(hash_combine(seed, fnv1a64(scene.scene_id)), f * 64 + ti));
            rng.shuffle(std::span<std::size_t>(chosen));
            chosen.resize(opts.multi_subset_cap);
            std::sort(chosen.begin(), chosen.end());
          }
          for (std::size_t c = 0; c < chosen.size(); ++c) {
            ChainInput in;
            for (std::size_t idx : subsets[chosen[c]]) in.subjects.push_back(pool[idx]);
            emit(std::move(in), c);
          }
          break;
        }
        case Target::kScenario:
          emit(ChainInput{pool, std::nullopt}, 0);
          break;
        case Target::kEgo: {
          EgoView ego{derive_ego_labels(scene, f, horizon, th), std::nullopt};
          if (!perception) ego.trajectory = ego_future_trajectory(scene, f, horizon);
          emit(ChainInput{pool, ego}, 0);
          break;
        }
      }
    }
  }
  if (!any_eligible) {
    throw Error(ErrorCode::kEmptyScene, "scene '" + scene.scene_id + "' has no frame eligible for the selected tasks");
  }
  return records;
}

// ---------------------------------------------------------------------------
// Record I/O (one JSON object per line)

inline nlohmann::ordered_json to_json(const QARecord& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["scene_id"] = r.scene_id;
  j["frame_index"] = r.frame_index;
  j["task"] = std::string(to_string(r.task));
  j["sub_task"] = r.sub_task;
  j["target"] = std::string(to_string(r.target));
  j["question"] = r.question;
  j["reference"] = serialize(r.reference);
  j["referred_object_ids"] = r.referred_object_ids;
  return j;
}

inline QARecord qa_record_from_json(const nlohmann::json& j) {
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j.at(key).is_string()) {
      throw Error(ErrorCode::kSchemaViolation, std::string(key) + ": missing or not a string");
    }
    return j.at(key).get<std::string>();
  };
  QARecord r;
  r.record_id = str("record_id");
  r.scene_id = str("scene_id");
  if (!j.contains("frame_index") || !j.at("frame_index").is_number_unsigned()) {
    throw Error(ErrorCode::kSchemaViolation, "frame_index: missing or not a non-negative integer");
  }
  r.frame_index = j.at("frame_index").get<std::size_t>();
  const auto task = parse_task(str("task"));
  if (!task) throw Error(ErrorCode::kSchemaViolation, "task: unknown value");
  r.task = *task;
  r.sub_task = str("sub_task");
  const auto target = parse_target(str("target"));
  if (!target) throw Error(ErrorCode::kSchemaViolation, "target: unknown value");
  r.target = *target;
  r.question = str("question");
  if (r.question.empty()) throw Error(ErrorCode::kSchemaViolation, "question: empty");
  r.reference = parse_chain(str("reference"));
  if (j.contains("referred_object_ids")) {
    for (const auto& id : j.at("referred_object_ids")) {
      if (!id.is_string()) throw Error(ErrorCode::kSchemaViolation, "referred_object_ids: non-string entry");
      r.referred_object_ids.push_back(id.get<std::string>());
    }
  }
  return r;
}

inline std::string to_jsonl(const std::vector<QARecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace drq

#endif  // DRQ_QA_GEN_HPP
