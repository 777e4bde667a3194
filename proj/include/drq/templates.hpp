#ifndef DRQ_TEMPLATES_HPP
#define DRQ_TEMPLATES_HPP

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace drq {

enum class Task { kPerception, kPrediction, kReasoning };
enum class Target { kEgo, kSingleObject, kMultiObjects, kScenario };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::kPerception: return "perception";
    case Task::kPrediction: return "prediction";
    case Task::kReasoning: return "reasoning";
  }
  return "perception";
}

inline std::string_view to_string(Target t) {
  switch (t) {
    case Target::kEgo: return "ego";
    case Target::kSingleObject: return "single_object";
    case Target::kMultiObjects: return "multi_objects";
    case Target::kScenario: return "scenario";
  }
  return "scenario";
}

inline std::optional<Task> parse_task(std::string_view s) {
  if (s == "perception") return Task::kPerception;
  if (s == "prediction") return Task::kPrediction;
  if (s == "reasoning") return Task::kReasoning;
  return std::nullopt;
}

inline std::optional<Target> parse_target(std::string_view s) {
  if (s == "ego") return Target::kEgo;
  if (s == "single_object") return Target::kSingleObject;
  if (s == "multi_objects") return Target::kMultiObjects;
  if (s == "scenario") return Target::kScenario;
  return std::nullopt;
}

inline constexpr std::array<Task, 3> kAllTasks = {Task::kPerception, Task::kPrediction, Task::kReasoning};
inline constexpr std::array<Target, 4> kAllTargets = {Target::kEgo, Target::kSingleObject,
                                                      Target::kMultiObjects, Target::kScenario};

// Which chain-construction rule answers a template.
enum class AnswerBuilder {
  kCategorySingle, kCategoryMulti, kCategoryScenario,
  kAttributeSingle, kAttributeMulti, kAttributeScenario,
  kDistanceSingle, kDistanceMulti, kDistanceScenario,
  kPositionSingle, kPositionMulti, kPositionScenario,
  kMotionSingle, kMotionEgo,
  kMovingStrategySingle, kMovingStrategyMulti, kMovingStrategyEgo,
  kTurnSingle, kTurnMulti, kTurnScenario,
  kTrendSingle, kTrendMulti, kTrendScenario,
  kMergeSingle, kMergeMulti, kMergeScenario,
  kDrivingStrategySingle, kDrivingStrategyEgo,
  kRiskSingle, kRiskScenario,
  kControlSingle, kControlEgo,
};

struct TemplateSpec {
  Task task;
  std::string_view sub_task;
  Target target;
  std::string_view question_text;
  AnswerBuilder answer_builder;
};

// Registry order is the generation order.
inline constexpr std::array<TemplateSpec, 32> kTemplates = {{
    {Task::kPerception, "Category", Target::kSingleObject, "What is the category of the referred object?", AnswerBuilder::kCategorySingle},
    {Task::kPerception, "Category", Target::kMultiObjects, "Are any of these objects vehicles?", AnswerBuilder::kCategoryMulti},
    {Task::kPerception, "Category", Target::kScenario, "How many vehicles in the driving scenario?", AnswerBuilder::kCategoryScenario},
    {Task::kPerception, "Attribute", Target::kSingleObject, "What is the moving status of the referred object?", AnswerBuilder::kAttributeSingle},
    {Task::kPerception, "Attribute", Target::kMultiObjects, "Which of these objects is stopped?", AnswerBuilder::kAttributeMulti},
    {Task::kPerception, "Attribute", Target::kScenario, "Are there any objects parked in the driving scenario?", AnswerBuilder::kAttributeScenario},
    {Task::kPerception, "Distance", Target::kSingleObject, "What is the distance of the referred object towards ego?", AnswerBuilder::kDistanceSingle},
    {Task::kPerception, "Distance", Target::kMultiObjects, "Which of these objects is closest to the ego?", AnswerBuilder::kDistanceMulti},
    {Task::kPerception, "Distance", Target::kScenario, "Are there any objects too close to the ego in the driving scenario?", AnswerBuilder::kDistanceScenario},
    {Task::kPerception, "Position", Target::kSingleObject, "What is the position of the referred object?", AnswerBuilder::kPositionSingle},
    {Task::kPerception, "Position", Target::kMultiObjects, "Which of these objects is located at left of the ego?", AnswerBuilder::kPositionMulti},
    {Task::kPerception, "Position", Target::kScenario, "Are there any objects right in front of the ego in the driving scenario?", AnswerBuilder::kPositionScenario},

    {Task::kPrediction, "Motion", Target::kSingleObject, "What is the future trajectory of the referred object?", AnswerBuilder::kMotionSingle},
    {Task::kPrediction, "Motion", Target::kEgo, "What is the future trajectory of the ego vehicle?", AnswerBuilder::kMotionEgo},
    {Task::kPrediction, "Moving strategy", Target::kSingleObject, "What will the moving status of the referred object be in a few seconds?", AnswerBuilder::kMovingStrategySingle},
    {Task::kPrediction, "Moving strategy", Target::kMultiObjects, "Which of these objects will be stopped in a few seconds?", AnswerBuilder::kMovingStrategyMulti},
    {Task::kPrediction, "Moving strategy", Target::kEgo, "What will the moving status of the ego vehicle be in a few seconds?", AnswerBuilder::kMovingStrategyEgo},
    {Task::kPrediction, "Turn", Target::kSingleObject, "Which direction will the referred object turn?", AnswerBuilder::kTurnSingle},
    {Task::kPrediction, "Turn", Target::kMultiObjects, "Which of these objects will turn left?", AnswerBuilder::kTurnMulti},
    {Task::kPrediction, "Turn", Target::kScenario, "Will there be any objects turning right in the driving scenario?", AnswerBuilder::kTurnScenario},
    {Task::kPrediction, "Trend", Target::kSingleObject, "Will the referred object approach or stay away?", AnswerBuilder::kTrendSingle},
    {Task::kPrediction, "Trend", Target::kMultiObjects, "Which of these objects will approach?", AnswerBuilder::kTrendMulti},
    {Task::kPrediction, "Trend", Target::kScenario, "Will there be any objects approaching the ego vehicle?", AnswerBuilder::kTrendScenario},
    {Task::kPrediction, "Merge", Target::kSingleObject, "Will the referred object merge in/out of the ego lane?", AnswerBuilder::kMergeSingle},
    {Task::kPrediction, "Merge", Target::kMultiObjects, "Which of these objects will merge in/out of the ego lane?", AnswerBuilder::kMergeMulti},
    {Task::kPrediction, "Merge", Target::kScenario, "Will there be any objects merging in/out of the ego lane?", AnswerBuilder::kMergeScenario},

    {Task::kReasoning, "Driving strategy", Target::kSingleObject, "What is the referred object doing and what causes it?", AnswerBuilder::kDrivingStrategySingle},
    {Task::kReasoning, "Driving strategy", Target::kEgo, "What is the ego vehicle doing and what causes it?", AnswerBuilder::kDrivingStrategyEgo},
    {Task::kReasoning, "Risk", Target::kSingleObject, "Is the referred object risky to the ego vehicle's normal driving?", AnswerBuilder::kRiskSingle},
    {Task::kReasoning, "Risk", Target::kScenario, "Is there any risk to the ego vehicle's normal driving in the scenario?", AnswerBuilder::kRiskScenario},
    {Task::kReasoning, "Control", Target::kSingleObject, "What will the referred object do in a few seconds for safety driving and why?", AnswerBuilder::kControlSingle},
    {Task::kReasoning, "Control", Target::kEgo, "What will the ego vehicle do in a few seconds for safety driving and why?", AnswerBuilder::kControlEgo},
}};

inline std::span<const TemplateSpec> list_templates() { return kTemplates; }

inline std::vector<TemplateSpec> filter_templates(std::optional<Task> task,
                                                  std::optional<std::string_view> sub_task = std::nullopt) {
  std::vector<TemplateSpec> out;
  for (const auto& t : kTemplates) {
    if (task && t.task != *task) continue;
    if (sub_task && t.sub_task != *sub_task) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace drq

#endif  // DRQ_TEMPLATES_HPP
