#ifndef DRQ_AUGMENT_HPP
#define DRQ_AUGMENT_HPP

// Offline augmentation: builds chat-style request payloads for an external
// LLM to paraphrase QA pairs, and merges the paraphrases back. Nothing here
// talks to the network.

#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "drq/chain.hpp"
#include "drq/error.hpp"
#include "drq/qa_gen.hpp"

namespace drq {

struct PromptSet {
  std::string system_prompt;
  std::vector<std::pair<std::string, std::string>> examples;  // (content, response)
};

struct AugmentationRequest {
  std::string record_id;
  std::string system_prompt;
  std::vector<std::pair<std::string, std::string>> exemplars;
  std::string user_content;
};

// Same content as data/augment_prompts.json.
inline constexpr std::string_view kDefaultPromptJson = R"json({
  "system_prompt": "You are an AI assistant that augments question-answer pairs about driving scenes. Rewrite the question and the answer with varied, natural wording while keeping every fact unchanged. Keep the answer as a sequence of short sentences in the same order. Copy every <LOC>(...) and <MOT>[...] token and every <Inst> token exactly as written. Reply with two lines, 'Question: ...' and 'Answer: ...'.",
  "examples": [
    {
      "content": "Question: What is the moving status of the referred object? The referred object is <Inst1> at <LOC>(412.00,188.00,468.00,236.00).\nAnswer: The referred object is stopped.",
      "response": "Question: Is the object <Inst1> at <LOC>(412.00,188.00,468.00,236.00) currently moving?\nAnswer: No, the object has come to a standstill."
    },
    {
      "content": "Question: Is the referred object risky to the ego vehicle's normal driving? The referred object is <Inst1> at <LOC>(120.00,200.00,260.00,310.00).\nAnswer: The referred object is a vehicle at <LOC>(120.00,200.00,260.00,310.00), 6.4 meters away from the ego. Its future trajectory is <MOT>[(6.10,1.20),(5.60,0.60),(5.20,0.10)] and it will merge into the ego lane. So the referred object is risky to the ego vehicle's normal driving.",
      "response": "Question: Could the vehicle <Inst1> at <LOC>(120.00,200.00,260.00,310.00) disturb how the ego car is driving?\nAnswer: There is a vehicle at <LOC>(120.00,200.00,260.00,310.00) only 6.4 meters from the ego car. It is expected to follow <MOT>[(6.10,1.20),(5.60,0.60),(5.20,0.10)] and cut into the ego lane. Therefore it poses a risk to the ego car's normal driving."
    }
  ]
})json";

inline PromptSet parse_prompt_set(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
  if (!j.is_object() || !j.contains("system_prompt") || !j["system_prompt"].is_string()) {
    throw Error(ErrorCode::kSchemaViolation, "system_prompt: missing or not a string");
  }
  if (!j.contains("examples") || !j["examples"].is_array() || j["examples"].empty()) {
    throw Error(ErrorCode::kSchemaViolation, "examples: must be a non-empty array");
  }
  PromptSet set;
  set.system_prompt = j["system_prompt"].get<std::string>();
  for (std::size_t i = 0; i < j["examples"].size(); ++i) {
    const auto& e = j["examples"][i];
    if (!e.is_object() || !e.contains("content") || !e["content"].is_string() || !e.contains("response") ||
        !e["response"].is_string()) {
      throw Error(ErrorCode::kSchemaViolation, "examples[" + std::to_string(i) + "]: needs string content and response");
    }
    set.examples.emplace_back(e["content"].get<std::string>(), e["response"].get<std::string>());
  }
  return set;
}

inline const PromptSet& default_prompt_set() {
  static const PromptSet set = parse_prompt_set(kDefaultPromptJson);
  return set;
}

inline std::string record_text(const QARecord& r) {
  return "Question: " + r.question + "\nAnswer: " + serialize(r.reference);
}

inline AugmentationRequest emit_augmentation_prompt(const QARecord& record,
                                                    const PromptSet& prompts = default_prompt_set()) {
  return {record.record_id, prompts.system_prompt, prompts.examples, record_text(record)};
}

// Chat-message layout: system, then (user, assistant) per exemplar, then the record.
inline nlohmann::ordered_json to_json(const AugmentationRequest& req) {
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
  for (const auto& [content, response] : req.exemplars) {
    messages.push_back({{"role", "user"}, {"content", content}});
    messages.push_back({{"role", "assistant"}, {"content", response}});
  }
  messages.push_back({{"role", "user"}, {"content", req.user_content}});
  nlohmann::ordered_json j;
  j["record_id"] = req.record_id;
  j["messages"] = std::move(messages);
  return j;
}

struct MergeOutcome {
  std::vector<QARecord> records;
  std::size_t applied = 0;
  std::vector<std::string> rejected;  // "record_id: reason"
};

// Applies augmented {record_id, question, answer} responses. A response is
// rejected unless its answer parses under the strict grammar and carries the
// same visual elements, in order, as the original reference.
inline MergeOutcome merge_augmented(std::vector<QARecord> records, const std::vector<nlohmann::json>& responses) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].record_id, i);

  auto elements_of = [](const ReasoningChain& c) {
    std::vector<VisualElement> out;
    for (const auto& s : c.steps) out.insert(out.end(), s.elements.begin(), s.elements.end());
    return out;
  };

  MergeOutcome outcome;
  for (const auto& resp : responses) {
    const std::string id = resp.value("record_id", std::string());
    auto it = index.find(id);
    if (it == index.end()) {
      outcome.rejected.push_back(id + ": unknown record_id");
      continue;
    }
    if (!resp.contains("answer") || !resp["answer"].is_string()) {
      outcome.rejected.push_back(id + ": missing answer");
      continue;
    }
    QARecord& rec = records[it->second];
    ReasoningChain chain;
    try {
      chain = parse_chain(resp["answer"].get<std::string>());
    } catch (const Error& e) {
      outcome.rejected.push_back(id + ": " + e.what());
      continue;
    }
    if (elements_of(chain) != elements_of(rec.reference)) {
      outcome.rejected.push_back(id + ": visual elements changed");
      continue;
    }
    rec.reference = std::move(chain);
    if (resp.contains("question") && resp["question"].is_string() && !resp["question"].get<std::string>().empty()) {
      rec.question = resp["question"].get<std::string>();
    }
    ++outcome.applied;
  }
  outcome.records = std::move(records);
  return outcome;
}

}  // namespace drq

#endif  // DRQ_AUGMENT_HPP
