#ifndef DRQ_ADRSCORE_HPP
#define DRQ_ADRSCORE_HPP

// Chain-alignment reasoning metrics.
//
// For hypothesis steps h_1..h_N and reference steps r_1..r_K with step
// similarity s(h_i, r_j) in [0, 1]:
//   alpha_i = max_j s(h_i, r_j)          (hypothesis -> reference alignment)
//   RA      = mean_i alpha_i
//   RD      = min_i alpha_i
//   MS      = min_j max_i s(h_i, r_j)    (reference -> hypothesis alignment)
//   total   = (RA + RD + MS) / 3
//
// The semantic mode uses embedding cosine as s. The visual-adapted mode
// replaces s with clamp((tau - M) / beta, 0, 1) whenever both steps carry
// visual elements, M being the element mean squared error.

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drq/chain.hpp"
#include "drq/embedder.hpp"
#include "drq/error.hpp"
#include "drq/visual_metrics.hpp"

namespace drq {

enum class ScoreMode { kSemantic, kVisualAdapted };

inline std::string_view to_string(ScoreMode m) { return m == ScoreMode::kSemantic ? "semantic" : "visual_adapted"; }

struct MetricConfig {
  double tau = 15.0;
  double beta = 10.0;
  bool clamp_semantic = true;

  void validate() const {
    if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
    if (!(tau >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be non-negative");
  }
};

struct ScoreBreakdown {
  std::vector<double> alignment_h_to_r;
  std::vector<double> alignment_r_to_h;
  double ra = 0.0;
  double rd = 0.0;
  double ms = 0.0;
  double total = 0.0;
  ScoreMode mode = ScoreMode::kSemantic;
  std::string provider_id;
};

// Text-level similarity between two steps, typically embedding cosine.
using SemanticSimilarity = std::function<double(const Step& h, const Step& r)>;

// Element MSE between two steps: elements pair by kind in order of
// occurrence; each unpaired element contributes tau.
inline double step_element_mse(const Step& h, const Step& r, double tau) {
  double sum = 0.0;
  std::size_t terms = 0;
  for (ElementKind kind : {ElementKind::kLoc, ElementKind::kMot}) {
    std::vector<const VisualElement*> hs, rs;
    for (const auto& e : h.elements) {
      if (e.kind() == kind) hs.push_back(&e);
    }
    for (const auto& e : r.elements) {
      if (e.kind() == kind) rs.push_back(&e);
    }
    const std::size_t paired = std::min(hs.size(), rs.size());
    for (std::size_t i = 0; i < paired; ++i) sum += element_mse(*hs[i], *rs[i], tau).mse;
    const std::size_t surplus = std::max(hs.size(), rs.size()) - paired;
    sum += tau * static_cast<double>(surplus);
    terms += paired + surplus;
  }
  return terms ? sum / static_cast<double>(terms) : 0.0;
}

// Maps an element MSE to a similarity in [0, 1].
inline double visual_similarity(double mse, const MetricConfig& cfg) {
  return std::clamp((cfg.tau - mse) / cfg.beta, 0.0, 1.0);
}

inline double step_similarity(const Step& h, const Step& r, const MetricConfig& cfg, const SemanticSimilarity& sim,
                              ScoreMode mode) {
  if (mode == ScoreMode::kVisualAdapted) {
    const bool hv = !h.elements.empty();
    const bool rv = !r.elements.empty();
    if (hv && rv) return visual_similarity(step_element_mse(h, r, cfg.tau), cfg);
    if (hv != rv) return 0.0;
  }
  const double s = sim(h, r);
  return cfg.clamp_semantic ? std::clamp(s, 0.0, 1.0) : s;
}

namespace detail {

inline void require_steps(const ReasoningChain& hyp, const ReasoningChain& ref) {
  if (hyp.empty()) throw Error(ErrorCode::kEmptyChain, "hypothesis has no steps");
  if (ref.empty()) throw Error(ErrorCode::kEmptyChain, "reference has no steps");
}

inline double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

inline double min_of(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

}  // namespace detail

inline std::vector<double> alignment_vector(const ReasoningChain& hyp, const ReasoningChain& ref,
                                            const MetricConfig& cfg, const SemanticSimilarity& sim,
                                            ScoreMode mode = ScoreMode::kSemantic) {
  detail::require_steps(hyp, ref);
  std::vector<double> alpha;
  alpha.reserve(hyp.size());
  for (const auto& h : hyp.steps) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : ref.steps) best = std::max(best, step_similarity(h, r, cfg, sim, mode));
    alpha.push_back(best);
  }
  return alpha;
}

inline ScoreBreakdown score(const ReasoningChain& hyp, const ReasoningChain& ref, const MetricConfig& cfg,
                            const SemanticSimilarity& sim, ScoreMode mode = ScoreMode::kSemantic) {
  detail::require_steps(hyp, ref);
  cfg.validate();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  ScoreBreakdown out;
  out.mode = mode;
  out.alignment_h_to_r.assign(hyp.size(), kNegInf);
  out.alignment_r_to_h.assign(ref.size(), kNegInf);
  // One sweep over the pairs fills both directions.
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const double s = step_similarity(hyp.steps[i], ref.steps[j], cfg, sim, mode);
      out.alignment_h_to_r[i] = std::max(out.alignment_h_to_r[i], s);
      out.alignment_r_to_h[j] = std::max(out.alignment_r_to_h[j], s);
    }
  }
  out.ra = detail::mean(out.alignment_h_to_r);
  out.rd = detail::min_of(out.alignment_h_to_r);
  out.ms = detail::min_of(out.alignment_r_to_h);
  out.total = (out.ra + out.rd + out.ms) / 3.0;
  return out;
}

// Embeds every distinct step text of both chains in one provider call and
// answers similarity queries by cosine.
inline SemanticSimilarity embedding_similarity(EmbeddingProvider& provider, const ReasoningChain& hyp,
                                               const ReasoningChain& ref) {
  std::vector<std::string> texts;
  auto table = std::make_shared<std::unordered_map<std::string, EmbeddingVector>>();
  for (const auto* chain : {&hyp, &ref}) {
    for (const auto& s : chain->steps) {
      if (table->emplace(s.text, EmbeddingVector{}).second) texts.push_back(s.text);
    }
  }
  auto vectors = provider.embed(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) (*table)[texts[i]] = std::move(vectors[i]);
  return [table](const Step& h, const Step& r) { return cosine(table->at(h.text), table->at(r.text)); };
}

}  // namespace drq

#endif  // DRQ_ADRSCORE_HPP
