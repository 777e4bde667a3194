#ifndef DRQ_VISUAL_METRICS_HPP
#define DRQ_VISUAL_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "drq/chain.hpp"
#include "drq/error.hpp"
#include "drq/geometry.hpp"

namespace drq {

struct ElementPairScore {
  double mse = 0.0;
  ElementKind kind = ElementKind::kLoc;
};

inline double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

// Average displacement error over index-paired points.
inline double ade(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kLengthMismatch,
                "trajectories of length " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += norm(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

// Mean squared error between two like elements. Boxes average the squared
// difference of the four coordinates. Trajectories average the squared
// point distance over the shared leading points; each point one side has
// beyond the other adds `surplus_penalty` to the average.
inline ElementPairScore element_mse(const VisualElement& h, const VisualElement& r, double surplus_penalty = 15.0) {
  if (h.kind() != r.kind()) {
    throw Error(ErrorCode::kKindMismatch, std::string(to_string(h.kind())) + " vs " + std::string(to_string(r.kind())));
  }
  if (h.kind() == ElementKind::kLoc) {
    const BBox& a = h.box();
    const BBox& b = r.box();
    const double d1 = a.x1 - b.x1, d2 = a.y1 - b.y1, d3 = a.x2 - b.x2, d4 = a.y2 - b.y2;
    return {(d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4) / 4.0, ElementKind::kLoc};
  }
  const auto& p = h.points();
  const auto& q = r.points();
  const std::size_t paired = std::min(p.size(), q.size());
  const std::size_t surplus = std::max(p.size(), q.size()) - paired;
  double sum = 0.0;
  for (std::size_t i = 0; i < paired; ++i) {
    const Point2 d = p[i] - q[i];
    sum += d.x * d.x + d.y * d.y;
  }
  sum += surplus_penalty * static_cast<double>(surplus);
  return {sum / static_cast<double>(paired + surplus), ElementKind::kMot};
}

struct ElementSummary {
  std::optional<double> box_accuracy;  // absent when there are no ground-truth boxes
  std::optional<double> mean_ade;      // absent when no trajectory pair was matched
  std::size_t gt_boxes = 0;
  std::size_t gt_trajectories = 0;
  std::size_t matched = 0;
  std::size_t missing = 0;
  std::size_t surplus = 0;
  std::size_t length_mismatch = 0;
};

using IdentifiedElement = std::pair<std::string, VisualElement>;

// Id-matched comparison of predicted against ground-truth elements.
inline ElementSummary evaluate_elements(std::span<const IdentifiedElement> pred, std::span<const IdentifiedElement> gt,
                                        double iou_threshold = 0.5) {
  std::unordered_map<std::string, const VisualElement*> by_id;
  for (const auto& [id, e] : pred) by_id.emplace(id, &e);

  ElementSummary s;
  std::size_t correct_boxes = 0;
  double ade_sum = 0.0;
  std::size_t ade_pairs = 0;
  std::size_t used = 0;
  for (const auto& [id, truth] : gt) {
    const bool is_box = truth.kind() == ElementKind::kLoc;
    (is_box ? s.gt_boxes : s.gt_trajectories) += 1;
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      ++s.missing;
      continue;
    }
    ++used;
    const VisualElement& p = *it->second;
    if (p.kind() != truth.kind()) {
      ++s.missing;
      continue;
    }
    ++s.matched;
    if (is_box) {
      if (iou(p.box(), truth.box()) >= iou_threshold) ++correct_boxes;
    } else if (p.points().size() != truth.points().size()) {
      ++s.length_mismatch;
    } else {
      ade_sum += ade(p.points(), truth.points());
      ++ade_pairs;
    }
  }
  s.surplus = pred.size() - used;
  if (s.gt_boxes > 0) s.box_accuracy = static_cast<double>(correct_boxes) / static_cast<double>(s.gt_boxes);
  if (ade_pairs > 0) s.mean_ade = ade_sum / static_cast<double>(ade_pairs);
  return s;
}

}  // namespace drq

#endif  // DRQ_VISUAL_METRICS_HPP
