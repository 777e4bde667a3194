#include <gtest/gtest.h>

#include <random>

#include "drq/visual_metrics.hpp"

using namespace drq;

namespace {

IdentifiedElement box(std::string id, BBox b) { return {std::move(id), VisualElement::loc(b)}; }
IdentifiedElement path(std::string id, std::vector<Point2> pts) { return {std::move(id), VisualElement::mot(std::move(pts))}; }

}  // namespace

TEST(Iou, HalfOverlap) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {1, 0, 3, 2}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);  // touching edges
  EXPECT_EQ(iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
}

TEST(Iou, Symmetric) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(0, 50), w(0.1, 20);
  for (int i = 0; i < 500; ++i) {
    const double ax = c(rng), ay = c(rng), bx = c(rng), by = c(rng);
    const BBox a{ax, ay, ax + w(rng), ay + w(rng)}, b{bx, by, bx + w(rng), by + w(rng)};
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
  }
}

TEST(Ade, ConstantOffset) {
  const std::vector<Point2> a = {{0, 0}, {1, 1}, {2, 2}};
  const std::vector<Point2> b = {{3, 4}, {4, 5}, {5, 6}};
  EXPECT_DOUBLE_EQ(ade(a, b), 5.0);
}

TEST(Ade, LengthMismatch) {
  const std::vector<Point2> a = {{0, 0}, {1, 1}};
  const std::vector<Point2> b = {{0, 0}};
  try {
    ade(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(Ade, TriangleInequalityAndScaling) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(-30, 30), k(-4, 4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point2> a(5), b(5), d(5);
    for (std::size_t i = 0; i < 5; ++i) {
      a[i] = {c(rng), c(rng)};
      b[i] = {c(rng), c(rng)};
      d[i] = {c(rng), c(rng)};
    }
    EXPECT_LE(ade(a, d), ade(a, b) + ade(b, d) + 1e-9);
    const double s = k(rng);
    auto scaled = [s](std::vector<Point2> v) {
      for (auto& p : v) p = {p.x * s, p.y * s};
      return v;
    };
    EXPECT_NEAR(ade(scaled(a), scaled(b)), std::abs(s) * ade(a, b), 1e-9);
    const auto ma = element_mse(VisualElement::mot(a), VisualElement::mot(b)).mse;
    const auto mb = element_mse(VisualElement::mot(scaled(a)), VisualElement::mot(scaled(b))).mse;
    EXPECT_NEAR(mb, s * s * ma, 1e-9 * (1 + mb));
  }
}

TEST(ElementMse, Boxes) {
  EXPECT_DOUBLE_EQ(element_mse(VisualElement::loc({0, 0, 10, 10}), VisualElement::loc({1, 1, 11, 11})).mse, 1.0);
  EXPECT_DOUBLE_EQ(element_mse(VisualElement::loc({0, 0, 10, 10}), VisualElement::loc({0, 0, 10, 10})).mse, 0.0);
}

TEST(ElementMse, KindMismatch) {
  try {
    element_mse(VisualElement::loc({0, 0, 1, 1}), VisualElement::mot({{0, 0}, {1, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKindMismatch);
  }
}

TEST(EvaluateElements, BoxAccuracyAtThreshold) {
  // IoUs 1, 0.6, 0.4 and 0 against the ground truth
  const std::vector<IdentifiedElement> gt = {box("a", {0, 0, 10, 10}), box("b", {0, 0, 10, 10}),
                                             box("c", {0, 0, 10, 10}), box("d", {0, 0, 10, 10})};
  const std::vector<IdentifiedElement> pred = {box("a", {0, 0, 10, 10}), box("b", {0, 0, 10, 6}),
                                               box("c", {0, 0, 10, 4}), box("d", {20, 20, 30, 30})};
  const auto s = evaluate_elements(pred, gt, 0.5);
  ASSERT_TRUE(s.box_accuracy);
  EXPECT_DOUBLE_EQ(*s.box_accuracy, 0.5);
  EXPECT_EQ(s.matched, 4u);
  EXPECT_FALSE(s.mean_ade);
  EXPECT_DOUBLE_EQ(*evaluate_elements(pred, gt, 0.4).box_accuracy, 0.75);
}

TEST(EvaluateElements, NoPredictions) {
  const std::vector<IdentifiedElement> gt = {box("a", {0, 0, 1, 1}), path("p", {{0, 0}, {1, 1}})};
  const auto s = evaluate_elements({}, gt);
  EXPECT_EQ(*s.box_accuracy, 0.0);
  EXPECT_FALSE(s.mean_ade);
  EXPECT_EQ(s.missing, 2u);
  EXPECT_EQ(s.gt_trajectories, 1u);
}

TEST(EvaluateElements, TrajectoriesAndSurplus) {
  const std::vector<IdentifiedElement> gt = {path("p", {{0, 0}, {1, 1}}), path("q", {{0, 0}, {1, 1}, {2, 2}})};
  const std::vector<IdentifiedElement> pred = {path("p", {{3, 4}, {4, 5}}), path("q", {{0, 0}, {1, 1}}),
                                               box("extra", {0, 0, 1, 1})};
  const auto s = evaluate_elements(pred, gt);
  EXPECT_FALSE(s.box_accuracy);
  ASSERT_TRUE(s.mean_ade);
  EXPECT_DOUBLE_EQ(*s.mean_ade, 5.0);
  EXPECT_EQ(s.length_mismatch, 1u);
  EXPECT_EQ(s.surplus, 1u);
}
