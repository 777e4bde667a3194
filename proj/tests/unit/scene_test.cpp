#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "drq/scene.hpp"
#include "support.hpp"

using namespace drq;
using drq::test::load_fixture;

namespace {

// One object per frame, ego fixed at the origin unless overridden.
struct SceneBuilder {
  SceneSequence scene;

  explicit SceneBuilder(double period = 0.5) {
    scene.scene_id = "synthetic";
    scene.frame_period = period;
  }

  SceneBuilder& frame(Point2 obj_pos, Point2 obj_vel, EgoEntry ego = {}) {
    KeyFrame f;
    f.timestamp = scene.frame_period * static_cast<double>(scene.frames.size());
    f.ego = ego;
    ObjectEntry o;
    o.object_id = "obj";
    o.category = Category::kVehicle;
    o.bbox = {10, 10, 20, 20};
    o.position = obj_pos;
    o.velocity = obj_vel;
    f.objects.push_back(o);
    scene.frames.push_back(f);
    return *this;
  }

  SceneBuilder& empty_frame(EgoEntry ego = {}) {
    KeyFrame f;
    f.timestamp = scene.frame_period * static_cast<double>(scene.frames.size());
    f.ego = ego;
    scene.frames.push_back(f);
    return *this;
  }
};

std::string minimal_scene(const std::string& object_json) {
  return R"({"scene_id":"s","frame_period":0.5,"frames":[{"timestamp":0,"ego":{"position":[0,0],"heading":0,"speed":0},"objects":[)" +
         object_json + "]}]}";
}

const char* kGoodObject = R"({"id":"a","category":"vehicle","bbox":[0,0,10,10],"position":[5,0],"velocity":[0,0]})";

ErrorCode load_error(const std::string& text, bool lenient = false) {
  try {
    load_scene(text, lenient);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(LoadScene, FixtureHasFiveFramesAndThreeObjects) {
  const auto scene = load_fixture("scenes/scene_a.json");
  EXPECT_EQ(scene.scene_id, "scene_a");
  EXPECT_EQ(scene.size(), 5u);
  std::set<std::string> ids;
  for (const auto& f : scene.frames) {
    for (const auto& o : f.objects) ids.insert(o.object_id);
  }
  EXPECT_EQ(ids, (std::set<std::string>{"car1", "ped1", "cyc1"}));
  EXPECT_EQ(scene.frames[0].find("ped1")->attributes.count("standing"), 1u);
}

TEST(LoadScene, EmptyFramesRejected) {
  EXPECT_EQ(load_error(R"({"scene_id":"s","frame_period":0.5,"frames":[]})"), ErrorCode::kSchemaViolation);
}

TEST(LoadScene, DegenerateBoxRejectedWithPath) {
  try {
    load_scene(minimal_scene(R"({"id":"a","category":"vehicle","bbox":[5,0,5,10],"position":[5,0],"velocity":[0,0]})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
    EXPECT_NE(std::string(e.what()).find("frames[0].objects[0].bbox"), std::string::npos) << e.what();
  }
}

TEST(LoadScene, SyntaxErrorIsMalformedInput) { EXPECT_EQ(load_error("{\"scene_id\": "), ErrorCode::kMalformedInput); }

TEST(LoadScene, UnknownKeysStrictVersusLenient) {
  const std::string text = minimal_scene(std::string(kGoodObject).insert(1, R"("colour":"red",)"));
  EXPECT_EQ(load_error(text), ErrorCode::kSchemaViolation);
  EXPECT_NO_THROW(load_scene(text, true));
}

TEST(LoadScene, InvariantBreaches) {
  // heading out of range
  EXPECT_EQ(load_error(R"({"scene_id":"s","frame_period":0.5,"frames":[{"timestamp":0,"ego":{"position":[0,0],"heading":4,"speed":0},"objects":[]}]})"),
            ErrorCode::kSchemaViolation);
  // negative speed
  EXPECT_EQ(load_error(R"({"scene_id":"s","frame_period":0.5,"frames":[{"timestamp":0,"ego":{"position":[0,0],"heading":0,"speed":-1},"objects":[]}]})"),
            ErrorCode::kSchemaViolation);
  // non-positive frame period
  EXPECT_EQ(load_error(R"({"scene_id":"s","frame_period":0,"frames":[{"timestamp":0,"ego":{"position":[0,0],"heading":0,"speed":0},"objects":[]}]})"),
            ErrorCode::kSchemaViolation);
  // timestamps not increasing
  EXPECT_EQ(load_error(R"({"scene_id":"s","frame_period":0.5,"frames":[{"timestamp":1,"ego":{"position":[0,0],"heading":0,"speed":0},"objects":[]},{"timestamp":1,"ego":{"position":[0,0],"heading":0,"speed":0},"objects":[]}]})"),
            ErrorCode::kSchemaViolation);
  // duplicate id in a frame
  EXPECT_EQ(load_error(minimal_scene(std::string(kGoodObject) + "," + kGoodObject)), ErrorCode::kSchemaViolation);
  // unknown category
  EXPECT_EQ(load_error(minimal_scene(R"({"id":"a","category":"tram","bbox":[0,0,10,10],"position":[5,0],"velocity":[0,0]})")),
            ErrorCode::kSchemaViolation);
}

TEST(LoadScene, CategoryMustStayConsistent) {
  const std::string text =
      R"({"scene_id":"s","frame_period":0.5,"frames":[)"
      R"({"timestamp":0,"ego":{"position":[0,0],"heading":0,"speed":0},"objects":[{"id":"a","category":"vehicle","bbox":[0,0,10,10],"position":[5,0],"velocity":[0,0]}]},)"
      R"({"timestamp":0.5,"ego":{"position":[0,0],"heading":0,"speed":0},"objects":[{"id":"a","category":"cyclist","bbox":[0,0,10,10],"position":[5,0],"velocity":[0,0]}]}]})";
  EXPECT_EQ(load_error(text), ErrorCode::kSchemaViolation);
}

TEST(LoadScene, JsonRoundTrip) {
  const auto scene = load_fixture("scenes/scene_a.json");
  const auto again = load_scene(to_json(scene).dump());
  EXPECT_EQ(to_json(again), to_json(scene));
}

TEST(DeriveLabels, StationaryEverywhereIsParked) {
  SceneBuilder b;
  for (int i = 0; i < 4; ++i) b.frame({10, 3}, {0, 0});
  const auto l = derive_labels("obj", b.scene, 0, 2);
  EXPECT_EQ(l.motion_status, MotionStatus::kParked);
  EXPECT_EQ(l.future_motion, MotionStatus::kParked);
  EXPECT_EQ(l.turn, Turn::kStraight);
}

TEST(DeriveLabels, StopsAfterMoving) {
  SceneBuilder b;
  b.frame({10, 0}, {3, 0}).frame({11.5, 0}, {3, 0}).frame({12, 0}, {0.1, 0}).frame({12, 0}, {0, 0}).frame({12, 0}, {0, 0});
  const auto l = derive_labels("obj", b.scene, 0, 4);
  EXPECT_EQ(l.motion_status, MotionStatus::kMoving);
  EXPECT_EQ(l.future_motion, MotionStatus::kStopped);
  // trailing 1 s window at frame 4 covers frames 2..4
  EXPECT_EQ(derive_labels("obj", b.scene, 4, 0).motion_status, MotionStatus::kStopped);
}

TEST(DeriveLabels, TwentyDegreeCounterclockwiseTurnIsLeft) {
  // straight, then an arc: velocity heading goes from 0 to +20 degrees
  const double end = 20.0 * std::numbers::pi / 180.0;
  SceneBuilder b;
  b.frame({10, 0}, {5, 0})
      .frame({12.5, 0}, {5, 0})
      .frame({15, 0.2}, {5 * std::cos(end / 2), 5 * std::sin(end / 2)})
      .frame({17.4, 0.8}, {5 * std::cos(end), 5 * std::sin(end)});
  EXPECT_EQ(derive_labels("obj", b.scene, 0, 3).turn, Turn::kLeft);

  SceneBuilder r;
  r.frame({10, 0}, {5, 0}).frame({12.5, 0}, {5, 0}).frame({15, -0.8}, {5 * std::cos(end), -5 * std::sin(end)});
  EXPECT_EQ(derive_labels("obj", r.scene, 0, 2).turn, Turn::kRight);

  // ten degrees stays under the threshold
  const double small = 10.0 * std::numbers::pi / 180.0;
  SceneBuilder s;
  s.frame({10, 0}, {5, 0}).frame({12.5, 0}, {5, 0}).frame({15, 0.2}, {5 * std::cos(small), 5 * std::sin(small)});
  EXPECT_EQ(derive_labels("obj", s.scene, 0, 2).turn, Turn::kStraight);
}

TEST(DeriveLabels, EgoHeadingChangeCountsTowardsObjectTurn) {
  // Object velocity fixed in ego axes while the ego itself rotates by 0.3 rad.
  SceneBuilder b;
  for (int k = 0; k < 3; ++k) b.frame({10, 0}, {4, 0}, EgoEntry{{0, 0}, 0.15 * k, 4});
  EXPECT_EQ(derive_labels("obj", b.scene, 0, 2).turn, Turn::kLeft);
}

TEST(DeriveLabels, ApproachingObject) {
  SceneBuilder b;
  for (int k = 0; k < 4; ++k) b.frame({10.0 - 1.0 * k, 0}, {-2, 0});
  const auto l = derive_labels("obj", b.scene, 0, 3);
  EXPECT_EQ(l.trend, Trend::kApproach);
  EXPECT_DOUBLE_EQ(l.distance_to_ego, 10.0);

  SceneBuilder away;
  for (int k = 0; k < 4; ++k) away.frame({10.0 + 1.0 * k, 0}, {2, 0});
  EXPECT_EQ(derive_labels("obj", away.scene, 0, 3).trend, Trend::kStayAway);

  SceneBuilder jitter;
  jitter.frame({10, 0}, {0, 0}).frame({10.3, 0}, {0, 0}).frame({9.7, 0}, {0, 0});
  EXPECT_EQ(derive_labels("obj", jitter.scene, 0, 2).trend, Trend::kStatic);
}

TEST(DeriveLabels, MergeAcrossCorridor) {
  SceneBuilder in;
  in.frame({12, -3}, {4, 1.2}).frame({12, -2}, {4, 1.2}).frame({12, -1}, {4, 1.2});
  EXPECT_EQ(derive_labels("obj", in.scene, 0, 2).merge, Merge::kMergeIn);

  SceneBuilder out;
  out.frame({12, 0.5}, {4, 1.2}).frame({12, 1.5}, {4, 1.2}).frame({12, 2.5}, {4, 1.2});
  EXPECT_EQ(derive_labels("obj", out.scene, 0, 2).merge, Merge::kMergeOut);

  SceneBuilder stay;
  stay.frame({12, 1}, {4, 0}).frame({12, 1.5}, {4, 0}).frame({12, 1.7}, {4, 0});
  EXPECT_EQ(derive_labels("obj", stay.scene, 0, 2).merge, Merge::kNone);
}

TEST(DeriveLabels, PositionSectors) {
  EXPECT_EQ(classify_position({10, 0}), RelativePosition::kFront);
  EXPECT_EQ(classify_position({10, 5.7}), RelativePosition::kFront);  // about 29.7 degrees
  EXPECT_EQ(classify_position({5, 5}), RelativePosition::kFrontLeft);
  EXPECT_EQ(classify_position({5, -5}), RelativePosition::kFrontRight);
  EXPECT_EQ(classify_position({-1, 5}), RelativePosition::kLeft);
  EXPECT_EQ(classify_position({-1, -5}), RelativePosition::kRight);
  EXPECT_EQ(classify_position({-10, 1}), RelativePosition::kRear);
}

TEST(DeriveLabels, DistanceIsPositionNorm) {
  const auto scene = load_fixture("scenes/scene_a.json");
  for (std::size_t f = 0; f < scene.size(); ++f) {
    for (const auto& o : scene.frames[f].objects) {
      const double expected = std::sqrt(o.position.x * o.position.x + o.position.y * o.position.y);
      EXPECT_NEAR(derive_labels(o.object_id, scene, f, 0).distance_to_ego, expected, 1e-12);
    }
  }
}

TEST(DeriveLabels, PureFunction) {
  const auto scene = load_fixture("scenes/scene_a.json");
  EXPECT_EQ(derive_labels("cyc1", scene, 1, 3), derive_labels("cyc1", scene, 1, 3));
}

TEST(DeriveLabels, RigidTranslationLeavesLabelsUnchanged) {
  const auto scene = load_fixture("turn_arc.json");
  auto moved = scene;
  for (auto& f : moved.frames) f.ego.position = f.ego.position + Point2{1234.5, -987.25};
  for (std::size_t f = 0; f + 3 < scene.size(); ++f) {
    EXPECT_EQ(derive_labels("lead", scene, f, 3), derive_labels("lead", moved, f, 3));
    EXPECT_EQ(derive_ego_labels(scene, f, 3), derive_ego_labels(moved, f, 3));
    const auto a = future_trajectory("lead", scene, f, 3);
    const auto b = future_trajectory("lead", moved, f, 3);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_NEAR(a.points[i].x, b.points[i].x, 1e-9);
      EXPECT_NEAR(a.points[i].y, b.points[i].y, 1e-9);
    }
  }
}

TEST(DeriveLabels, ArcFixtureTurnsLeft) {
  const auto scene = load_fixture("turn_arc.json");
  // 0.1 rad per frame: three frames is about 17 degrees
  EXPECT_EQ(derive_ego_labels(scene, 0, 3).turn, Turn::kLeft);
  EXPECT_EQ(derive_ego_labels(scene, 0, 2).turn, Turn::kStraight);
  EXPECT_EQ(derive_labels("lead", scene, 0, 3).turn, Turn::kLeft);
}

TEST(DeriveLabels, Errors) {
  const auto scene = load_fixture("scenes/scene_a.json");
  EXPECT_THROW(derive_labels("nobody", scene, 0, 2), Error);
  try {
    derive_labels("car1", scene, 3, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kHorizonOutOfRange);
  }
  try {
    derive_labels("ped1", scene, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownObject);
  }
}

TEST(FutureTrajectory, StaticObjectStationaryEgo) {
  SceneBuilder b;
  for (int i = 0; i < 4; ++i) b.frame({7, -2}, {0, 0});
  const auto t = future_trajectory("obj", b.scene, 0, 3);
  ASSERT_EQ(t.points.size(), 3u);
  for (const auto& p : t.points) {
    EXPECT_EQ(p.x, 7.0);
    EXPECT_EQ(p.y, -2.0);
  }
  EXPECT_EQ(t.stride, 0.5);
}

TEST(FutureTrajectory, ConstantVelocityHalfMeterSpacing) {
  SceneBuilder b;
  for (int k = 0; k < 5; ++k) b.frame({0.5 * k, 1}, {1, 0});
  const auto t = future_trajectory("obj", b.scene, 0, 4);
  ASSERT_EQ(t.points.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(t.points[k].x, 0.5 * (k + 1), 1e-12);
    EXPECT_NEAR(t.points[k].y, 1.0, 1e-12);
  }
}

TEST(FutureTrajectory, EgoRelativeStaticObjectIsConstantForAnyHorizon) {
  // The ego and object move together, so the object never moves in ego axes
  // and, re-expressed in the origin frame, advances with the ego.
  SceneBuilder b;
  for (int k = 0; k < 7; ++k) b.frame({6, 0}, {3, 0}, EgoEntry{{1.5 * k, 0}, 0, 3});
  for (int h = 2; h <= 6; ++h) {
    const auto t = future_trajectory("obj", b.scene, 0, h);
    ASSERT_EQ(t.points.size(), static_cast<std::size_t>(h));
    for (int k = 0; k < h; ++k) EXPECT_NEAR(t.points[k].x - 1.5 * (k + 1), 6.0, 1e-12);
  }
  // in its own ego frame the object stays put
  const auto scene = b.scene;
  for (std::size_t f = 0; f < scene.size(); ++f) EXPECT_EQ(scene.frames[f].find("obj")->position.x, 6.0);
}

TEST(FutureTrajectory, GapIsTrackGap) {
  SceneBuilder b;
  b.frame({1, 1}, {0, 0}).frame({1, 1}, {0, 0}).empty_frame().frame({1, 1}, {0, 0});
  try {
    future_trajectory("obj", b.scene, 0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTrackGap);
  }
  EXPECT_FALSE(tracked_through("obj", b.scene, 0, 3));
  EXPECT_TRUE(tracked_through("obj", b.scene, 0, 1));
}

TEST(FutureTrajectory, RotatedEgoFrame) {
  // Ego turned +90 degrees at the query frame: world +x is ego -y.
  SceneBuilder b;
  const double q = std::numbers::pi / 2;
  b.frame({0, 0}, {0, 0}, EgoEntry{{0, 0}, q, 0}).frame({2, 0}, {0, 0}, EgoEntry{{0, 0}, 0, 0}).frame({2, 0}, {0, 0}, EgoEntry{{0, 0}, 0, 0});
  const auto t = future_trajectory("obj", b.scene, 0, 2);
  EXPECT_NEAR(t.points[0].x, 0.0, 1e-12);
  EXPECT_NEAR(t.points[0].y, -2.0, 1e-12);
}
