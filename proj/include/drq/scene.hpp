#ifndef DRQ_SCENE_HPP
#define DRQ_SCENE_HPP

// Object-centric key-frame scene database: canonical JSON ingestion and the
// rule-based labels (motion status, turn, trend, merge, position) that the
// question templates are answered from.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "drq/error.hpp"
#include "drq/geometry.hpp"

namespace drq {

enum class Category { kVehicle, kPedestrian, kCyclist, kOther };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::kVehicle: return "vehicle";
    case Category::kPedestrian: return "pedestrian";
    case Category::kCyclist: return "cyclist";
    case Category::kOther: return "other";
  }
  return "other";
}

inline std::optional<Category> parse_category(std::string_view s) {
  if (s == "vehicle") return Category::kVehicle;
  if (s == "pedestrian") return Category::kPedestrian;
  if (s == "cyclist") return Category::kCyclist;
  if (s == "other") return Category::kOther;
  return std::nullopt;
}

struct ObjectEntry {
  std::string object_id;
  Category category = Category::kOther;
  BBox bbox;
  Point2 position;  // ego BEV frame, meters
  Point2 velocity;  // ego BEV axes, m/s
  std::set<std::string> attributes;

  double speed() const { return norm(velocity); }
};

struct EgoEntry {
  Point2 position;  // world frame, meters
  double heading = 0.0;
  double speed = 0.0;
};

struct KeyFrame {
  double timestamp = 0.0;
  EgoEntry ego;
  std::vector<ObjectEntry> objects;

  const ObjectEntry* find(std::string_view object_id) const {
    for (const auto& o : objects) {
      if (o.object_id == object_id) return &o;
    }
    return nullptr;
  }
};

struct SceneSequence {
  std::string scene_id;
  std::vector<KeyFrame> frames;
  double frame_period = 0.0;
  std::string source_tag;

  std::size_t size() const { return frames.size(); }
};

enum class MotionStatus { kMoving, kStopped, kParked };
enum class Turn { kLeft, kRight, kStraight };
enum class Trend { kApproach, kStayAway, kStatic };
enum class Merge { kMergeIn, kMergeOut, kNone };
enum class RelativePosition { kFront, kFrontLeft, kFrontRight, kLeft, kRight, kRear };

inline std::string_view to_string(MotionStatus m) {
  switch (m) {
    case MotionStatus::kMoving: return "moving";
    case MotionStatus::kStopped: return "stopped";
    case MotionStatus::kParked: return "parked";
  }
  return "moving";
}

inline std::string_view to_string(Turn t) {
  switch (t) {
    case Turn::kLeft: return "left";
    case Turn::kRight: return "right";
    case Turn::kStraight: return "straight";
  }
  return "straight";
}

inline std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::kApproach: return "approach";
    case Trend::kStayAway: return "stay_away";
    case Trend::kStatic: return "static";
  }
  return "static";
}

inline std::string_view to_string(Merge m) {
  switch (m) {
    case Merge::kMergeIn: return "merge_in";
    case Merge::kMergeOut: return "merge_out";
    case Merge::kNone: return "none";
  }
  return "none";
}

inline std::string_view to_string(RelativePosition p) {
  switch (p) {
    case RelativePosition::kFront: return "front";
    case RelativePosition::kFrontLeft: return "front_left";
    case RelativePosition::kFrontRight: return "front_right";
    case RelativePosition::kLeft: return "left";
    case RelativePosition::kRight: return "right";
    case RelativePosition::kRear: return "rear";
  }
  return "rear";
}

struct DerivedLabels {
  MotionStatus motion_status = MotionStatus::kMoving;
  // Status at the end of the horizon; answers "moving status in a few seconds".
  MotionStatus future_motion = MotionStatus::kMoving;
  Turn turn = Turn::kStraight;
  Trend trend = Trend::kStatic;
  Merge merge = Merge::kNone;
  double distance_to_ego = 0.0;
  RelativePosition relative_position = RelativePosition::kFront;

  friend bool operator==(const DerivedLabels&, const DerivedLabels&) = default;
};

struct EgoLabels {
  MotionStatus motion_status = MotionStatus::kMoving;
  MotionStatus future_motion = MotionStatus::kMoving;
  Turn turn = Turn::kStraight;
  double speed = 0.0;

  friend bool operator==(const EgoLabels&, const EgoLabels&) = default;
};

struct LabelThresholds {
  double stop_speed = 0.5;          // m/s
  double stop_window = 1.0;         // seconds, trailing
  double turn_degrees = 15.0;
  double trend_deadband = 0.5;      // meters
  double corridor_width = 3.5;      // meters, centered on ego forward axis
  double front_half_angle = 30.0;   // degrees
  double side_split_angle = 90.0;
  double rear_split_angle = 150.0;
};

inline constexpr int kDefaultHorizon = 6;

// ---------------------------------------------------------------------------
// Loading

namespace detail {

class SceneReader {
 public:
  explicit SceneReader(bool lenient) : lenient_(lenient) {}

  SceneSequence read(const nlohmann::json& doc) {
    SceneSequence scene;
    expect_object(doc, "");
    check_keys(doc, "", {"scene_id", "frame_period", "frames", "source_tag"});
    scene.scene_id = get_string(doc, "", "scene_id");
    if (scene.scene_id.empty()) fail("scene_id", "must be non-empty");
    scene.frame_period = get_number(doc, "", "frame_period");
    if (!(scene.frame_period > 0.0)) fail("frame_period", "must be positive");
    if (doc.contains("source_tag")) scene.source_tag = get_string(doc, "", "source_tag");

    const auto& frames = require(doc, "", "frames");
    if (!frames.is_array()) fail("frames", "must be an array");
    if (frames.empty()) fail("frames", "scene has no key frames");

    std::unordered_map<std::string, Category> categories;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const std::string path = "frames[" + std::to_string(i) + "]";
      KeyFrame frame = read_frame(frames[i], path, categories);
      if (!scene.frames.empty() && !(frame.timestamp > scene.frames.back().timestamp)) {
        fail(path + ".timestamp", "timestamps must be strictly increasing");
      }
      scene.frames.push_back(std::move(frame));
    }
    return scene;
  }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::kSchemaViolation, (path.empty() ? "<root>" : path) + ": " + what);
  }

  static std::string child(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  static void expect_object(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be an object");
  }

  void check_keys(const nlohmann::json& j, const std::string& path,
                  std::initializer_list<std::string_view> allowed) const {
    if (lenient_) return;
    for (const auto& [key, _] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(child(path, key), "unknown key");
      }
    }
  }

  static const nlohmann::json& require(const nlohmann::json& j, const std::string& path,
                                       std::string_view key) {
    auto it = j.find(std::string(key));
    if (it == j.end()) fail(child(path, key), "missing");
    return *it;
  }

  static std::string get_string(const nlohmann::json& j, const std::string& path,
                                std::string_view key) {
    const auto& v = require(j, path, key);
    if (!v.is_string()) fail(child(path, key), "must be a string");
    return v.get<std::string>();
  }

  static double as_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "must be finite");
    return d;
  }

  static double get_number(const nlohmann::json& j, const std::string& path,
                           std::string_view key) {
    return as_number(require(j, path, key), child(path, key));
  }

  static std::vector<double> get_numbers(const nlohmann::json& j, const std::string& path,
                                         std::string_view key, std::size_t count) {
    const auto& v = require(j, path, key);
    const std::string p = child(path, key);
    if (!v.is_array() || v.size() != count) {
      fail(p, "must be an array of " + std::to_string(count) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(as_number(v[i], p + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  KeyFrame read_frame(const nlohmann::json& j, const std::string& path,
                      std::unordered_map<std::string, Category>& categories) const {
    expect_object(j, path);
    check_keys(j, path, {"timestamp", "ego", "objects"});
    KeyFrame frame;
    frame.timestamp = get_number(j, path, "timestamp");

    const auto& ego = require(j, path, "ego");
    const std::string ego_path = child(path, "ego");
    expect_object(ego, ego_path);
    check_keys(ego, ego_path, {"position", "heading", "speed"});
    const auto pos = get_numbers(ego, ego_path, "position", 2);
    frame.ego.position = {pos[0], pos[1]};
    frame.ego.heading = get_number(ego, ego_path, "heading");
    if (!(frame.ego.heading > -std::numbers::pi && frame.ego.heading <= std::numbers::pi)) {
      fail(child(ego_path, "heading"), "must lie in (-pi, pi]");
    }
    frame.ego.speed = get_number(ego, ego_path, "speed");
    if (frame.ego.speed < 0.0) fail(child(ego_path, "speed"), "must be non-negative");

    const auto& objects = require(j, path, "objects");
    const std::string objects_path = child(path, "objects");
    if (!objects.is_array()) fail(objects_path, "must be an array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const std::string op = objects_path + "[" + std::to_string(i) + "]";
      ObjectEntry obj = read_object(objects[i], op);
      if (!seen.insert(obj.object_id).second) fail(op + ".id", "duplicate id in frame");
      auto [it, inserted] = categories.emplace(obj.object_id, obj.category);
      if (!inserted && it->second != obj.category) {
        fail(op + ".category", "category differs from earlier frames");
      }
      frame.objects.push_back(std::move(obj));
    }
    return frame;
  }

  ObjectEntry read_object(const nlohmann::json& j, const std::string& path) const {
    expect_object(j, path);
    check_keys(j, path, {"id", "category", "bbox", "position", "velocity", "attributes"});
    ObjectEntry obj;
    obj.object_id = get_string(j, path, "id");
    if (obj.object_id.empty()) fail(child(path, "id"), "must be non-empty");
    const auto category = parse_category(get_string(j, path, "category"));
    if (!category) fail(child(path, "category"), "unknown category");
    obj.category = *category;

    const auto box = get_numbers(j, path, "bbox", 4);
    obj.bbox = {box[0], box[1], box[2], box[3]};
    if (!obj.bbox.valid()) {
      fail(child(path, "bbox"), "requires 0 <= x1 < x2 and 0 <= y1 < y2");
    }
    const auto pos = get_numbers(j, path, "position", 2);
    obj.position = {pos[0], pos[1]};
    const auto vel = get_numbers(j, path, "velocity", 2);
    obj.velocity = {vel[0], vel[1]};

    if (j.contains("attributes")) {
      const auto& attrs = j.at("attributes");
      const std::string ap = child(path, "attributes");
      if (!attrs.is_array()) fail(ap, "must be an array of strings");
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (!attrs[i].is_string()) fail(ap + "[" + std::to_string(i) + "]", "must be a string");
        obj.attributes.insert(attrs[i].get<std::string>());
      }
    }
    return obj;
  }

  bool lenient_;
};

}  // namespace detail

// Parses one canonical scene document. Strict mode rejects unknown keys.
inline SceneSequence load_scene(std::string_view bytes, bool lenient = false) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
  return detail::SceneReader(lenient).read(doc);
}

inline nlohmann::json to_json(const SceneSequence& scene) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : scene.frames) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& o : f.objects) {
      objects.push_back({
          {"id", o.object_id},
          {"category", std::string(to_string(o.category))},
          {"bbox", {o.bbox.x1, o.bbox.y1, o.bbox.x2, o.bbox.y2}},
          {"position", {o.position.x, o.position.y}},
          {"velocity", {o.velocity.x, o.velocity.y}},
          {"attributes", std::vector<std::string>(o.attributes.begin(), o.attributes.end())},
      });
    }
    frames.push_back({
        {"timestamp", f.timestamp},
        {"ego", {{"position", {f.ego.position.x, f.ego.position.y}},
                 {"heading", f.ego.heading},
                 {"speed", f.ego.speed}}},
        {"objects", std::move(objects)},
    });
  }
  nlohmann::json doc = {
      {"scene_id", scene.scene_id},
      {"frame_period", scene.frame_period},
      {"frames", std::move(frames)},
  };
  if (!scene.source_tag.empty()) doc["source_tag"] = scene.source_tag;
  return doc;
}

// ---------------------------------------------------------------------------
// Labels

namespace detail {

inline void check_window(const SceneSequence& scene, std::size_t at_frame, int horizon) {
  if (horizon < 0 || at_frame >= scene.size() ||
      at_frame + static_cast<std::size_t>(horizon) >= scene.size()) {
    throw Error(ErrorCode::kHorizonOutOfRange,
                "frame " + std::to_string(at_frame) + " + horizon " + std::to_string(horizon) +
                    " exceeds " + std::to_string(scene.size()) + " frames");
  }
}

// Mean speed over frames within the trailing window ending at `frame`.
// The lookup returns the speed at frame k, or nullopt when unobserved.
template <typename SpeedAt>
double trailing_mean_speed(const SceneSequence& scene, std::size_t frame, double window,
                           SpeedAt speed_at) {
  const double t_end = scene.frames[frame].timestamp;
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = frame + 1; k-- > 0;) {
    if (scene.frames[k].timestamp < t_end - window - 1e-9) break;
    if (auto s = speed_at(k)) {
      sum += *s;
      ++n;
    }
  }
  return n ? sum / n : 0.0;
}

inline Turn classify_turn(double start_heading, double end_heading, double threshold_deg) {
  const double delta = wrap_angle(end_heading - start_heading) * 180.0 / std::numbers::pi;
  if (delta > threshold_deg) return Turn::kLeft;
  if (delta < -threshold_deg) return Turn::kRight;
  return Turn::kStraight;
}

}  // namespace detail

inline RelativePosition classify_position(Point2 p, const LabelThresholds& th = {}) {
  const double bearing = std::atan2(p.y, p.x) * 180.0 / std::numbers::pi;
  const double a = std::abs(bearing);
  const bool left = bearing > 0.0;
  if (a <= th.front_half_angle) return RelativePosition::kFront;
  if (a <= th.side_split_angle) return left ? RelativePosition::kFrontLeft : RelativePosition::kFrontRight;
  if (a <= th.rear_split_angle) return left ? RelativePosition::kLeft : RelativePosition::kRight;
  return RelativePosition::kRear;
}

// Labels for one object at `at_frame`, looking `horizon` key frames ahead.
// Horizon-dependent labels (future_motion, turn, trend, merge) use the last
// frame in the window where the object is observed.
inline DerivedLabels derive_labels(std::string_view obj_id, const SceneSequence& scene,
                                   std::size_t at_frame, int horizon,
                                   const LabelThresholds& th = {}) {
  detail::check_window(scene, at_frame, horizon);
  const ObjectEntry* now = scene.frames[at_frame].find(obj_id);
  if (!now) {
    throw Error(ErrorCode::kUnknownObject,
                "object '" + std::string(obj_id) + "' not present at frame " + std::to_string(at_frame));
  }

  auto speed_at = [&](std::size_t k) -> std::optional<double> {
    if (const auto* o = scene.frames[k].find(obj_id)) return o->speed();
    return std::nullopt;
  };
  auto status_at = [&](std::size_t k) {
    return detail::trailing_mean_speed(scene, k, th.stop_window, speed_at) < th.stop_speed
               ? MotionStatus::kStopped
               : MotionStatus::kMoving;
  };

  bool parked = true;
  for (std::size_t k = 0; k < scene.size() && parked; ++k) {
    if (auto s = speed_at(k); s && *s >= th.stop_speed) parked = false;
  }

  std::size_t end = at_frame;
  for (std::size_t k = at_frame + static_cast<std::size_t>(horizon); k > at_frame; --k) {
    if (scene.frames[k].find(obj_id)) {
      end = k;
      break;
    }
  }
  const ObjectEntry* last = scene.frames[end].find(obj_id);

  DerivedLabels labels;
  labels.motion_status = parked ? MotionStatus::kParked : status_at(at_frame);
  labels.future_motion = parked ? MotionStatus::kParked : status_at(end);
  labels.distance_to_ego = norm(now->position);
  labels.relative_position = classify_position(now->position, th);

  if (now->speed() >= th.stop_speed && last->speed() >= th.stop_speed) {
    const double h0 = scene.frames[at_frame].ego.heading + std::atan2(now->velocity.y, now->velocity.x);
    const double h1 = scene.frames[end].ego.heading + std::atan2(last->velocity.y, last->velocity.x);
    labels.turn = detail::classify_turn(h0, h1, th.turn_degrees);
  }

  const double d_end = norm(last->position);
  if (d_end < labels.distance_to_ego - th.trend_deadband) {
    labels.trend = Trend::kApproach;
  } else if (d_end > labels.distance_to_ego + th.trend_deadband) {
    labels.trend = Trend::kStayAway;
  }

  const double half = th.corridor_width / 2.0;
  const bool in_before = std::abs(now->position.y) <= half;
  const bool in_after = std::abs(last->position.y) <= half;
  if (!in_before && in_after) labels.merge = Merge::kMergeIn;
  if (in_before && !in_after) labels.merge = Merge::kMergeOut;
  return labels;
}

inline EgoLabels derive_ego_labels(const SceneSequence& scene, std::size_t at_frame, int horizon,
                                   const LabelThresholds& th = {}) {
  detail::check_window(scene, at_frame, horizon);
  auto speed_at = [&](std::size_t k) -> std::optional<double> { return scene.frames[k].ego.speed; };
  auto status_at = [&](std::size_t k) {
    return detail::trailing_mean_speed(scene, k, th.stop_window, speed_at) < th.stop_speed
               ? MotionStatus::kStopped
               : MotionStatus::kMoving;
  };
  const std::size_t end = at_frame + static_cast<std::size_t>(horizon);
  EgoLabels labels;
  labels.speed = scene.frames[at_frame].ego.speed;
  labels.motion_status = status_at(at_frame);
  labels.future_motion = status_at(end);
  labels.turn = detail::classify_turn(scene.frames[at_frame].ego.heading,
                                      scene.frames[end].ego.heading, th.turn_degrees);
  return labels;
}

// Re-expresses a point given in the ego frame of `from` in the ego frame of `to`.
inline Point2 to_frame(Point2 local, const EgoEntry& from, const EgoEntry& to) {
  const Point2 world = from.position + rotate(local, from.heading);
  return rotate(world - to.position, -to.heading);
}

// Positions of the object at the `horizon` key frames after `at_frame`,
// in the ego frame of `at_frame`.
inline Trajectory future_trajectory(std::string_view obj_id, const SceneSequence& scene,
                                    std::size_t at_frame, int horizon) {
  if (horizon < 2) {
    throw Error(ErrorCode::kHorizonOutOfRange, "a trajectory needs a horizon of at least 2");
  }
  detail::check_window(scene, at_frame, horizon);
  if (!scene.frames[at_frame].find(obj_id)) {
    throw Error(ErrorCode::kUnknownObject,
                "object '" + std::string(obj_id) + "' not present at frame " + std::to_string(at_frame));
  }
  const EgoEntry& origin = scene.frames[at_frame].ego;
  Trajectory traj;
  traj.stride = scene.frame_period;
  for (int k = 1; k <= horizon; ++k) {
    const KeyFrame& f = scene.frames[at_frame + static_cast<std::size_t>(k)];
    const ObjectEntry* o = f.find(obj_id);
    if (!o) {
      throw Error(ErrorCode::kTrackGap, "object '" + std::string(obj_id) + "' missing at frame " +
                                            std::to_string(at_frame + static_cast<std::size_t>(k)));
    }
    traj.points.push_back(to_frame(o->position, f.ego, origin));
  }
  return traj;
}

inline Trajectory ego_future_trajectory(const SceneSequence& scene, std::size_t at_frame, int horizon) {
  if (horizon < 2) {
    throw Error(ErrorCode::kHorizonOutOfRange, "a trajectory needs a horizon of at least 2");
  }
  detail::check_window(scene, at_frame, horizon);
  const EgoEntry& origin = scene.frames[at_frame].ego;
  Trajectory traj;
  traj.stride = scene.frame_period;
  for (int k = 1; k <= horizon; ++k) {
    const EgoEntry& e = scene.frames[at_frame + static_cast<std::size_t>(k)].ego;
    traj.points.push_back(rotate(e.position - origin.position, -origin.heading));
  }
  return traj;
}

// True when the object is observed at every frame of [at_frame, at_frame + horizon].
inline bool tracked_through(std::string_view obj_id, const SceneSequence& scene,
                            std::size_t at_frame, int horizon) {
  if (at_frame + static_cast<std::size_t>(horizon) >= scene.size()) return false;
  for (std::size_t k = at_frame; k <= at_frame + static_cast<std::size_t>(horizon); ++k) {
    if (!scene.frames[k].find(obj_id)) return false;
  }
  return true;
}

}  // namespace drq

#endif  // DRQ_SCENE_HPP
