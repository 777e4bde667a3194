#ifndef DRQ_CONFIG_HPP
#define DRQ_CONFIG_HPP

// Toolkit configuration. The file form is INI:
//
//   [metric]    tau, beta, clamp_semantic
//   [visual]    iou_threshold
//   [generate]  horizon, sampling, multi_subset_cap, min_subset_size, max_subset_size
//   [labels]    stop_speed, stop_window, turn_degrees, trend_deadband, corridor_width
//   [embedder]  provider (offline|remote), endpoint, batch_size, max_in_flight, cache_path
//   [runner]    workers, lenient_predictions
//   [split]     ratio
//
// Missing keys keep their defaults; command-line flags override the file.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <sstream>
#include <string>

#include "json.hpp"

#include "drq/adrscore.hpp"
#include "drq/error.hpp"
#include "drq/qa_gen.hpp"
#include "drq/remote_provider.hpp"

namespace drq {

struct RunnerConfig {
  MetricConfig metric;
  double iou_threshold = 0.5;
  GenerateOptions generate;
  std::string provider = "offline";
  std::string endpoint = "http://127.0.0.1:8080";
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  std::string cache_path;
  std::size_t workers = 0;  // 0: one per logical CPU
  bool lenient_predictions = true;
  double split_ratio = 0.7;

  void validate() const {
    metric.validate();
    if (!(iou_threshold >= 0.0 && iou_threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "iou_threshold must lie in [0, 1]");
    }
    if (provider != "offline" && provider != "remote") {
      throw Error(ErrorCode::kInvalidArgument, "provider must be 'offline' or 'remote'");
    }
    if (!(split_ratio >= 0.0 && split_ratio <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "split ratio must lie in [0, 1]");
    }
    if (generate.min_subset_size < 2 || generate.max_subset_size < generate.min_subset_size) {
      throw Error(ErrorCode::kInvalidArgument, "subset sizes must satisfy 2 <= min <= max");
    }
  }
};

namespace detail {

// Reads key into out when present. Unlike ptree::get with a default, a value
// that fails to convert is an error rather than silently ignored.
template <typename T>
void read_key(const boost::property_tree::ptree& pt, const std::string& key, T& out) {
  const auto node = pt.get_child_optional(boost::property_tree::ptree::path_type(key, '.'));
  if (!node) return;
  const auto v = node->template get_value_optional<T>();
  if (!v) throw Error(ErrorCode::kMalformedInput, "config: bad value for " + key + ": '" + node->data() + "'");
  out = *v;
}

}  // namespace detail

inline RunnerConfig config_from_ptree(const boost::property_tree::ptree& pt, RunnerConfig c = {}) {
  detail::read_key(pt, "metric.tau", c.metric.tau);
  detail::read_key(pt, "metric.beta", c.metric.beta);
  detail::read_key(pt, "metric.clamp_semantic", c.metric.clamp_semantic);
  detail::read_key(pt, "visual.iou_threshold", c.iou_threshold);
  detail::read_key(pt, "generate.horizon", c.generate.horizon);
  detail::read_key(pt, "generate.sampling", c.generate.sampling);
  detail::read_key(pt, "generate.multi_subset_cap", c.generate.multi_subset_cap);
  detail::read_key(pt, "generate.min_subset_size", c.generate.min_subset_size);
  detail::read_key(pt, "generate.max_subset_size", c.generate.max_subset_size);
  auto& th = c.generate.thresholds;
  detail::read_key(pt, "labels.stop_speed", th.stop_speed);
  detail::read_key(pt, "labels.stop_window", th.stop_window);
  detail::read_key(pt, "labels.turn_degrees", th.turn_degrees);
  detail::read_key(pt, "labels.trend_deadband", th.trend_deadband);
  detail::read_key(pt, "labels.corridor_width", th.corridor_width);
  detail::read_key(pt, "embedder.provider", c.provider);
  detail::read_key(pt, "embedder.endpoint", c.endpoint);
  detail::read_key(pt, "embedder.batch_size", c.batch_size);
  detail::read_key(pt, "embedder.max_in_flight", c.max_in_flight);
  detail::read_key(pt, "embedder.cache_path", c.cache_path);
  detail::read_key(pt, "runner.workers", c.workers);
  detail::read_key(pt, "runner.lenient_predictions", c.lenient_predictions);
  detail::read_key(pt, "split.ratio", c.split_ratio);
  c.validate();
  return c;
}

inline RunnerConfig parse_config_ini(const std::string& text, RunnerConfig base = {}) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("config: ") + e.what());
  }
  return config_from_ptree(pt, std::move(base));
}

// Everything that can change a score or a generated record. Worker count and
// cache location are left out: they never change results.
inline nlohmann::ordered_json config_echo(const RunnerConfig& c) {
  const auto& th = c.generate.thresholds;
  nlohmann::ordered_json j;
  j["metric"] = {{"tau", c.metric.tau}, {"beta", c.metric.beta}, {"clamp_semantic", c.metric.clamp_semantic}};
  j["visual"] = {{"iou_threshold", c.iou_threshold}};
  j["generate"] = {{"horizon", c.generate.horizon},
                   {"sampling", c.generate.sampling},
                   {"multi_subset_cap", c.generate.multi_subset_cap},
                   {"min_subset_size", c.generate.min_subset_size},
                   {"max_subset_size", c.generate.max_subset_size}};
  j["labels"] = {{"stop_speed", th.stop_speed},
                 {"stop_window", th.stop_window},
                 {"turn_degrees", th.turn_degrees},
                 {"trend_deadband", th.trend_deadband},
                 {"corridor_width", th.corridor_width}};
  j["embedder"] = {{"provider", c.provider},
                   {"endpoint", c.endpoint},
                   {"batch_size", c.batch_size},
                   {"max_in_flight", c.max_in_flight}};
  j["runner"] = {{"lenient_predictions", c.lenient_predictions}};
  j["split"] = {{"ratio", c.split_ratio}};
  return j;
}

// Inverse of config_echo: accepts the "config" object of a report.
inline RunnerConfig config_from_echo(const nlohmann::json& echo, RunnerConfig base = {}) {
  boost::property_tree::ptree pt;
  for (const auto& [section, values] : echo.items()) {
    if (!values.is_object()) continue;
    for (const auto& [key, v] : values.items()) {
      std::string text;
      if (v.is_string()) {
        text = v.get<std::string>();
      } else if (v.is_boolean()) {
        text = v.get<bool>() ? "true" : "false";
      } else {
        text = v.dump();
      }
      pt.put(boost::property_tree::ptree::path_type(section + "." + key, '.'), text);
    }
  }
  return config_from_ptree(pt, std::move(base));
}

}  // namespace drq

#endif  // DRQ_CONFIG_HPP
