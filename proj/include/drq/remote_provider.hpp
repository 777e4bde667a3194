#ifndef DRQ_REMOTE_PROVIDER_HPP
#define DRQ_REMOTE_PROVIDER_HPP

// Client for an embedding service speaking:
//   POST /v1/embed  {"texts": [...]}  ->  {"model": m, "dim": n, "embeddings": [[...], ...]}
//   GET  /health                      ->  {"status": "ok", "model": m, "dim": n}

#include <cmath>
#include <functional>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "drq/embedder.hpp"
#include "drq/error.hpp"

namespace drq {

struct RemoteOptions {
  std::string endpoint = "http://127.0.0.1:8080";
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  int timeout_seconds = 30;
  std::function<void(const std::string&)> warn = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
};

class RemoteProvider final : public EmbeddingProvider {
 public:
  static constexpr double kNormTolerance = 1e-3;

  explicit RemoteProvider(RemoteOptions opts) : opts_(std::move(opts)) {
    if (opts_.batch_size == 0 || opts_.max_in_flight == 0) {
      throw Error(ErrorCode::kInvalidArgument, "batch_size and max_in_flight must be positive");
    }
  }

  // GET /health. Throws ProviderUnavailable on transport errors or non-200.
  nlohmann::json health() const {
    httplib::Client cli = client();
    auto res = cli.Get("/health");
    if (!res) throw Error(ErrorCode::kProviderUnavailable, opts_.endpoint + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw Error(ErrorCode::kProviderUnavailable, opts_.endpoint + "/health returned " + std::to_string(res->status));
    }
    auto j = parse(res->body, "/health");
    if (j.value("status", "") != "ok" || !j.contains("model") || !j["model"].is_string() || !j.contains("dim") ||
        !j["dim"].is_number_unsigned()) {
      throw Error(ErrorCode::kProviderUnavailable, "/health: unexpected body " + res->body);
    }
    return j;
  }

  ProviderInfo info() const override {
    std::call_once(info_once_, [this] {
      const auto h = health();
      info_ = {"remote:" + h["model"].get<std::string>(), h["dim"].get<std::size_t>()};
    });
    return info_;
  }

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    const ProviderInfo expected = info();
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::future<void>> in_flight;
    for (std::size_t start = 0; start < texts.size(); start += opts_.batch_size) {
      const std::size_t count = std::min(opts_.batch_size, texts.size() - start);
      if (in_flight.size() == opts_.max_in_flight) {
        in_flight.front().get();
        in_flight.erase(in_flight.begin());
      }
      in_flight.push_back(std::async(std::launch::async, [&, start, count] {
        auto batch = post_batch(texts.subspan(start, count), expected);
        for (std::size_t i = 0; i < count; ++i) out[start + i] = std::move(batch[i]);
      }));
    }
    for (auto& f : in_flight) f.get();
    return out;
  }

 private:
  httplib::Client client() const {
    httplib::Client cli(opts_.endpoint);
    cli.set_connection_timeout(opts_.timeout_seconds, 0);
    cli.set_read_timeout(opts_.timeout_seconds, 0);
    return cli;
  }

  static nlohmann::json parse(const std::string& body, const std::string& where) {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kProviderUnavailable, where + ": invalid JSON: " + e.what());
    }
  }

  std::vector<EmbeddingVector> post_batch(std::span<const std::string> texts, const ProviderInfo& expected) const {
    nlohmann::json req = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    httplib::Client cli = client();
    auto res = cli.Post("/v1/embed", req.dump(), "application/json");
    if (!res) throw Error(ErrorCode::kProviderUnavailable, opts_.endpoint + ": " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw Error(ErrorCode::kProviderUnavailable, "/v1/embed returned " + std::to_string(res->status) + ": " + res->body);
    }
    const auto j = parse(res->body, "/v1/embed");
    if (!j.contains("dim") || !j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() != expected.dimension) {
      throw Error(ErrorCode::kDimensionMismatch, "/v1/embed dim differs from /health dim " + std::to_string(expected.dimension));
    }
    if (!j.contains("embeddings") || !j["embeddings"].is_array() || j["embeddings"].size() != texts.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "/v1/embed returned a different number of embeddings than texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& e : j["embeddings"]) {
      std::vector<double> v;
      try {
        v = e.get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kDimensionMismatch, "/v1/embed: embedding is not a numeric array");
      }
      if (v.size() != expected.dimension) {
        throw Error(ErrorCode::kDimensionMismatch, "/v1/embed: vector of length " + std::to_string(v.size()) +
                                                       ", expected " + std::to_string(expected.dimension));
      }
      for (double x : v) {
        if (!std::isfinite(x)) throw Error(ErrorCode::kDimensionMismatch, "/v1/embed: non-finite value");
      }
      const double n = normalize_in_place(v);
      if (std::abs(n - 1.0) > kNormTolerance && opts_.warn) {
        opts_.warn("embedding norm " + std::to_string(n) + " re-normalized");
      }
      out.push_back({std::move(v), expected.provider_id});
    }
    return out;
  }

  RemoteOptions opts_;
  mutable std::once_flag info_once_;
  mutable ProviderInfo info_;
};

}  // namespace drq

#endif  // DRQ_REMOTE_PROVIDER_HPP
