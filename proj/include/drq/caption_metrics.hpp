#ifndef DRQ_CAPTION_METRICS_HPP
#define DRQ_CAPTION_METRICS_HPP

// Caption-style baselines: corpus BLEU-4, ROUGE-L and CIDEr over token lists
// produced by drq::tokenize.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "drq/error.hpp"
#include "drq/util.hpp"

namespace drq {

using Tokens = std::vector<std::string>;

struct CorpusEntry {
  Tokens candidate;
  std::vector<Tokens> references;
};

struct Corpus {
  std::vector<CorpusEntry> entries;

  void validate() const {
    if (entries.empty()) throw Error(ErrorCode::kInvalidArgument, "corpus has no entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].references.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "entry " + std::to_string(i) + " has no references");
      }
    }
  }
};

inline constexpr double kBleuEpsilon = 1e-9;
inline constexpr double kRougeBeta = 1.2;
inline constexpr double kCiderScale = 10.0;

using NgramCounts = std::map<Tokens, int>;

inline NgramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

// Corpus-level BLEU-4 with uniform weights and the closest-reference brevity
// penalty (ties go to the shorter reference). A zero match count is replaced
// by kBleuEpsilon.
inline double bleu4(const Corpus& corpus) {
  corpus.validate();
  double matches[4] = {0, 0, 0, 0};
  double totals[4] = {0, 0, 0, 0};
  double cand_len = 0.0;
  double ref_len = 0.0;
  for (const auto& e : corpus.entries) {
    const auto c = static_cast<double>(e.candidate.size());
    cand_len += c;
    double closest = static_cast<double>(e.references.front().size());
    for (const auto& r : e.references) {
      const auto rl = static_cast<double>(r.size());
      if (std::abs(rl - c) < std::abs(closest - c) || (std::abs(rl - c) == std::abs(closest - c) && rl < closest)) {
        closest = rl;
      }
    }
    ref_len += closest;
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto cand = ngram_counts(e.candidate, n);
      NgramCounts max_ref;
      for (const auto& r : e.references) {
        for (const auto& [g, k] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], k);
      }
      for (const auto& [g, k] : cand) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) matches[n - 1] += std::min(k, it->second);
        totals[n - 1] += k;
      }
    }
  }
  if (cand_len == 0.0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    const double num = matches[n] > 0 ? matches[n] : kBleuEpsilon;
    log_sum += std::log(num / std::max(totals[n], 1.0));
  }
  const double bp = cand_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
  return bp * std::exp(log_sum / 4.0);
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// LCS F-measure with recall weighted by beta^2 = 1.44, best over references.
inline double rouge_l(const Tokens& candidate, const std::vector<Tokens>& references) {
  double best = 0.0;
  if (candidate.empty()) return 0.0;
  for (const auto& r : references) {
    if (r.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(candidate, r));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(candidate.size());
    const double rec = lcs / static_cast<double>(r.size());
    const double b2 = kRougeBeta * kRougeBeta;
    best = std::max(best, (1.0 + b2) * p * rec / (rec + b2 * p));
  }
  return best;
}

inline double rouge_l(const Corpus& corpus) {
  corpus.validate();
  double sum = 0.0;
  for (const auto& e : corpus.entries) sum += rouge_l(e.candidate, e.references);
  return sum / static_cast<double>(corpus.entries.size());
}

struct CiderResult {
  double score = 0.0;
  std::vector<double> per_entry;
};

// TF-IDF n-gram cosine (n = 1..4) averaged over n and references, times 10.
// Document frequencies come from the references of this corpus.
inline CiderResult cider_detailed(const Corpus& corpus) {
  corpus.validate();
  if (corpus.entries.size() < 2) {
    throw Error(ErrorCode::kCorpusTooSmall, "CIDEr needs at least 2 entries for document frequencies");
  }
  const double log_n = std::log(static_cast<double>(corpus.entries.size()));
  std::map<Tokens, int> df;
  for (const auto& e : corpus.entries) {
    std::set<Tokens> seen;
    for (const auto& r : e.references) {
      for (std::size_t n = 1; n <= 4; ++n) {
        for (const auto& [g, _] : ngram_counts(r, n)) seen.insert(g);
      }
    }
    for (const auto& g : seen) ++df[g];
  }

  using Vec = std::map<Tokens, double>;
  auto tfidf = [&](const Tokens& tokens, std::size_t n, double& norm_out) {
    Vec v;
    double sq = 0.0;
    for (const auto& [g, k] : ngram_counts(tokens, n)) {
      auto it = df.find(g);
      const double d = it == df.end() ? 1.0 : static_cast<double>(it->second);
      const double w = static_cast<double>(k) * (log_n - std::log(d));
      v[g] = w;
      sq += w * w;
    }
    norm_out = std::sqrt(sq);
    return v;
  };

  CiderResult result;
  for (const auto& e : corpus.entries) {
    double total = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      double cn = 0.0;
      const Vec cv = tfidf(e.candidate, n, cn);
      double sum = 0.0;
      for (const auto& r : e.references) {
        double rn = 0.0;
        const Vec rv = tfidf(r, n, rn);
        if (cn == 0.0 || rn == 0.0) continue;
        double dot = 0.0;
        for (const auto& [g, w] : cv) {
          auto it = rv.find(g);
          if (it != rv.end()) dot += w * it->second;
        }
        sum += dot / (cn * rn);
      }
      total += sum / static_cast<double>(e.references.size());
    }
    result.per_entry.push_back(kCiderScale * total / 4.0);
  }
  double sum = 0.0;
  for (double s : result.per_entry) sum += s;
  result.score = sum / static_cast<double>(result.per_entry.size());
  return result;
}

inline double cider(const Corpus& corpus) { return cider_detailed(corpus).score; }

}  // namespace drq

#endif  // DRQ_CAPTION_METRICS_HPP
