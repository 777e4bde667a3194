// Scores a hypothesis reasoning chain against a reference with the offline
// embedder, in both the semantic and the visual-adapted mode.
//
//   sample_score_chains ["reference chain"] ["hypothesis chain"]

#include <cstdio>
#include <string>

#include "drq/adrscore.hpp"
#include "drq/chain.hpp"
#include "drq/embedder.hpp"

namespace {

void print(const char* label, const drq::ScoreBreakdown& b) {
  std::printf("%-15s RA %.4f  RD %.4f  MS %.4f  total %.4f\n", label, b.ra, b.rd, b.ms, b.total);
  std::printf("%-15s alpha:", "");
  for (double a : b.alignment_h_to_r) std::printf(" %.4f", a);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  std::string ref =
      "The referred object is a vehicle. It is located at <LOC>(412.00,230.00,520.00,310.00). "
      "It will move along <MOT>[(12.00,0.50),(13.50,0.60),(15.00,0.80)]. The ego vehicle should keep its distance.";
  std::string hyp =
      "The object is a vehicle. It is at <LOC>(415.00,228.00,522.00,309.00). "
      "It will move along <MOT>[(12.10,0.40),(13.70,0.70),(15.40,1.00)].";
  if (argc > 1) ref = argv[1];
  if (argc > 2) hyp = argv[2];

  try {
    // Lenient parsing accepts bare "(x1, y1, x2, y2)" boxes in free text.
    const auto r = drq::parse_chain(ref, true);
    const auto h = drq::parse_chain(hyp, true);
    drq::OfflineProvider provider;
    const auto sim = drq::embedding_similarity(provider, h, r);
    const drq::MetricConfig cfg;
    std::printf("reference steps %zu, hypothesis steps %zu, provider %s\n", r.size(), h.size(),
                provider.info().provider_id.c_str());
    print("ADRScore", drq::score(h, r, cfg, sim, drq::ScoreMode::kSemantic));
    print("ADRScore-S", drq::score(h, r, cfg, sim, drq::ScoreMode::kVisualAdapted));
  } catch (const drq::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
