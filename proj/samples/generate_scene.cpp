// Generates QA records from one scene file and prints a few of them with
// the per-task/target table.
//
//   sample_generate_scene scene.json [horizon] [records to show]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "drq/qa_gen.hpp"
#include "drq/runner.hpp"
#include "drq/scene.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s scene.json [horizon] [records to show]\n", argv[0]);
    return 2;
  }
  drq::GenerateOptions opts;
  if (argc > 2) opts.horizon = std::atoi(argv[2]);
  const std::size_t show = argc > 3 ? static_cast<std::size_t>(std::atoi(argv[3])) : 5;

  try {
    const auto scene = drq::load_scene(drq::read_file(argv[1]));
    const auto records = drq::generate(scene, drq::TaskMask::all(), 0, opts);
    std::printf("%s", drq::count_records(records).to_text().c_str());

    // Spread the sample across the dataset rather than taking the first few.
    const std::size_t step = show ? std::max<std::size_t>(1, records.size() / show) : 1;
    for (std::size_t i = 0, shown = 0; i < records.size() && shown < show; i += step, ++shown) {
      const auto& r = records[i];
      std::printf("\n[%s] %s / %s / %s\nQ: %s\nA: %s\n", r.record_id.c_str(),
                  std::string(drq::to_string(r.task)).c_str(), r.sub_task.c_str(),
                  std::string(drq::to_string(r.target)).c_str(), r.question.c_str(),
                  drq::serialize(r.reference).c_str());
    }
  } catch (const drq::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
  return 0;
}
