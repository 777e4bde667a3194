#ifndef DRQ_TEST_SUPPORT_HPP
#define DRQ_TEST_SUPPORT_HPP

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "drq/adrscore.hpp"
#include "drq/chain.hpp"
#include "drq/runner.hpp"
#include "drq/scene.hpp"

namespace drq::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(DRQ_FIXTURES) / name; }

inline SceneSequence load_fixture(const std::string& name) { return load_scene(read_file(fixture(name))); }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("drq_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Step text_step(std::string text) { return Step{std::move(text), {}}; }

// Chain whose step texts are "<prefix>0", "<prefix>1", ...
inline ReasoningChain named_chain(const std::string& prefix, std::size_t n) {
  ReasoningChain c;
  for (std::size_t i = 0; i < n; ++i) c.steps.push_back(text_step(prefix + std::to_string(i)));
  return c;
}

// Similarity looked up from table[i][j] for steps named "h<i>" and "r<j>".
inline SemanticSimilarity table_similarity(std::vector<std::vector<double>> table) {
  return [table = std::move(table)](const Step& h, const Step& r) {
    return table.at(std::stoul(h.text.substr(1))).at(std::stoul(r.text.substr(1)));
  };
}

}  // namespace drq::test

#endif  // DRQ_TEST_SUPPORT_HPP
