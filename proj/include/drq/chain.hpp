#ifndef DRQ_CHAIN_HPP
#define DRQ_CHAIN_HPP

// Reasoning chains and their text form.
//
// Wire grammar (no spaces in the canonical form, two fraction digits on
// output, any digit count accepted on input):
//
//   <LOC>(x1,y1,x2,y2)            bounding box
//   <MOT>[(x1,y1),(x2,y2),...]    trajectory, two or more points
//
// Steps are separated by '.', ';' or a newline; '.' and ';' only count when
// followed by whitespace or the end of the text, and never inside a token
// payload. <Inst*> tokens are ordinary text.

#include <cstdlib>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drq/error.hpp"
#include "drq/geometry.hpp"
#include "drq/util.hpp"

namespace drq {

enum class ElementKind { kLoc, kMot };

inline std::string_view to_string(ElementKind k) { return k == ElementKind::kLoc ? "loc" : "mot"; }

struct VisualElement {
  std::variant<BBox, std::vector<Point2>> payload;

  ElementKind kind() const { return payload.index() == 0 ? ElementKind::kLoc : ElementKind::kMot; }
  const BBox& box() const { return std::get<BBox>(payload); }
  const std::vector<Point2>& points() const { return std::get<std::vector<Point2>>(payload); }

  bool valid() const {
    if (kind() == ElementKind::kLoc) return box().valid();
    if (points().size() < 2) return false;
    for (const auto& p : points()) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    }
    return true;
  }

  static VisualElement loc(BBox b) { return {b}; }
  static VisualElement mot(std::vector<Point2> pts) { return {std::move(pts)}; }

  friend bool operator==(const VisualElement&, const VisualElement&) = default;
};

struct Step {
  std::string text;
  std::vector<VisualElement> elements;

  friend bool operator==(const Step&, const Step&) = default;
};

struct ReasoningChain {
  std::vector<Step> steps;

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }

  friend bool operator==(const ReasoningChain&, const ReasoningChain&) = default;
};

// Rounds through the canonical text form so a built element compares equal
// to the one parsed back from its serialization.
inline double quantize(double v) {
  const std::string s = format_fixed(v, 2);
  return std::strtod(s.c_str(), nullptr);
}

inline std::string render_element(const VisualElement& e) {
  std::string out;
  if (e.kind() == ElementKind::kLoc) {
    const BBox& b = e.box();
    out = "<LOC>(" + format_fixed(b.x1, 2) + "," + format_fixed(b.y1, 2) + "," +
          format_fixed(b.x2, 2) + "," + format_fixed(b.y2, 2) + ")";
  } else {
    out = "<MOT>[";
    const auto& pts = e.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out += ",";
      out += "(" + format_fixed(pts[i].x, 2) + "," + format_fixed(pts[i].y, 2) + ")";
    }
    out += "]";
  }
  return out;
}

// Assembles a step whose text embeds each element's canonical token.
class StepBuilder {
 public:
  StepBuilder& text(std::string_view s) {
    text_ += s;
    return *this;
  }

  StepBuilder& loc(const BBox& b) {
    return element(VisualElement::loc({quantize(b.x1), quantize(b.y1), quantize(b.x2), quantize(b.y2)}));
  }

  StepBuilder& mot(const std::vector<Point2>& pts) {
    std::vector<Point2> q;
    q.reserve(pts.size());
    for (const auto& p : pts) q.push_back({quantize(p.x), quantize(p.y)});
    return element(VisualElement::mot(std::move(q)));
  }

  // Sentence case: a leading lowercase letter is capitalized.
  Step build() const {
    std::string t(trim(text_));
    if (!t.empty() && t[0] >= 'a' && t[0] <= 'z') t[0] = static_cast<char>(t[0] - 'a' + 'A');
    return {std::move(t), elements_};
  }

 private:
  StepBuilder& element(VisualElement e) {
    text_ += render_element(e);
    elements_.push_back(std::move(e));
    return *this;
  }

  std::string text_;
  std::vector<VisualElement> elements_;
};

namespace detail {

inline bool starts_with_token(std::string_view s, std::size_t i) {
  return s.compare(i, 5, "<LOC>") == 0 || s.compare(i, 5, "<MOT>") == 0;
}

// Index one past the payload's closing bracket, or npos when unbalanced.
inline std::size_t payload_end(std::string_view s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

inline const std::string& number_pattern() {
  static const std::string p = R"(-?\d+(?:\.\d+)?)";
  return p;
}

inline std::vector<double> numbers_in(std::string_view s) {
  static const std::regex re(number_pattern());
  std::vector<double> out;
  const std::string str(s);
  for (auto it = std::sregex_iterator(str.begin(), str.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back(std::strtod(it->str().c_str(), nullptr));
  }
  return out;
}

inline std::optional<VisualElement> element_from_payload(ElementKind kind, std::string_view payload) {
  const auto nums = numbers_in(payload);
  if (kind == ElementKind::kLoc) {
    if (nums.size() != 4) return std::nullopt;
    auto e = VisualElement::loc({nums[0], nums[1], nums[2], nums[3]});
    if (!e.valid()) return std::nullopt;
    return e;
  }
  if (nums.size() < 4 || nums.size() % 2 != 0) return std::nullopt;
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < nums.size(); i += 2) pts.push_back({nums[i], nums[i + 1]});
  return VisualElement::mot(std::move(pts));
}

}  // namespace detail

// Splits free text into trimmed, non-empty step texts.
inline std::vector<std::string> split_steps(std::string_view text) {
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyInput, "no step text");
  std::vector<std::string> steps;
  std::string current;
  auto flush = [&] {
    auto t = trim(current);
    if (!t.empty()) steps.emplace_back(t);
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    if (detail::starts_with_token(text, i) && i + 5 < text.size() &&
        (text[i + 5] == '(' || text[i + 5] == '[')) {
      const std::size_t end = detail::payload_end(text, i + 5);
      if (end != std::string_view::npos) {
        current.append(text.substr(i, end - i));
        i = end;
        continue;
      }
    }
    const char c = text[i];
    const bool at_boundary =
        i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (c == '\n' || ((c == '.' || c == ';') && at_boundary)) {
      flush();
    } else {
      current.push_back(c);
    }
    ++i;
  }
  flush();
  if (steps.empty()) throw Error(ErrorCode::kEmptyInput, "no step text");
  return steps;
}

// Pulls <LOC>/<MOT> elements out of one step, in text order. Strict mode
// accepts only the canonical grammar and throws on a malformed token; lenient
// mode tolerates whitespace, also picks up bare "(a,b,c,d)" boxes and
// "[(a,b),(c,d),...]" point lists, and skips anything it cannot parse.
inline std::vector<VisualElement> extract_visual_elements(std::string_view step_text, bool lenient = false) {
  const std::string& num = detail::number_pattern();
  std::vector<VisualElement> out;

  if (!lenient) {
    static const std::regex loc_re(R"(^<LOC>\()" + num + "," + num + "," + num + "," + num + R"(\))");
    static const std::regex mot_re(R"(^<MOT>\[\()" + num + "," + num + R"(\)(?:,\()" + num + "," + num +
                                   R"(\))+\])");
    for (std::size_t i = 0; i < step_text.size(); ++i) {
      if (!detail::starts_with_token(step_text, i)) continue;
      const bool is_loc = step_text.compare(i, 5, "<LOC>") == 0;
      const std::string rest(step_text.substr(i));
      std::smatch m;
      if (!std::regex_search(rest, m, is_loc ? loc_re : mot_re)) {
        throw Error(ErrorCode::kMalformedToken, "at offset " + std::to_string(i) + ": " + rest.substr(0, 40));
      }
      const std::string payload = m.str().substr(5);
      auto e = detail::element_from_payload(is_loc ? ElementKind::kLoc : ElementKind::kMot, payload);
      if (!e) throw Error(ErrorCode::kMalformedToken, "invalid geometry in " + m.str());
      out.push_back(std::move(*e));
      i += static_cast<std::size_t>(m.length()) - 1;
    }
    return out;
  }

  const std::string n = R"(\s*)" + num + R"(\s*)";
  const std::string pt = R"(\()" + n + "," + n + R"(\))";
  const std::string mot = R"(\[\s*)" + pt + R"((?:\s*,\s*)" + pt + R"()+\s*\])";
  const std::string loc = R"(\()" + n + "," + n + "," + n + "," + n + R"(\))";
  static const std::regex any_re("(?:<(LOC|MOT)>\\s*)?(" + mot + "|" + loc + ")");

  const std::string str(step_text);
  for (auto it = std::sregex_iterator(str.begin(), str.end(), any_re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string payload = m.str(2);
    const ElementKind shape = payload.front() == '[' ? ElementKind::kMot : ElementKind::kLoc;
    if (m[1].matched) {
      const ElementKind tagged = m.str(1) == "LOC" ? ElementKind::kLoc : ElementKind::kMot;
      if (tagged != shape) continue;
    }
    if (auto e = detail::element_from_payload(shape, payload)) out.push_back(std::move(*e));
  }
  return out;
}

inline std::string serialize(const ReasoningChain& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    if (i) out += ' ';
    out += chain.steps[i].text;
    out += '.';
  }
  return out;
}

inline ReasoningChain parse_chain(std::string_view text, bool lenient = false) {
  ReasoningChain chain;
  for (auto& s : split_steps(text)) {
    auto elements = extract_visual_elements(s, lenient);
    chain.steps.push_back({std::move(s), std::move(elements)});
  }
  return chain;
}

}  // namespace drq

#endif  // DRQ_CHAIN_HPP
