/* Copyright 2026 The layoutplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Deterministic edit commands. The grammar (case-insensitive, trailing
// punctuation ignored):
//
//   move|shift|slide|nudge <sel> [to the] <dir> [by <n>[%|px|units]]
//   swap <sel> and|with <sel>
//   make <sel> larger|bigger|smaller [by <n>%]
//   delete|remove <sel>
//   align <sel>, <sel> and <sel> [to the] left|right|top|bottom [edge]
//   add [a|an] <label> at [l, t, r, b]
//
// A selector is a label with an optional ordinal ("the second dog", "the
// last cup") or an element id written as "#id". Anything else is not a
// deterministic edit and is routed to the backend.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "layoutplan/error.hpp"
#include "layoutplan/geometry.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

enum class EditVerb { kMove, kAlign, kSwap, kResize, kDelete, kAdd };

inline std::string_view to_string(EditVerb v) {
  switch (v) {
    case EditVerb::kMove: return "move";
    case EditVerb::kAlign: return "align";
    case EditVerb::kSwap: return "swap";
    case EditVerb::kResize: return "resize";
    case EditVerb::kDelete: return "delete";
    case EditVerb::kAdd: return "add";
  }
  return "move";
}

enum class Edge { kLeft, kRight, kTop, kBottom };

inline std::string_view to_string(Edge e) {
  switch (e) {
    case Edge::kLeft: return "left";
    case Edge::kRight: return "right";
    case Edge::kTop: return "top";
    case Edge::kBottom: return "bottom";
  }
  return "left";
}

struct EditCommand {
  EditVerb verb = EditVerb::kMove;
  std::vector<std::string> targets;  // resolved element ids
  Direction direction = Direction::kLeft;
  // Move: distance, in canvas units unless magnitude_is_fraction, in which
  // case it is a fraction of the canvas extent along the move axis. nullopt
  // selects the default of 0.05 of that extent.
  std::optional<double> magnitude;
  bool magnitude_is_fraction = false;
  // Resize: percent change, positive grows.
  double percent = 0.0;
  Edge edge = Edge::kLeft;
  // Add.
  std::string label;
  BBox bbox;
};

struct EditResult {
  Layout layout;
  double requested = 0.0;
  double applied = 0.0;
};

inline constexpr double kDefaultMoveFraction = 0.05;

namespace edit_detail {

inline std::string strip_quotes(std::string_view s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

inline std::string strip_article(std::string s) {
  for (const char* a : {"the ", "a ", "an "}) {
    if (s.rfind(a, 0) == 0) return s.substr(std::char_traits<char>::length(a));
  }
  return s;
}

inline std::optional<int> ordinal(std::string_view w) {
  static const char* const kWords[] = {"first", "second", "third", "fourth", "fifth",
                                       "sixth", "seventh", "eighth", "ninth", "tenth"};
  for (int i = 0; i < 10; ++i) {
    if (w == kWords[i]) return i;
  }
  if (w == "last") return -1;
  return std::nullopt;
}

// Resolves a selector to one element id.
inline std::string resolve(const Layout& layout, std::string text) {
  text = strip_article(std::string(trim(text)));
  if (!text.empty() && text.front() == '#') {
    const std::string id = text.substr(1);
    if (!layout.find(id)) {
      throw Error(ErrorCode::kSelectorNotFound, "no element with id '" + id + "'");
    }
    return id;
  }
  std::optional<int> ord;
  const auto space = text.find(' ');
  if (space != std::string::npos) {
    ord = ordinal(text.substr(0, space));
    if (ord) text = text.substr(space + 1);
  }
  const std::string want = normalize_label(strip_quotes(text));
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (normalize_label(strip_quotes(layout.elements[i].label)) == want) hits.push_back(i);
  }
  if (hits.empty()) throw Error(ErrorCode::kSelectorNotFound, "no element labelled '" + text + "'");
  if (!ord) {
    if (hits.size() > 1) {
      throw Error(ErrorCode::kAmbiguousSelector,
                  std::to_string(hits.size()) + " elements are labelled '" + text +
                      "'; add an ordinal such as 'the first " + text + "'");
    }
    return layout.elements[hits[0]].id;
  }
  const std::size_t k = *ord < 0 ? hits.size() - 1 : static_cast<std::size_t>(*ord);
  if (k >= hits.size()) {
    throw Error(ErrorCode::kSelectorNotFound, "fewer elements labelled '" + text + "'");
  }
  return layout.elements[hits[k]].id;
}

inline std::optional<Direction> direction_word(std::string w) {
  for (const char* suffix : {"wards", "ward"}) {
    const std::size_t n = std::char_traits<char>::length(suffix);
    if (w.size() > n && w.compare(w.size() - n, n, suffix) == 0) {
      w.resize(w.size() - n);
      break;
    }
  }
  return direction_from_string(w);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  static const std::regex sep(R"(\s*,\s*(?:and\s+)?|\s+and\s+)");
  std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end;
  for (; it != end; ++it) {
    if (!trim(it->str()).empty()) parts.emplace_back(trim(it->str()));
  }
  return parts;
}

}  // namespace edit_detail

// nullopt when the text is not a deterministic edit. Throws AmbiguousSelector
// or SelectorNotFound when the grammar matches but a selector does not
// resolve to exactly one element.
inline std::optional<EditCommand> parse_edit_command(std::string_view text, const Layout& layout) {
  using namespace edit_detail;
  std::string s(trim(text));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
  s = std::string(trim(s));
  std::string lower = to_lower(s);
  if (lower.rfind("please ", 0) == 0) {
    lower = lower.substr(7);
    s = s.substr(7);
  }
  std::smatch m;
  static const std::string kNum = R"((-?\d+(?:\.\d+)?))";
  static const std::regex move_re(
      R"(^(?:move|shift|slide|nudge)\s+(.+?)\s+(?:to\s+the\s+)?(left|right|up|down|leftwards?|rightwards?|upwards?|downwards?)(?:\s+by\s+(\d+(?:\.\d+)?)\s*(%|px|pixels?|units?)?)?$)");
  static const std::regex swap_re(R"(^swap\s+(.+?)\s+(?:and|with)\s+(.+)$)");
  static const std::regex resize_re(
      R"(^make\s+(.+?)\s+(larger|bigger|smaller)(?:\s+by\s+(\d+(?:\.\d+)?)\s*%)?$)");
  static const std::regex delete_re(R"(^(?:delete|remove)\s+(.+)$)");
  static const std::regex align_re(
      R"(^align\s+(.+?)\s+(?:to\s+the\s+|along\s+the\s+|on\s+the\s+|at\s+the\s+)?(left|right|top|bottom)(?:\s+edges?)?$)");
  static const std::regex add_re("^add\\s+(?:an?\\s+)?(.+?)\\s+at\\s+\\[?\\s*" + kNum +
                                 "\\s*,?\\s*" + kNum + "\\s*,?\\s*" + kNum + "\\s*,?\\s*" +
                                 kNum + "\\s*\\]?$");

  // Selectors are matched on the lower-cased text; labels compare
  // case-insensitively anyway.
  EditCommand cmd;
  if (std::regex_match(lower, m, move_re)) {
    cmd.verb = EditVerb::kMove;
    cmd.targets = {resolve(layout, m[1].str())};
    cmd.direction = *direction_word(m[2].str());
    if (m[3].matched) {
      cmd.magnitude = std::stod(m[3].str());
      cmd.magnitude_is_fraction = m[4].matched && m[4].str() == "%";
      if (cmd.magnitude_is_fraction) *cmd.magnitude /= 100.0;
    }
    return cmd;
  }
  if (std::regex_match(lower, m, swap_re)) {
    cmd.verb = EditVerb::kSwap;
    cmd.targets = {resolve(layout, m[1].str()), resolve(layout, m[2].str())};
    return cmd;
  }
  if (std::regex_match(lower, m, resize_re)) {
    cmd.verb = EditVerb::kResize;
    cmd.targets = {resolve(layout, m[1].str())};
    const double p = m[3].matched ? std::stod(m[3].str()) : 10.0;
    cmd.percent = m[2].str() == "smaller" ? -p : p;
    return cmd;
  }
  if (std::regex_match(lower, m, align_re)) {
    cmd.verb = EditVerb::kAlign;
    for (const auto& part : split_list(m[1].str())) cmd.targets.push_back(resolve(layout, part));
    if (cmd.targets.size() < 2) return std::nullopt;
    const std::string e = m[2].str();
    cmd.edge = e == "left" ? Edge::kLeft : e == "right" ? Edge::kRight
             : e == "top"  ? Edge::kTop  : Edge::kBottom;
    return cmd;
  }
  if (std::regex_match(lower, m, add_re)) {
    cmd.verb = EditVerb::kAdd;
    // Keep the label's original case.
    const std::size_t start = static_cast<std::size_t>(m.position(1));
    cmd.label = s.substr(start, static_cast<std::size_t>(m.length(1)));
    cmd.bbox = {std::stod(m[2].str()), std::stod(m[3].str()), std::stod(m[4].str()),
                std::stod(m[5].str())};
    return cmd;
  }
  if (std::regex_match(lower, m, delete_re)) {
    cmd.verb = EditVerb::kDelete;
    cmd.targets = {resolve(layout, m[1].str())};
    return cmd;
  }
  return std::nullopt;
}

namespace edit_detail {

// Largest t >= 0 such that sliding `a` by s in direction d keeps its IoU with
// `b` at or below `cap` for every s in [0, t]. Infinity when unconstrained.
inline double slide_limit(const BBox& a, const BBox& b, Direction d, double cap) {
  const bool horiz = is_horizontal(d);
  double a0 = horiz ? a.left : a.top, a1 = horiz ? a.right : a.bottom;
  double b0 = horiz ? b.left : b.top, b1 = horiz ? b.right : b.bottom;
  const double p0 = horiz ? std::max(a.top, b.top) : std::max(a.left, b.left);
  const double p1 = horiz ? std::min(a.bottom, b.bottom) : std::min(a.right, b.right);
  const double h = p1 - p0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (h <= 0.0) return kInf;
  if (direction_sign(d) < 0) {
    // Mirror so that the move is toward +infinity.
    std::tie(a0, a1) = std::pair{-a1, -a0};
    std::tie(b0, b1) = std::pair{-b1, -b0};
  }
  // IoU <= cap  <=>  intersection <= cap (A + B) / (1 + cap).
  const double max_inter = cap * (a.area() + b.area()) / (1.0 + cap);
  const double max_overlap = max_inter / h;
  if (std::min(a1 - a0, b1 - b0) <= max_overlap) return kInf;
  // Axis overlap is a trapezoid in t; it first exceeds max_overlap on the
  // rising edge, which starts at t = b0 - a1.
  const double t1 = b0 - a1 + max_overlap;
  if (t1 >= -1e-9) return std::max(0.0, t1);
  return kInf;
}

inline double cap_for(const BBox& moving, const BBox& other, double tau_o) {
  return std::max(tau_o, iou(moving, other));
}

inline bool within_caps(const Layout& layout, std::size_t i, const BBox& candidate,
                        const std::vector<double>& caps) {
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (j != i && iou(candidate, layout.elements[j].bbox) > caps[j] + 1e-12) return false;
  }
  return true;
}

inline std::vector<double> caps_for(const Layout& layout, std::size_t i, double tau_o) {
  std::vector<double> caps(layout.size(), 0.0);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (j != i) caps[j] = cap_for(layout.elements[i].bbox, layout.elements[j].bbox, tau_o);
  }
  return caps;
}

// Moves element i by up to `want` units; returns the distance applied.
inline double slide(Layout& layout, std::size_t i, Direction d, double want, double tau_o) {
  const BBox start = layout.elements[i].bbox;
  double t = std::min(want, std::max(0.0, canvas_slack(layout, start, d)));
  const auto caps = caps_for(layout, i, tau_o);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (j != i) t = std::min(t, slide_limit(start, layout.elements[j].bbox, d, caps[j]));
  }
  // Guard against rounding at the blocking point.
  const double step = 1e-9 * std::max(layout.canvas_w, layout.canvas_h);
  for (int k = 0; k < 64 && t > 0.0 && !within_caps(layout, i, shifted(start, d, t), caps); ++k) {
    t = std::max(0.0, t - step * (1 << std::min(k, 20)));
  }
  if (t <= 0.0) return 0.0;
  BBox moved = shifted(start, d, t);
  moved.left = std::clamp(moved.left, 0.0, layout.canvas_w);
  moved.right = std::clamp(moved.right, 0.0, layout.canvas_w);
  moved.top = std::clamp(moved.top, 0.0, layout.canvas_h);
  moved.bottom = std::clamp(moved.bottom, 0.0, layout.canvas_h);
  layout.elements[i].bbox = moved;
  return t;
}

inline BBox scaled(const BBox& b, double f, const Layout& layout) {
  const double cx = b.center_x(), cy = b.center_y();
  const double hw = b.width() * f / 2.0, hh = b.height() * f / 2.0;
  return {std::clamp(cx - hw, 0.0, layout.canvas_w), std::clamp(cy - hh, 0.0, layout.canvas_h),
          std::clamp(cx + hw, 0.0, layout.canvas_w), std::clamp(cy + hh, 0.0, layout.canvas_h)};
}

inline std::size_t index_of(const Layout& layout, const std::string& id) {
  const auto i = layout.find(id);
  if (!i) throw Error(ErrorCode::kSelectorNotFound, "no element with id '" + id + "'");
  return *i;
}

}  // namespace edit_detail

// Applies a command. Moves, resizes and alignment shrink to the largest
// feasible magnitude that keeps every IoU involving the edited element at or
// below max(tau_o, its current value) and the box on the canvas.
inline EditResult apply_edit(const Layout& layout, const EditCommand& cmd, double tau_o = 0.01) {
  using namespace edit_detail;
  EditResult r;
  r.layout = layout;
  Layout& out = r.layout;
  switch (cmd.verb) {
    case EditVerb::kMove: {
      const std::size_t i = index_of(out, cmd.targets.at(0));
      const double extent = is_horizontal(cmd.direction) ? out.canvas_w : out.canvas_h;
      double want = cmd.magnitude.value_or(kDefaultMoveFraction);
      if (!cmd.magnitude || cmd.magnitude_is_fraction) want *= extent;
      if (!(want > 0.0)) throw Error(ErrorCode::kInvalidArgument, "move distance must be positive");
      r.requested = want;
      r.applied = slide(out, i, cmd.direction, want, tau_o);
      if (r.applied <= 0.0) {
        throw Error(ErrorCode::kNoFeasibleMove,
                    "'" + layout.elements[i].label + "' cannot move " +
                        std::string(to_string(cmd.direction)));
      }
      return r;
    }
    case EditVerb::kSwap: {
      const std::size_t a = index_of(out, cmd.targets.at(0));
      const std::size_t b = index_of(out, cmd.targets.at(1));
      std::swap(out.elements[a].bbox, out.elements[b].bbox);
      return r;
    }
    case EditVerb::kResize: {
      const std::size_t i = index_of(out, cmd.targets.at(0));
      const double target = 1.0 + cmd.percent / 100.0;
      if (!(target > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cannot shrink by 100% or more");
      const BBox start = out.elements[i].bbox;
      const auto caps = caps_for(out, i, tau_o);
      auto ok = [&](double f) { return within_caps(out, i, scaled(start, f, out), caps); };
      double f = target;
      if (!ok(f)) {
        double good = 1.0, bad = target;
        for (int k = 0; k < 60; ++k) {
          const double mid = (good + bad) / 2.0;
          (ok(mid) ? good : bad) = mid;
        }
        f = good;
      }
      const BBox result = scaled(start, f, out);
      r.requested = cmd.percent;
      r.applied = (f - 1.0) * 100.0;
      if (result == start || std::abs(f - 1.0) < 1e-9) {
        throw Error(ErrorCode::kNoFeasibleMove,
                    "'" + layout.elements[i].label + "' cannot be resized");
      }
      out.elements[i].bbox = result;
      return r;
    }
    case EditVerb::kDelete: {
      const std::size_t i = index_of(out, cmd.targets.at(0));
      out.elements.erase(out.elements.begin() + static_cast<std::ptrdiff_t>(i));
      return r;
    }
    case EditVerb::kAlign: {
      std::vector<std::size_t> idx;
      for (const auto& id : cmd.targets) idx.push_back(index_of(out, id));
      auto edge_of = [&](const BBox& b) {
        switch (cmd.edge) {
          case Edge::kLeft: return b.left;
          case Edge::kRight: return b.right;
          case Edge::kTop: return b.top;
          case Edge::kBottom: return b.bottom;
        }
        return 0.0;
      };
      const bool toward_min = cmd.edge == Edge::kLeft || cmd.edge == Edge::kTop;
      double goal = edge_of(out.elements[idx[0]].bbox);
      for (std::size_t i : idx) {
        const double e = edge_of(out.elements[i].bbox);
        goal = toward_min ? std::min(goal, e) : std::max(goal, e);
      }
      const Direction d = cmd.edge == Edge::kLeft  ? Direction::kLeft
                        : cmd.edge == Edge::kRight ? Direction::kRight
                        : cmd.edge == Edge::kTop   ? Direction::kUp
                                                   : Direction::kDown;
      for (std::size_t i : idx) {
        const double need = std::abs(edge_of(out.elements[i].bbox) - goal);
        if (need <= 0.0) continue;
        r.requested += need;
        r.applied += slide(out, i, d, need, tau_o);
      }
      if (r.requested > 0.0 && r.applied <= 0.0) {
        throw Error(ErrorCode::kNoFeasibleMove, "no element can move toward the edge");
      }
      return r;
    }
    case EditVerb::kAdd: {
      Element e;
      for (std::size_t n = out.size();; ++n) {
        e.id = "e" + std::to_string(n);
        if (!out.find(e.id)) break;
      }
      e.label = cmd.label;
      e.kind = ElementKind::kVisualObject;
      const BBox b = cmd.bbox;
      if (!b.finite() || b.left > b.right || b.top > b.bottom) {
        throw Error(ErrorCode::kInvalidArgument, "new box must be finite with left <= right");
      }
      e.bbox = {std::clamp(b.left, 0.0, out.canvas_w), std::clamp(b.top, 0.0, out.canvas_h),
                std::clamp(b.right, 0.0, out.canvas_w), std::clamp(b.bottom, 0.0, out.canvas_h)};
      for (const auto& other : out.elements) {
        if (iou(e.bbox, other.bbox) > tau_o) {
          throw Error(ErrorCode::kNoFeasibleMove,
                      "new '" + e.label + "' would overlap '" + other.label + "'");
        }
      }
      out.elements.push_back(std::move(e));
      return r;
    }
  }
  return r;
}

}  // namespace layoutplan
