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

// Layout data model and axis-aligned box geometry.
//
// Coordinates are ltrb (left, top, right, bottom) in canvas units with the
// origin at the top-left corner and y growing downwards. Zero-area boxes are
// legal values; they have IoU 0 against everything, including themselves.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "layoutplan/error.hpp"

namespace layoutplan {

inline constexpr double kDefaultCanvasSide = 128.0;

struct BBox {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  double center_x() const { return 0.5 * (left + right); }
  double center_y() const { return 0.5 * (top + bottom); }

  bool finite() const {
    return std::isfinite(left) && std::isfinite(top) && std::isfinite(right) &&
           std::isfinite(bottom);
  }

  BBox translated(double dx, double dy) const {
    return {left + dx, top + dy, right + dx, bottom + dy};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class ElementKind {
  kVisualObject,
  kTextSpan,
  kImageAsset,
  kVectorAsset,
  kBackground,
};

inline std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::kVisualObject: return "visual-object";
    case ElementKind::kTextSpan: return "text-span";
    case ElementKind::kImageAsset: return "image-asset";
    case ElementKind::kVectorAsset: return "vector-asset";
    case ElementKind::kBackground: return "background";
  }
  return "visual-object";
}

inline std::optional<ElementKind> element_kind_from_string(std::string_view s) {
  if (s == "visual-object") return ElementKind::kVisualObject;
  if (s == "text-span") return ElementKind::kTextSpan;
  if (s == "image-asset") return ElementKind::kImageAsset;
  if (s == "vector-asset") return ElementKind::kVectorAsset;
  if (s == "background") return ElementKind::kBackground;
  return std::nullopt;
}

struct ElementAttrs {
  std::optional<double> area_fraction;
  std::optional<double> transparent_fraction;
  std::optional<bool> is_crowd;

  bool empty() const {
    return !area_fraction && !transparent_fraction && !is_crowd;
  }

  friend bool operator==(const ElementAttrs&, const ElementAttrs&) = default;
};

struct Element {
  std::string id;
  ElementKind kind = ElementKind::kVisualObject;
  std::string label;
  BBox bbox;
  ElementAttrs attrs;

  friend bool operator==(const Element&, const Element&) = default;
};

struct Layout {
  double canvas_w = kDefaultCanvasSide;
  double canvas_h = kDefaultCanvasSide;
  std::vector<Element> elements;

  bool empty() const { return elements.empty(); }
  std::size_t size() const { return elements.size(); }
  double canvas_side() const { return std::max(canvas_w, canvas_h); }

  // Index of the element with `id`, if any.
  std::optional<std::size_t> find(std::string_view id) const {
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (elements[i].id == id) return i;
    }
    return std::nullopt;
  }

  friend bool operator==(const Layout&, const Layout&) = default;
};

enum class ViolationCode {
  kOutOfCanvas,
  kInvertedBox,
  kDuplicateId,
  kEmptyLabel,
  kNonFinite,
};

inline std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kOutOfCanvas: return "OutOfCanvas";
    case ViolationCode::kInvertedBox: return "InvertedBox";
    case ViolationCode::kDuplicateId: return "DuplicateId";
    case ViolationCode::kEmptyLabel: return "EmptyLabel";
    case ViolationCode::kNonFinite: return "NonFinite";
  }
  return "Unknown";
}

struct Violation {
  std::optional<std::string> element_id;
  ViolationCode code;
  std::string message;
};

enum class Direction { kLeft, kRight, kUp, kDown };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kLeft: return "left";
    case Direction::kRight: return "right";
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
  }
  return "left";
}

inline std::optional<Direction> direction_from_string(std::string_view s) {
  if (s == "left") return Direction::kLeft;
  if (s == "right") return Direction::kRight;
  if (s == "up") return Direction::kUp;
  if (s == "down") return Direction::kDown;
  return std::nullopt;
}

inline constexpr Direction kAllDirections[] = {
    Direction::kLeft, Direction::kRight, Direction::kUp, Direction::kDown};

inline bool is_horizontal(Direction d) {
  return d == Direction::kLeft || d == Direction::kRight;
}

// +1 when moving in the direction increases the coordinate, -1 otherwise.
inline double direction_sign(Direction d) {
  return (d == Direction::kRight || d == Direction::kDown) ? 1.0 : -1.0;
}

// Box moved by `distance` (>= 0) canvas units in direction `d`.
inline BBox shifted(const BBox& b, Direction d, double distance) {
  const double delta = direction_sign(d) * distance;
  return is_horizontal(d) ? b.translated(delta, 0.0) : b.translated(0.0, delta);
}

// Canvas units available before the box touches the canvas edge in `d`.
inline double canvas_slack(const Layout& layout, const BBox& b, Direction d) {
  switch (d) {
    case Direction::kLeft: return b.left;
    case Direction::kRight: return layout.canvas_w - b.right;
    case Direction::kUp: return b.top;
    case Direction::kDown: return layout.canvas_h - b.bottom;
  }
  return 0.0;
}

inline double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double h = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

// Intersection over union; 0 when the union has zero area.
inline double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

using Matrix = std::vector<std::vector<double>>;

inline Matrix pairwise_iou(const Layout& layout) {
  const std::size_t n = layout.size();
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = iou(layout.elements[i].bbox, layout.elements[i].bbox);
    for (std::size_t j = i + 1; j < n; ++j) {
      m[i][j] = m[j][i] = iou(layout.elements[i].bbox, layout.elements[j].bbox);
    }
  }
  return m;
}

// Largest off-diagonal pairwise IoU, 0 for fewer than two elements.
inline double max_pairwise_iou(const Layout& layout) {
  double best = 0.0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    for (std::size_t j = i + 1; j < layout.size(); ++j) {
      best = std::max(best,
                      iou(layout.elements[i].bbox, layout.elements[j].bbox));
    }
  }
  return best;
}

// Rescales a source image layout so its longest axis spans `target_side` and
// centres the shorter axis. Boxes are in source pixels; the output canvas is
// target_side x target_side.
inline Layout normalize_to_square(double src_w, double src_h,
                                  std::span<const Element> elements,
                                  double target_side = kDefaultCanvasSide) {
  if (!(src_w > 0.0) || !(src_h > 0.0) || !std::isfinite(src_w) ||
      !std::isfinite(src_h)) {
    throw Error(ErrorCode::kDegenerateSource,
                "source extent must be positive, got " + std::to_string(src_w) +
                    "x" + std::to_string(src_h));
  }
  if (!(target_side > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target side must be positive");
  }
  const double longest = std::max(src_w, src_h);
  const double off_x = (target_side - src_w * target_side / longest) / 2.0;
  const double off_y = (target_side - src_h * target_side / longest) / 2.0;
  auto map = [&](double v, double off) {
    return std::clamp(v * target_side / longest + off, 0.0, target_side);
  };

  Layout out;
  out.canvas_w = target_side;
  out.canvas_h = target_side;
  out.elements.reserve(elements.size());
  for (const Element& e : elements) {
    Element n = e;
    n.bbox = {map(e.bbox.left, off_x), map(e.bbox.top, off_y),
              map(e.bbox.right, off_x), map(e.bbox.bottom, off_y)};
    out.elements.push_back(std::move(n));
  }
  return out;
}

inline std::vector<Violation> validate(const Layout& layout) {
  std::vector<Violation> out;
  if (!(layout.canvas_w > 0.0) || !(layout.canvas_h > 0.0) ||
      !std::isfinite(layout.canvas_w) || !std::isfinite(layout.canvas_h)) {
    out.push_back({std::nullopt, ViolationCode::kOutOfCanvas,
                   "canvas extent must be positive and finite"});
  }
  std::unordered_set<std::string> seen;
  for (const Element& e : layout.elements) {
    const BBox& b = e.bbox;
    if (!b.finite()) {
      out.push_back({e.id, ViolationCode::kNonFinite, "non-finite coordinate"});
    } else {
      if (b.left > b.right || b.top > b.bottom) {
        out.push_back({e.id, ViolationCode::kInvertedBox,
                       "left > right or top > bottom"});
      }
      if (b.left < 0.0 || b.top < 0.0 || b.right > layout.canvas_w ||
          b.bottom > layout.canvas_h || b.right < 0.0 || b.bottom < 0.0 ||
          b.left > layout.canvas_w || b.top > layout.canvas_h) {
        out.push_back({e.id, ViolationCode::kOutOfCanvas,
                       "box exceeds the canvas extent"});
      }
    }
    if (e.kind != ElementKind::kBackground && e.label.empty()) {
      out.push_back({e.id, ViolationCode::kEmptyLabel, "label is empty"});
    }
    if (!seen.insert(e.id).second) {
      out.push_back({e.id, ViolationCode::kDuplicateId,
                     "duplicate element id '" + e.id + "'"});
    }
  }
  return out;
}

inline bool is_valid(const Layout& layout) { return validate(layout).empty(); }

// Index of the element whose edge is most extreme in `d`
// (left -> minimal left, right -> maximal right, up -> minimal top,
// down -> maximal bottom). Ties go to the earliest element.
inline std::size_t extremal_index(const Layout& layout, Direction d) {
  if (layout.empty()) {
    throw Error(ErrorCode::kEmptyLayout, "extremal element of empty layout");
  }
  auto key = [d](const BBox& b) {
    switch (d) {
      case Direction::kLeft: return b.left;
      case Direction::kRight: return -b.right;
      case Direction::kUp: return b.top;
      case Direction::kDown: return -b.bottom;
    }
    return 0.0;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < layout.size(); ++i) {
    if (key(layout.elements[i].bbox) < key(layout.elements[best].bbox)) best = i;
  }
  return best;
}

inline std::string extremal_element(const Layout& layout, Direction d) {
  return layout.elements[extremal_index(layout, d)].id;
}

}  // namespace layoutplan
