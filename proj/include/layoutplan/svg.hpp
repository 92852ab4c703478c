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

// Inspection rendering. The canvas frame is a <path> so that the number of
// <rect> nodes equals the number of elements.

#pragma once

#include <algorithm>
#include <string>

#include "layoutplan/geometry.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

inline constexpr const char* kTextStroke = "#2ca02c";
inline constexpr const char* kVisualStroke = "#d62728";

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string render_svg(const Layout& layout) {
  const std::string w = format_compact(layout.canvas_w);
  const std::string h = format_compact(layout.canvas_h);
  const double font = std::max(4.0, std::min(layout.canvas_w, layout.canvas_h) / 24.0);
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
                  "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
  s += "  <path d=\"M0 0H" + w + "V" + h + "H0Z\" fill=\"#ffffff\" stroke=\"#000000\" "
       "stroke-width=\"1\"/>\n";
  for (const auto& e : layout.elements) {
    const char* stroke = e.kind == ElementKind::kTextSpan ? kTextStroke : kVisualStroke;
    const BBox& b = e.bbox;
    s += "  <rect data-id=\"" + xml_escape(e.id) + "\" x=\"" + format_compact(b.left) +
         "\" y=\"" + format_compact(b.top) + "\" width=\"" + format_compact(b.width()) +
         "\" height=\"" + format_compact(b.height()) + "\" fill=\"none\" stroke=\"" + stroke +
         "\" stroke-width=\"1\"/>\n";
    s += "  <text x=\"" + format_compact(b.left + 1.0) + "\" y=\"" +
         format_compact(b.top + font) + "\" font-family=\"sans-serif\" font-size=\"" +
         format_compact(font) + "\" fill=\"" + stroke + "\">" + xml_escape(e.label) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace layoutplan
