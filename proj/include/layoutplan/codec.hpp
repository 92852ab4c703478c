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

// Textual layout representations and their strict parsers.
//
//   int128 / int1024   dog: [0, 0, 64, 64]
//   float              dog: [0.000, 0.000, 0.500, 0.500]
//   css128             dog { left: 0px; top: 0px; width: 64px; height: 64px }
//   json               [ {"label": "dog", "left": 0.000, ...}, ... ]
//
// The grammars are documented byte-for-byte in docs/formats.md. Parsing never
// throws: every input maps to a ParseOutcome.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "layoutplan/error.hpp"
#include "layoutplan/geometry.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

enum class FormatVariant { kIntList128, kIntList1024, kFloatList, kCss128, kJsonFloat };

class LayoutFormat {
 public:
  constexpr LayoutFormat() = default;
  constexpr explicit LayoutFormat(FormatVariant v) : variant_(v) {}

  static constexpr LayoutFormat int128() { return LayoutFormat(FormatVariant::kIntList128); }
  static constexpr LayoutFormat int1024() { return LayoutFormat(FormatVariant::kIntList1024); }
  static constexpr LayoutFormat float_list() { return LayoutFormat(FormatVariant::kFloatList); }
  static constexpr LayoutFormat css128() { return LayoutFormat(FormatVariant::kCss128); }
  static constexpr LayoutFormat json_float() { return LayoutFormat(FormatVariant::kJsonFloat); }

  constexpr FormatVariant variant() const { return variant_; }

  // Quantization grid, or nullopt for the float variants.
  constexpr std::optional<int> bins() const {
    switch (variant_) {
      case FormatVariant::kIntList128:
      case FormatVariant::kCss128: return 128;
      case FormatVariant::kIntList1024: return 1024;
      default: return std::nullopt;
    }
  }

  constexpr std::optional<int> decimals() const {
    if (bins()) return std::nullopt;
    return 3;
  }

  constexpr bool is_list() const {
    return variant_ == FormatVariant::kIntList128 ||
           variant_ == FormatVariant::kIntList1024 ||
           variant_ == FormatVariant::kFloatList;
  }

  std::string_view name() const {
    switch (variant_) {
      case FormatVariant::kIntList128: return "int128";
      case FormatVariant::kIntList1024: return "int1024";
      case FormatVariant::kFloatList: return "float";
      case FormatVariant::kCss128: return "css128";
      case FormatVariant::kJsonFloat: return "json";
    }
    return "css128";
  }

  static std::optional<LayoutFormat> from_name(std::string_view name) {
    for (auto v : {FormatVariant::kIntList128, FormatVariant::kIntList1024,
                   FormatVariant::kFloatList, FormatVariant::kCss128,
                   FormatVariant::kJsonFloat}) {
      if (LayoutFormat(v).name() == name) return LayoutFormat(v);
    }
    return std::nullopt;
  }

  friend constexpr bool operator==(LayoutFormat, LayoutFormat) = default;

 private:
  FormatVariant variant_ = FormatVariant::kCss128;
};

inline constexpr LayoutFormat kAllFormats[] = {
    LayoutFormat::int128(), LayoutFormat::int1024(), LayoutFormat::float_list(),
    LayoutFormat::css128(), LayoutFormat::json_float()};

enum class FailureReason {
  kSyntaxError,
  kCoordinateOutOfRange,
  kInvertedBox,
  kMissingField,
  kEmptyOutput,
  kUnknownFormat,
};

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::kSyntaxError: return "SyntaxError";
    case FailureReason::kCoordinateOutOfRange: return "CoordinateOutOfRange";
    case FailureReason::kInvertedBox: return "InvertedBox";
    case FailureReason::kMissingField: return "MissingField";
    case FailureReason::kEmptyOutput: return "EmptyOutput";
    case FailureReason::kUnknownFormat: return "UnknownFormat";
  }
  return "SyntaxError";
}

inline std::optional<FailureReason> failure_reason_from_string(std::string_view s) {
  for (auto r : {FailureReason::kSyntaxError, FailureReason::kCoordinateOutOfRange,
                 FailureReason::kInvertedBox, FailureReason::kMissingField,
                 FailureReason::kEmptyOutput, FailureReason::kUnknownFormat}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

// Result of parsing model output: a layout or a classified failure, plus the
// verbatim text that was parsed.
struct ParseOutcome {
  std::optional<Layout> layout;
  std::optional<FailureReason> failure;
  std::string raw_text;
  // Human-readable locus of the failure ("line 3: ..."), empty on success.
  std::string detail;

  bool ok() const { return layout.has_value(); }

  static ParseOutcome success(Layout l, std::string raw) {
    ParseOutcome o;
    o.layout = std::move(l);
    o.raw_text = std::move(raw);
    return o;
  }
  static ParseOutcome fail(FailureReason r, std::string raw, std::string detail) {
    ParseOutcome o;
    o.failure = r;
    o.raw_text = std::move(raw);
    o.detail = std::move(detail);
    return o;
  }
};

// Round-half-up of x * bins, clamped to [0, bins].
inline int quantize(double x, int bins) {
  constexpr double kSlack = 1e-9;
  if (bins <= 0) throw Error(ErrorCode::kInvalidArgument, "bins must be positive");
  if (!std::isfinite(x) || x < -kSlack || x > 1.0 + kSlack) {
    throw Error(ErrorCode::kOutOfDomain,
                "quantize expects a fraction in [0,1], got " + std::to_string(x));
  }
  const double q = std::floor(x * bins + 0.5);
  return static_cast<int>(std::clamp(q, 0.0, static_cast<double>(bins)));
}

inline double dequantize(int q, int bins) {
  return static_cast<double>(q) / static_cast<double>(bins);
}

// Replaces grammar delimiters so labels never break line framing.
inline std::string escape_label(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  for (char c : label) {
    switch (c) {
      case '{': case '}': case '[': case ']': case ':':
        out.push_back('-');
        break;
      case '\n': case '\r': case '\t':
        out.push_back(' ');
        break;
      default:
        out.push_back(c);
    }
  }
  std::string trimmed(trim(out));
  return trimmed.empty() ? std::string("-") : trimmed;
}

namespace codec_detail {

// Fraction of the canvas extent, clamped against floating spill.
inline double frac(double v, double extent) {
  return std::clamp(v / extent, 0.0, 1.0);
}

inline std::string fixed3(double fraction) {
  const long q = static_cast<long>(
      std::clamp(std::floor(fraction * 1000.0 + 0.5), 0.0, 1000.0));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld.%03ld", q / 1000, q % 1000);
  return buf;
}

}  // namespace codec_detail

inline std::string serialize(const Layout& layout, LayoutFormat fmt) {
  using codec_detail::frac;
  using codec_detail::fixed3;
  const double w = layout.canvas_w;
  const double h = layout.canvas_h;
  std::string out;
  if (layout.empty()) return out;

  if (fmt.variant() == FormatVariant::kJsonFloat) {
    out += "[\n";
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const Element& e = layout.elements[i];
      const BBox& b = e.bbox;
      out += "  {\"label\": ";
      out += nlohmann::json(escape_label(e.label)).dump(-1, ' ', false,
                                                        nlohmann::json::error_handler_t::replace);
      out += ", \"left\": " + fixed3(frac(b.left, w));
      out += ", \"top\": " + fixed3(frac(b.top, h));
      out += ", \"right\": " + fixed3(frac(b.right, w));
      out += ", \"bottom\": " + fixed3(frac(b.bottom, h));
      out += (i + 1 < layout.size()) ? "},\n" : "}\n";
    }
    out += "]\n";
    return out;
  }

  for (const Element& e : layout.elements) {
    const BBox& b = e.bbox;
    const std::string label = escape_label(e.label);
    switch (fmt.variant()) {
      case FormatVariant::kIntList128:
      case FormatVariant::kIntList1024: {
        const int bins = *fmt.bins();
        out += label + ": [" + std::to_string(quantize(frac(b.left, w), bins)) +
               ", " + std::to_string(quantize(frac(b.top, h), bins)) + ", " +
               std::to_string(quantize(frac(b.right, w), bins)) + ", " +
               std::to_string(quantize(frac(b.bottom, h), bins)) + "]\n";
        break;
      }
      case FormatVariant::kFloatList:
        out += label + ": [" + fixed3(frac(b.left, w)) + ", " +
               fixed3(frac(b.top, h)) + ", " + fixed3(frac(b.right, w)) + ", " +
               fixed3(frac(b.bottom, h)) + "]\n";
        break;
      case FormatVariant::kCss128: {
        const int bins = *fmt.bins();
        const int l = quantize(frac(b.left, w), bins);
        const int t = quantize(frac(b.top, h), bins);
        const int r = quantize(frac(b.right, w), bins);
        const int btm = quantize(frac(b.bottom, h), bins);
        out += label + " { left: " + std::to_string(l) + "px; top: " +
               std::to_string(t) + "px; width: " + std::to_string(r - l) +
               "px; height: " + std::to_string(btm - t) + "px }\n";
        break;
      }
      case FormatVariant::kJsonFloat:
        break;
    }
  }
  return out;
}

namespace codec_detail {

struct LineError {
  FailureReason reason;
  std::string detail;
};

// Cursor over one line of text.
class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool consume_word(std::string_view w) {
    skip_ws();
    if (s_.substr(pos_, w.size()) == w) {
      pos_ += w.size();
      return true;
    }
    return false;
  }
  // A signed decimal literal: -?digits(.digits)?
  std::optional<std::string_view> number() {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t p = pos_;
    if (p < s_.size() && (s_[p] == '-' || s_[p] == '+')) ++p;
    const std::size_t digits_start = p;
    while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
    if (p == digits_start) return std::nullopt;
    if (p < s_.size() && s_[p] == '.') {
      ++p;
      const std::size_t frac_start = p;
      while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
      if (p == frac_start) return std::nullopt;
    }
    pos_ = p;
    return s_.substr(start, p - start);
  }
  std::string_view rest() const { return s_.substr(std::min(pos_, s_.size())); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

inline bool is_integer_literal(std::string_view tok) {
  return tok.find('.') == std::string_view::npos;
}

inline double to_double(std::string_view tok) {
  // Literals are ASCII [-+]digits[.digits]; strtod on a bounded copy.
  std::string s(tok);
  return std::strtod(s.c_str(), nullptr);
}

// Fraction-space ltrb box of one element, plus its label.
struct RawBox {
  std::string label;
  double l, t, r, b;
};

inline bool looks_like_css(std::string_view line) {
  const auto open = line.find('{');
  return open != std::string_view::npos &&
         line.find("left", open) != std::string_view::npos;
}

inline bool looks_like_list(std::string_view line) {
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) return false;
  std::string_view rest = trim(line.substr(colon + 1));
  return !rest.empty() && rest.front() == '[';
}

inline std::optional<double> coordinate(std::string_view tok, std::optional<int> bins,
                                        LineError& err) {
  const double v = to_double(tok);
  if (bins) {
    if (!is_integer_literal(tok)) {
      err = {FailureReason::kSyntaxError, "expected an integer coordinate, got '" +
                                              std::string(tok) + "'"};
      return std::nullopt;
    }
    if (v < 0.0 || v > *bins) {
      err = {FailureReason::kCoordinateOutOfRange,
             "coordinate " + std::string(tok) + " outside [0, " +
                 std::to_string(*bins) + "]"};
      return std::nullopt;
    }
    return v / *bins;
  }
  if (v < 0.0 || v > 1.0) {
    err = {FailureReason::kCoordinateOutOfRange,
           "coordinate " + std::string(tok) + " outside [0, 1]"};
    return std::nullopt;
  }
  return v;
}

inline std::optional<LineError> check_box(const RawBox& box) {
  if (box.l > box.r || box.t > box.b) {
    return LineError{FailureReason::kInvertedBox,
                     "inverted box for '" + box.label + "'"};
  }
  return std::nullopt;
}

inline std::variant<RawBox, LineError> parse_list_line(std::string_view line,
                                                       LayoutFormat fmt) {
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) {
    if (looks_like_css(line)) {
      return LineError{FailureReason::kUnknownFormat, "CSS block in a list format"};
    }
    return LineError{FailureReason::kSyntaxError, "missing ':' after label"};
  }
  RawBox box;
  box.label = std::string(trim(line.substr(0, colon)));
  if (looks_like_css(line)) {
    return LineError{FailureReason::kUnknownFormat, "CSS block in a list format"};
  }
  if (box.label.empty()) {
    return LineError{FailureReason::kMissingField, "empty label"};
  }
  Scanner sc(line.substr(colon + 1));
  if (!sc.consume('[')) return LineError{FailureReason::kSyntaxError, "expected '['"};
  std::vector<std::string_view> toks;
  sc.skip_ws();
  if (!sc.consume(']')) {
    while (true) {
      auto tok = sc.number();
      if (!tok) return LineError{FailureReason::kSyntaxError, "expected a number"};
      toks.push_back(*tok);
      if (sc.consume(',')) continue;
      if (sc.consume(']')) break;
      return LineError{FailureReason::kSyntaxError, "expected ',' or ']'"};
    }
  }
  sc.skip_ws();
  if (!sc.at_end()) {
    return LineError{FailureReason::kSyntaxError,
                     "trailing characters '" + std::string(sc.rest()) + "'"};
  }
  if (toks.size() < 4) {
    return LineError{FailureReason::kMissingField,
                     "expected 4 coordinates, got " + std::to_string(toks.size())};
  }
  if (toks.size() > 4) {
    return LineError{FailureReason::kSyntaxError,
                     "expected 4 coordinates, got " + std::to_string(toks.size())};
  }
  const auto bins = fmt.bins();
  if (bins) {
    // Fractional coordinates all within [0,1] are a float list, not a typo.
    bool all_fractional = true;
    for (auto t : toks) {
      const double v = to_double(t);
      if (is_integer_literal(t) || v < 0.0 || v > 1.0) all_fractional = false;
    }
    if (all_fractional) {
      return LineError{FailureReason::kUnknownFormat,
                       "fractional coordinates in an integer format"};
    }
  }
  LineError err{};
  double vals[4];
  for (int i = 0; i < 4; ++i) {
    auto v = coordinate(toks[i], bins, err);
    if (!v) return err;
    vals[i] = *v;
  }
  box.l = vals[0];
  box.t = vals[1];
  box.r = vals[2];
  box.b = vals[3];
  if (auto e = check_box(box)) return *e;
  return box;
}

inline std::variant<RawBox, LineError> parse_css_line(std::string_view line) {
  const auto open = line.find('{');
  if (open == std::string_view::npos) {
    if (looks_like_list(line)) {
      return LineError{FailureReason::kUnknownFormat, "list entry in CSS format"};
    }
    return LineError{FailureReason::kSyntaxError, "missing '{'"};
  }
  RawBox box;
  box.label = std::string(trim(line.substr(0, open)));
  if (box.label.empty()) return LineError{FailureReason::kMissingField, "empty label"};
  const auto close = line.find('}', open);
  if (close == std::string_view::npos) {
    return LineError{FailureReason::kSyntaxError, "missing '}'"};
  }
  if (!trim(line.substr(close + 1)).empty()) {
    return LineError{FailureReason::kSyntaxError, "trailing characters after '}'"};
  }
  std::string_view body = line.substr(open + 1, close - open - 1);
  std::optional<std::string_view> fields[4];  // left, top, width, height
  static constexpr std::string_view kKeys[4] = {"left", "top", "width", "height"};
  std::size_t start = 0;
  while (start <= body.size()) {
    auto semi = body.find(';', start);
    if (semi == std::string_view::npos) semi = body.size();
    std::string_view decl = trim(body.substr(start, semi - start));
    start = semi + 1;
    if (decl.empty()) {
      if (semi >= body.size()) break;
      continue;
    }
    const auto colon = decl.find(':');
    if (colon == std::string_view::npos) {
      return LineError{FailureReason::kSyntaxError,
                       "declaration without ':' ('" + std::string(decl) + "')"};
    }
    std::string_view key = trim(decl.substr(0, colon));
    std::string_view value = trim(decl.substr(colon + 1));
    int slot = -1;
    for (int i = 0; i < 4; ++i) {
      if (kKeys[i] == key) slot = i;
    }
    if (slot < 0) {
      return LineError{FailureReason::kSyntaxError,
                       "unknown property '" + std::string(key) + "'"};
    }
    if (fields[slot]) {
      return LineError{FailureReason::kSyntaxError,
                       "duplicate property '" + std::string(key) + "'"};
    }
    if (value.size() >= 2 && value.substr(value.size() - 2) == "px") {
      value = trim(value.substr(0, value.size() - 2));
    }
    Scanner sc(value);
    auto tok = sc.number();
    sc.skip_ws();
    if (!tok || !sc.at_end()) {
      return LineError{FailureReason::kSyntaxError,
                       "bad value for '" + std::string(key) + "'"};
    }
    if (!is_integer_literal(*tok)) {
      return LineError{FailureReason::kSyntaxError,
                       "expected an integer for '" + std::string(key) + "'"};
    }
    fields[slot] = *tok;
  }
  for (int i = 0; i < 4; ++i) {
    if (!fields[i]) {
      return LineError{FailureReason::kMissingField,
                       "missing property '" + std::string(kKeys[i]) + "'"};
    }
  }
  const double bins = 128.0;
  const double left = to_double(*fields[0]);
  const double top = to_double(*fields[1]);
  const double width = to_double(*fields[2]);
  const double height = to_double(*fields[3]);
  if (width < 0.0 || height < 0.0) {
    return LineError{FailureReason::kInvertedBox,
                     "negative width or height for '" + box.label + "'"};
  }
  if (left < 0.0 || top < 0.0 || left + width > bins || top + height > bins) {
    return LineError{FailureReason::kCoordinateOutOfRange,
                     "box for '" + box.label + "' leaves the 128 canvas"};
  }
  box.l = left / bins;
  box.t = top / bins;
  box.r = (left + width) / bins;
  box.b = (top + height) / bins;
  return box;
}

inline std::variant<std::vector<RawBox>, LineError> parse_json_text(std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    for (auto line : split_lines(text)) {
      line = trim(line);
      if (line.empty() || line.front() == '[' || line.front() == '{') continue;
      if (looks_like_list(line) || looks_like_css(line)) {
        return LineError{FailureReason::kUnknownFormat, "line format in a JSON format"};
      }
    }
    return LineError{FailureReason::kSyntaxError, "malformed JSON"};
  }
  if (!doc.is_array()) return LineError{FailureReason::kSyntaxError, "expected a JSON array"};
  std::vector<RawBox> boxes;
  static constexpr const char* kCoords[4] = {"left", "top", "right", "bottom"};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "element " + std::to_string(i);
    if (!item.is_object()) {
      return LineError{FailureReason::kSyntaxError, where + ": expected an object"};
    }
    RawBox box;
    if (!item.contains("label")) {
      return LineError{FailureReason::kMissingField, where + ": missing 'label'"};
    }
    if (!item["label"].is_string()) {
      return LineError{FailureReason::kSyntaxError, where + ": label must be a string"};
    }
    box.label = std::string(trim(item["label"].get<std::string>()));
    if (box.label.empty()) {
      return LineError{FailureReason::kMissingField, where + ": empty label"};
    }
    double vals[4];
    for (int k = 0; k < 4; ++k) {
      if (!item.contains(kCoords[k])) {
        return LineError{FailureReason::kMissingField,
                         where + ": missing '" + kCoords[k] + "'"};
      }
      const auto& v = item[kCoords[k]];
      if (!v.is_number()) {
        return LineError{FailureReason::kSyntaxError,
                         where + ": '" + kCoords[k] + "' must be a number"};
      }
      vals[k] = v.get<double>();
      if (!(vals[k] >= 0.0 && vals[k] <= 1.0)) {
        return LineError{FailureReason::kCoordinateOutOfRange,
                         where + ": '" + kCoords[k] + "' outside [0, 1]"};
      }
    }
    box.l = vals[0];
    box.t = vals[1];
    box.r = vals[2];
    box.b = vals[3];
    if (auto e = check_box(box)) return *e;
    boxes.push_back(std::move(box));
  }
  return boxes;
}

// Drops surrounding blank lines and one enclosing pair of code-fence lines.
inline std::vector<std::string_view> strip_wrapping(std::string_view text) {
  auto lines = split_lines(text);
  auto trim_blank = [&lines] {
    while (!lines.empty() && trim(lines.front()).empty()) lines.erase(lines.begin());
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  };
  trim_blank();
  if (lines.size() >= 2 && trim(lines.front()).starts_with("```") &&
      trim(lines.back()) == "```") {
    lines.erase(lines.begin());
    lines.pop_back();
    trim_blank();
  }
  return lines;
}

}  // namespace codec_detail

// Parses model output in `fmt` onto a canvas_w x canvas_h canvas. Elements are
// given ids e0, e1, ... in order of appearance and kind `kind`.
inline ParseOutcome parse(std::string_view text, LayoutFormat fmt, double canvas_w,
                          double canvas_h,
                          ElementKind kind = ElementKind::kVisualObject) {
  using namespace codec_detail;
  std::string raw(text);
  if (!(canvas_w > 0.0) || !(canvas_h > 0.0)) {
    return ParseOutcome::fail(FailureReason::kUnknownFormat, std::move(raw),
                              "canvas extent must be positive");
  }
  const auto lines = strip_wrapping(text);
  if (lines.empty()) {
    return ParseOutcome::fail(FailureReason::kEmptyOutput, std::move(raw),
                              "no content after stripping");
  }

  std::vector<RawBox> boxes;
  if (fmt.variant() == FormatVariant::kJsonFloat) {
    std::string body;
    for (auto l : lines) {
      body.append(l);
      body.push_back('\n');
    }
    auto res = parse_json_text(body);
    if (auto* err = std::get_if<LineError>(&res)) {
      return ParseOutcome::fail(err->reason, std::move(raw), err->detail);
    }
    boxes = std::move(std::get<std::vector<RawBox>>(res));
  } else {
    const std::string_view first = trim(lines.front());
    if (first.starts_with('[') || first.starts_with('{')) {
      std::string body;
      for (auto l : lines) {
        body.append(l);
        body.push_back('\n');
      }
      if (nlohmann::json::accept(body)) {
        return ParseOutcome::fail(FailureReason::kUnknownFormat, std::move(raw),
                                  "JSON document in a line format");
      }
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      auto res = fmt.variant() == FormatVariant::kCss128 ? parse_css_line(lines[i])
                                                         : parse_list_line(lines[i], fmt);
      if (auto* err = std::get_if<LineError>(&res)) {
        return ParseOutcome::fail(err->reason, std::move(raw),
                                  "line " + std::to_string(i + 1) + ": " + err->detail);
      }
      boxes.push_back(std::move(std::get<RawBox>(res)));
    }
  }

  Layout layout;
  layout.canvas_w = canvas_w;
  layout.canvas_h = canvas_h;
  layout.elements.reserve(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    Element e;
    e.id = "e" + std::to_string(i);
    e.kind = kind;
    e.label = std::move(boxes[i].label);
    e.bbox = {boxes[i].l * canvas_w, boxes[i].t * canvas_h, boxes[i].r * canvas_w,
              boxes[i].b * canvas_h};
    layout.elements.push_back(std::move(e));
  }
  return ParseOutcome::success(std::move(layout), std::move(raw));
}

// Largest per-coordinate deviation, as a fraction of the canvas extent, after
// a serialize/parse round trip. Infinity if the round trip fails to parse.
inline double roundtrip_error(const Layout& layout, LayoutFormat fmt) {
  const ParseOutcome back =
      parse(serialize(layout, fmt), fmt, layout.canvas_w, layout.canvas_h);
  if (layout.empty()) return 0.0;
  if (!back.ok() || back.layout->size() != layout.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const BBox& a = layout.elements[i].bbox;
    const BBox& b = back.layout->elements[i].bbox;
    worst = std::max({worst, std::abs(a.left - b.left) / layout.canvas_w,
                      std::abs(a.right - b.right) / layout.canvas_w,
                      std::abs(a.top - b.top) / layout.canvas_h,
                      std::abs(a.bottom - b.bottom) / layout.canvas_h});
  }
  return worst;
}

}  // namespace layoutplan
