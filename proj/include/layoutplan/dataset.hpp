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

// Instruction dataset construction: source ingestion, filtering rules, design
// preprocessing, layout-shift augmentation and prompt pairing for text
// layouts.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "layoutplan/codec.hpp"
#include "layoutplan/error.hpp"
#include "layoutplan/geometry.hpp"
#include "layoutplan/io.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

enum class SourceKind { kCoco, kCrello, kVisualText };

inline std::string_view to_string(SourceKind s) {
  switch (s) {
    case SourceKind::kCoco: return "coco";
    case SourceKind::kCrello: return "crello";
    case SourceKind::kVisualText: return "visual_text";
  }
  return "coco";
}

inline std::optional<SourceKind> source_kind_from_string(std::string_view s) {
  if (s == "coco") return SourceKind::kCoco;
  if (s == "crello") return SourceKind::kCrello;
  if (s == "visual_text") return SourceKind::kVisualText;
  return std::nullopt;
}

struct SourceRecord {
  std::string id;
  SourceKind source = SourceKind::kCoco;
  double image_w = 0.0;
  double image_h = 0.0;
  // Boxes in source pixels, ltrb.
  std::vector<Element> elements;
  std::vector<std::string> captions;
  std::vector<std::string> ocr_words;
  // Open-vocabulary replacement label per element, or empty when the source
  // supplied none. Either empty or the same length as `elements`.
  std::vector<std::string> aug_labels;
};

struct FilterConfig {
  double tau_a = 0.1;
  double tau_l = 0.2;
  double tau_o = 0.01;
  double crello_min_area = 0.01;
  double crello_max_transparent = 0.70;
  int crello_max_elements = 10;
  int max_ocr_words = 10;
  double canvas_side = kDefaultCanvasSide;
  // Lower bound on a shift distance as a fraction of the canvas extent.
  double shift_min_fraction = 0.05;

  void check() const {
    auto unit = [](double v, const char* name) {
      if (!(v > 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in (0, 1]");
      }
    };
    unit(tau_a, "tau_a");
    unit(tau_l, "tau_l");
    unit(tau_o, "tau_o");
    unit(crello_min_area, "crello_min_area");
    unit(crello_max_transparent, "crello_max_transparent");
    unit(shift_min_fraction, "shift_min_fraction");
    if (crello_max_elements <= 0 || max_ocr_words <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "element and word limits must be positive");
    }
    if (!(canvas_side > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "canvas_side must be positive");
    }
  }
};

enum class Task { kLayoutPlanning, kKeywordsAug, kLayoutShift, kTextSplit };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::kLayoutPlanning: return "layout_planning";
    case Task::kKeywordsAug: return "keywords_aug";
    case Task::kLayoutShift: return "layout_shift";
    case Task::kTextSplit: return "text_split";
  }
  return "layout_planning";
}

struct ShiftInstruction {
  std::string element_id;
  Direction direction = Direction::kLeft;
  double distance = 0.0;
  std::string instruction_text;
};

struct InstructionRecord {
  std::string id;
  Task task = Task::kLayoutPlanning;
  std::string prompt;
  Layout target_layout;
  LayoutFormat format = LayoutFormat::int128();
  std::string source_id;
  SourceKind source = SourceKind::kCoco;
  std::uint64_t seed = 0;
  std::optional<ShiftInstruction> shift;
  std::vector<std::string> merged_ids;
};

struct IngestResult {
  std::vector<SourceRecord> records;
  std::size_t skipped = 0;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace dataset_detail {

// Reads [x, y, w, h]; nullopt when malformed.
inline std::optional<BBox> xywh(const Json& j) {
  if (!j.is_array() || j.size() != 4) return std::nullopt;
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) return std::nullopt;
    v[i] = j[i].get<double>();
    if (!std::isfinite(v[i])) return std::nullopt;
  }
  if (v[2] < 0.0 || v[3] < 0.0) return std::nullopt;
  return BBox{v[0], v[1], v[0] + v[2], v[1] + v[3]};
}

inline std::optional<double> positive(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) return std::nullopt;
  const double v = j[key].get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::string> id_string(const Json& j) {
  if (!j.contains("id")) return std::nullopt;
  if (j["id"].is_string()) return j["id"].get<std::string>();
  if (j["id"].is_number_integer()) return std::to_string(j["id"].get<std::int64_t>());
  return std::nullopt;
}

inline std::optional<double> fraction(const Json& j, const char* key, bool& bad) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number()) {
    bad = true;
    return std::nullopt;
  }
  const double v = j[key].get<double>();
  if (!(v >= 0.0 && v <= 1.0)) bad = true;
  return v;
}

inline std::vector<std::string> string_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  if (j[key].is_string()) {
    out.push_back(j[key].get<std::string>());
  } else if (j[key].is_array()) {
    for (const auto& s : j[key]) {
      if (s.is_string()) out.push_back(s.get<std::string>());
    }
  }
  return out;
}

inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

inline std::optional<ElementKind> crello_kind(std::string_view s) {
  if (auto k = element_kind_from_string(s)) return k;
  if (s == "text" || s == "textElement") return ElementKind::kTextSpan;
  if (s == "image" || s == "imageElement") return ElementKind::kImageAsset;
  if (s == "svg" || s == "svgElement" || s == "vector") return ElementKind::kVectorAsset;
  return std::nullopt;
}

}  // namespace dataset_detail

// COCO-style annotation document: images[], annotations[] (bbox as xywh,
// category_id, iscrowd, optional aug_label) and categories[]. Images with a
// malformed entry or a malformed annotation are skipped and counted.
inline IngestResult ingest_coco_text(std::string_view text, const std::string& where = "coco") {
  using namespace dataset_detail;
  IngestResult result;
  if (trim(text).empty()) return result;
  const Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kSchemaError, where + ": not a JSON object");
  }
  if (!doc.contains("images") || !doc["images"].is_array()) {
    throw Error(ErrorCode::kSchemaError, where + ": missing 'images' array");
  }
  std::unordered_map<std::int64_t, std::string> categories;
  if (doc.contains("categories") && doc["categories"].is_array()) {
    for (const auto& c : doc["categories"]) {
      if (c.is_object() && c.contains("id") && c["id"].is_number_integer() &&
          c.contains("name") && c["name"].is_string()) {
        categories[c["id"].get<std::int64_t>()] = c["name"].get<std::string>();
      }
    }
  }

  std::vector<SourceRecord> records;
  std::vector<char> bad;
  std::unordered_map<std::string, std::size_t> by_id;
  for (const auto& img : doc["images"]) {
    SourceRecord r;
    r.source = SourceKind::kCoco;
    const auto id = img.is_object() ? id_string(img) : std::nullopt;
    const auto w = img.is_object() ? positive(img, "width") : std::nullopt;
    const auto h = img.is_object() ? positive(img, "height") : std::nullopt;
    if (!id || !w || !h || by_id.count(*id)) {
      ++result.skipped;
      continue;
    }
    r.id = *id;
    r.image_w = *w;
    r.image_h = *h;
    r.captions = string_list(img, "captions");
    if (r.captions.empty()) r.captions = string_list(img, "caption");
    by_id[r.id] = records.size();
    records.push_back(std::move(r));
    bad.push_back(0);
  }

  std::vector<std::vector<std::string>> aug(records.size());
  std::vector<char> any_aug(records.size(), 0);
  if (doc.contains("annotations") && doc["annotations"].is_array()) {
    for (const auto& a : doc["annotations"]) {
      if (!a.is_object() || !a.contains("image_id")) continue;
      std::string image_id;
      if (a["image_id"].is_string()) {
        image_id = a["image_id"].get<std::string>();
      } else if (a["image_id"].is_number_integer()) {
        image_id = std::to_string(a["image_id"].get<std::int64_t>());
      } else {
        continue;
      }
      const auto it = by_id.find(image_id);
      if (it == by_id.end()) continue;
      const std::size_t idx = it->second;
      SourceRecord& r = records[idx];
      const auto box = a.contains("bbox") ? xywh(a["bbox"]) : std::nullopt;
      std::optional<std::string> label;
      if (a.contains("category_id") && a["category_id"].is_number_integer()) {
        const auto c = categories.find(a["category_id"].get<std::int64_t>());
        if (c != categories.end()) label = c->second;
      }
      if (!box || !label) {
        bad[idx] = 1;
        continue;
      }
      Element e;
      e.id = id_string(a).value_or("a" + std::to_string(r.elements.size()));
      e.kind = ElementKind::kVisualObject;
      e.label = *label;
      e.bbox = *box;
      if (a.contains("iscrowd")) {
        if (a["iscrowd"].is_boolean()) {
          e.attrs.is_crowd = a["iscrowd"].get<bool>();
        } else if (a["iscrowd"].is_number()) {
          e.attrs.is_crowd = a["iscrowd"].get<double>() != 0.0;
        } else {
          bad[idx] = 1;
        }
      }
      std::string augmented;
      if (a.contains("aug_label") && a["aug_label"].is_string()) {
        augmented = a["aug_label"].get<std::string>();
        any_aug[idx] = 1;
      }
      aug[idx].push_back(std::move(augmented));
      r.elements.push_back(std::move(e));
    }
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (bad[i]) {
      ++result.skipped;
      continue;
    }
    // Augmented labels count only when every element carries one.
    if (any_aug[i] &&
        std::none_of(aug[i].begin(), aug[i].end(), [](const auto& s) { return s.empty(); })) {
      records[i].aug_labels = std::move(aug[i]);
    }
    result.records.push_back(std::move(records[i]));
  }
  return result;
}

// One design per object: {id, canvas_w, canvas_h, description?, elements:
// [{id?, kind, label, bbox: xywh, area_fraction?, transparent_fraction?}]}.
inline std::optional<SourceRecord> crello_record(const Json& j) {
  using namespace dataset_detail;
  if (!j.is_object()) return std::nullopt;
  const auto id = id_string(j);
  const auto w = positive(j, "canvas_w");
  const auto h = positive(j, "canvas_h");
  if (!id || !w || !h || !j.contains("elements") || !j["elements"].is_array()) {
    return std::nullopt;
  }
  SourceRecord r;
  r.id = *id;
  r.source = SourceKind::kCrello;
  r.image_w = *w;
  r.image_h = *h;
  r.captions = string_list(j, "description");
  for (const auto& el : j["elements"]) {
    if (!el.is_object() || !el.contains("label") || !el["label"].is_string()) return std::nullopt;
    const auto box = el.contains("bbox") ? xywh(el["bbox"]) : std::nullopt;
    if (!box) return std::nullopt;
    Element e;
    e.id = id_string(el).value_or("e" + std::to_string(r.elements.size()));
    e.kind = ElementKind::kImageAsset;
    if (el.contains("kind")) {
      const auto k = el["kind"].is_string()
                         ? crello_kind(el["kind"].get<std::string>())
                         : std::nullopt;
      if (!k) return std::nullopt;
      e.kind = *k;
    }
    e.label = el["label"].get<std::string>();
    e.bbox = *box;
    bool bad = false;
    e.attrs.area_fraction = fraction(el, "area_fraction", bad);
    e.attrs.transparent_fraction = fraction(el, "transparent_fraction", bad);
    if (bad) return std::nullopt;
    r.elements.push_back(std::move(e));
  }
  return r;
}

// One text image per object: {id, image_w, image_h, caption, ocr: [{text,
// bbox: xywh}], objects?: [{label, bbox: xywh}], ocr_words?}.
inline std::optional<SourceRecord> visual_text_record(const Json& j) {
  using namespace dataset_detail;
  if (!j.is_object()) return std::nullopt;
  const auto id = id_string(j);
  const auto w = positive(j, "image_w");
  const auto h = positive(j, "image_h");
  if (!id || !w || !h) return std::nullopt;
  SourceRecord r;
  r.id = *id;
  r.source = SourceKind::kVisualText;
  r.image_w = *w;
  r.image_h = *h;
  r.captions = string_list(j, "caption");
  if (r.captions.empty()) return std::nullopt;
  auto add = [&](const Json& list, ElementKind kind, const char* text_key) {
    for (const auto& el : list) {
      if (!el.is_object() || !el.contains(text_key) || !el[text_key].is_string()) return false;
      const auto box = el.contains("bbox") ? xywh(el["bbox"]) : std::nullopt;
      if (!box) return false;
      Element e;
      e.id = (kind == ElementKind::kTextSpan ? "t" : "o") + std::to_string(r.elements.size());
      e.kind = kind;
      e.label = el[text_key].get<std::string>();
      e.bbox = *box;
      r.elements.push_back(std::move(e));
    }
    return true;
  };
  if (j.contains("ocr")) {
    if (!j["ocr"].is_array() || !add(j["ocr"], ElementKind::kTextSpan, "text")) {
      return std::nullopt;
    }
  }
  if (j.contains("objects")) {
    if (!j["objects"].is_array() || !add(j["objects"], ElementKind::kVisualObject, "label")) {
      return std::nullopt;
    }
  }
  if (j.contains("ocr_words")) {
    if (!j["ocr_words"].is_array()) return std::nullopt;
    r.ocr_words = string_list(j, "ocr_words");
  } else {
    for (const auto& e : r.elements) {
      if (e.kind != ElementKind::kTextSpan) continue;
      for (auto& w : split_words(e.label)) r.ocr_words.push_back(std::move(w));
    }
  }
  return r;
}

// Line-delimited records. A line that is not JSON is a SchemaError; a JSON
// value missing mandatory fields is skipped and counted.
inline IngestResult ingest_jsonl_text(std::string_view text, SourceKind kind,
                                      const std::string& where = "input") {
  if (kind == SourceKind::kCoco) {
    throw Error(ErrorCode::kInvalidArgument, "coco input is a single JSON document");
  }
  IngestResult result;
  std::size_t lineno = 0;
  for (auto line : split_lines(text)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kSchemaError,
                  where + ":" + std::to_string(lineno) + ": malformed JSON");
    }
    auto r = kind == SourceKind::kCrello ? crello_record(j) : visual_text_record(j);
    if (r) {
      result.records.push_back(std::move(*r));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

inline IngestResult ingest(const std::string& path, SourceKind kind) {
  const std::string text = read_file(path);
  return kind == SourceKind::kCoco ? ingest_coco_text(text, path)
                                   : ingest_jsonl_text(text, kind, path);
}

// ---------------------------------------------------------------------------
// Filtering rules
// ---------------------------------------------------------------------------

// Positions of the elements that survive object selection.
inline std::vector<std::size_t> selected_indices(const Layout& layout,
                                                 const FilterConfig& cfg = {}) {
  double largest = 0.0;
  for (const auto& e : layout.elements) largest = std::max(largest, e.bbox.area());
  const double min_dim = cfg.tau_l * layout.canvas_side();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const BBox& b = layout.elements[i].bbox;
    if (b.area() < cfg.tau_a * largest) continue;
    if (std::max(b.width(), b.height()) < min_dim) continue;
    keep.push_back(i);
  }
  return keep;
}

// Drops small boxes relative to the largest one and to the canvas side.
inline Layout select_objects(const Layout& layout, const FilterConfig& cfg = {}) {
  Layout out = layout;
  out.elements.clear();
  for (std::size_t i : selected_indices(layout, cfg)) out.elements.push_back(layout.elements[i]);
  return out;
}

inline bool overlap_ok(const Layout& layout, const FilterConfig& cfg = {}) {
  return max_pairwise_iou(layout) <= cfg.tau_o;
}

inline bool crowd_ok(const SourceRecord& record) {
  return std::none_of(record.elements.begin(), record.elements.end(),
                      [](const Element& e) { return e.attrs.is_crowd.value_or(false); });
}

struct CrelloResult {
  std::optional<Layout> layout;  // nullopt when rejected
  std::vector<std::string> merged_ids;
  std::size_t remaining = 0;
};

// Merges tiny and mostly transparent elements into the background and rejects
// designs that still have too many elements. Background elements are kept
// and not counted. The design keeps its own canvas.
inline CrelloResult preprocess_crello(const SourceRecord& record, const FilterConfig& cfg = {}) {
  if (record.source != SourceKind::kCrello) {
    throw Error(ErrorCode::kInvalidArgument, "preprocess_crello expects a crello record");
  }
  CrelloResult result;
  Layout l;
  l.canvas_w = record.image_w;
  l.canvas_h = record.image_h;
  const double canvas_area = record.image_w * record.image_h;
  for (const Element& e : record.elements) {
    if (e.kind != ElementKind::kBackground) {
      const double area = e.attrs.area_fraction.value_or(e.bbox.area() / canvas_area);
      const double transparent = e.attrs.transparent_fraction.value_or(0.0);
      if (area < cfg.crello_min_area || transparent > cfg.crello_max_transparent) {
        result.merged_ids.push_back(e.id);
        continue;
      }
      ++result.remaining;
    }
    Element kept = e;
    kept.bbox = {std::clamp(e.bbox.left, 0.0, l.canvas_w), std::clamp(e.bbox.top, 0.0, l.canvas_h),
                 std::clamp(e.bbox.right, 0.0, l.canvas_w),
                 std::clamp(e.bbox.bottom, 0.0, l.canvas_h)};
    l.elements.push_back(std::move(kept));
  }
  if (result.remaining <= static_cast<std::size_t>(cfg.crello_max_elements)) {
    result.layout = std::move(l);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Layout shift augmentation
// ---------------------------------------------------------------------------

inline constexpr const char* kShiftTemplates[] = {
    "Move the {label} {dir}.",
    "Move the {label} {dir} by {n} units.",
    "Shift the {label} {dir} a little.",
    "Please shift the {label} {n} units {dir}.",
    "Slide the {label} further {dir}.",
    "Nudge the {label} {dir} by about {n}.",
    "Can you move the {label} a bit {dir}?",
    "Place the {label} {n} units further {dir}.",
};

inline std::string fill_template(std::string_view tpl, std::string_view label,
                                 std::string_view dir, std::string_view n) {
  std::string out;
  for (std::size_t i = 0; i < tpl.size();) {
    if (tpl.compare(i, 7, "{label}") == 0) {
      out += label;
      i += 7;
    } else if (tpl.compare(i, 5, "{dir}") == 0) {
      out += dir;
      i += 5;
    } else if (tpl.compare(i, 3, "{n}") == 0) {
      out += n;
      i += 3;
    } else {
      out += tpl[i++];
    }
  }
  return out;
}

struct ShiftResult {
  ShiftInstruction instruction;
  Layout layout;
};

// Whole-unit distances by which element i may move in direction d. A
// distance is feasible when it is at least shift_min_fraction of the canvas
// extent along d, the box stays on the canvas, and the moved box's IoU with
// every other element j stays within
// min(prior max IoU, max(tau_o, prior IoU with j)).
inline std::vector<double> feasible_shift_distances(const Layout& layout, std::size_t i,
                                                    Direction d, const FilterConfig& cfg = {}) {
  const BBox& box = layout.elements.at(i).bbox;
  const double extent = is_horizontal(d) ? layout.canvas_w : layout.canvas_h;
  const double lo = std::max(1.0, std::ceil(cfg.shift_min_fraction * extent - 1e-9));
  const double hi = std::floor(canvas_slack(layout, box, d) + 1e-9);
  std::vector<double> feasible;
  if (hi < lo) return feasible;
  const double prior_max = max_pairwise_iou(layout);
  std::vector<double> caps(layout.size());
  for (std::size_t j = 0; j < layout.size(); ++j) {
    if (j != i) {
      caps[j] = std::min(prior_max, std::max(cfg.tau_o, iou(box, layout.elements[j].bbox)));
    }
  }
  for (double dist = lo; dist <= hi; dist += 1.0) {
    const BBox moved = shifted(box, d, dist);
    bool ok = true;
    for (std::size_t j = 0; j < layout.size() && ok; ++j) {
      if (j != i) ok = iou(moved, layout.elements[j].bbox) <= caps[j];
    }
    if (ok) feasible.push_back(dist);
  }
  return feasible;
}

// Moves one element by a feasible whole-unit distance. (element, direction)
// candidates are tried in seeded order, elements extremal in their direction
// first; NoFeasibleMove only when no candidate has any feasible distance.
inline ShiftResult shift_augment(const Layout& layout, std::uint64_t seed,
                                 const FilterConfig& cfg = {}) {
  if (layout.empty()) throw Error(ErrorCode::kEmptyLayout, "cannot shift an empty layout");
  Rng rng(seed);
  std::vector<std::pair<std::size_t, Direction>> extremal, other;
  for (Direction d : kAllDirections) {
    const std::size_t ext = extremal_index(layout, d);
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (layout.elements[i].kind == ElementKind::kBackground) continue;
      (i == ext ? extremal : other).emplace_back(i, d);
    }
  }
  rng.shuffle(extremal);
  rng.shuffle(other);
  extremal.insert(extremal.end(), other.begin(), other.end());

  for (auto [i, d] : extremal) {
    const auto feasible = feasible_shift_distances(layout, i, d, cfg);
    if (feasible.empty()) continue;
    const double dist = feasible[rng.below(feasible.size())];
    ShiftResult out;
    out.layout = layout;
    const BBox& box = layout.elements[i].bbox;
    BBox& b = out.layout.elements[i].bbox;
    b = shifted(box, d, dist);
    // Clamp away rounding at the canvas edge.
    b.left = std::clamp(b.left, 0.0, layout.canvas_w);
    b.right = std::clamp(b.right, 0.0, layout.canvas_w);
    b.top = std::clamp(b.top, 0.0, layout.canvas_h);
    b.bottom = std::clamp(b.bottom, 0.0, layout.canvas_h);
    const auto& tpl = kShiftTemplates[rng.below(std::size(kShiftTemplates))];
    out.instruction = {layout.elements[i].id, d, dist,
                       fill_template(tpl, layout.elements[i].label, to_string(d),
                                     format_compact(dist))};
    return out;
  }
  throw Error(ErrorCode::kNoFeasibleMove, "no element can move in any direction");
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

inline std::string caption_of(const SourceRecord& record, const Layout& layout) {
  if (!record.captions.empty() && !trim(record.captions.front()).empty()) {
    return std::string(trim(record.captions.front()));
  }
  const auto labels = labels_of(layout);
  return "A picture with " + join(labels, ", ") + ".";
}

inline std::string planning_prompt(std::string_view caption, const Layout& layout) {
  return "Plan a layout for the description below.\nDescription: " + std::string(caption) +
         "\nObjects: " + join(labels_of(layout), ", ");
}

inline std::string graphic_prompt(std::string_view caption, const Layout& layout) {
  std::string p = "Design a " + format_compact(layout.canvas_w) + "x" +
                  format_compact(layout.canvas_h) + " graphic layout.\nDescription: " +
                  std::string(caption) + "\nElements:";
  for (const auto& e : layout.elements) {
    p += "\n- " + std::string(to_string(e.kind)) + " \"" + e.label + "\" " +
         format_compact(std::round(e.bbox.width())) + "x" +
         format_compact(std::round(e.bbox.height()));
  }
  return p;
}

inline std::string shift_prompt(const Layout& before, LayoutFormat fmt,
                                std::string_view instruction) {
  return "Current layout:\n" + serialize(before, fmt) + "Instruction: " +
         std::string(instruction) + "\nReturn the updated layout.";
}

struct TextPromptPair {
  InstructionRecord split;     // keywords given explicitly
  InstructionRecord planning;  // segmentation left to the model
};

// Two prompts over the same target: one lists the keyword split, the other
// gives only the caption.
inline TextPromptPair build_text_prompt_pair(const SourceRecord& record,
                                             const FilterConfig& cfg = {},
                                             LayoutFormat fmt = LayoutFormat::int128()) {
  if (record.source != SourceKind::kVisualText) {
    throw Error(ErrorCode::kInvalidArgument, "text prompt pairs need a visual_text record");
  }
  if (record.ocr_words.size() > static_cast<std::size_t>(cfg.max_ocr_words)) {
    throw Error(ErrorCode::kTooManyWords,
                record.id + ": " + std::to_string(record.ocr_words.size()) + " OCR words");
  }
  Layout target = normalize_to_square(record.image_w, record.image_h, record.elements,
                                      cfg.canvas_side);
  if (record.ocr_words.empty()) {
    std::erase_if(target.elements,
                  [](const Element& e) { return e.kind == ElementKind::kTextSpan; });
  }
  const std::string caption = caption_of(record, target);
  std::vector<std::string> keywords;
  for (const auto& e : target.elements) {
    if (e.kind == ElementKind::kTextSpan) keywords.push_back("\"" + e.label + "\"");
  }
  TextPromptPair pair;
  pair.split.task = Task::kTextSplit;
  pair.split.prompt = "Plan a layout for the description below.\nDescription: " + caption +
                      "\nKeywords: " + (keywords.empty() ? "none" : join(keywords, " | "));
  pair.planning.task = Task::kLayoutPlanning;
  pair.planning.prompt =
      "Plan a layout for the description below. Split any rendered text into "
      "keywords yourself.\nDescription: " + caption;
  for (InstructionRecord* r : {&pair.split, &pair.planning}) {
    r->target_layout = target;
    r->format = fmt;
    r->source_id = record.id;
    r->source = SourceKind::kVisualText;
  }
  return pair;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

// Drop rules in the order they are applied.
inline constexpr const char* kDropRules[] = {
    "degenerate", "no_objects", "overlap", "crowd", "crello_elements", "ocr_words"};

struct PipelineStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::map<std::string, std::size_t> dropped;
  std::map<std::string, std::size_t> emitted;
  // Kept records for which no shift move existed.
  std::size_t shift_unavailable = 0;

  std::size_t dropped_total() const {
    std::size_t n = 0;
    for (const auto& [rule, c] : dropped) n += c;
    return n;
  }
};

struct PipelineOutput {
  std::vector<InstructionRecord> records;
  PipelineStats stats;
};

struct RecordOutcome {
  std::string drop_rule;  // empty when kept
  std::vector<InstructionRecord> records;
  bool shift_unavailable = false;
};

namespace dataset_detail {

inline void emit(RecordOutcome& out, const SourceRecord& src, Task task, std::string prompt,
                 const Layout& target, std::span<const LayoutFormat> formats,
                 std::uint64_t seed) {
  for (LayoutFormat f : formats) {
    InstructionRecord r;
    r.id = src.id + "/" + std::string(to_string(task)) + "/" + std::string(f.name());
    r.task = task;
    r.prompt = prompt;
    r.target_layout = target;
    r.format = f;
    r.source_id = src.id;
    r.source = src.source;
    r.seed = seed;
    out.records.push_back(std::move(r));
  }
}

inline void emit_shift(RecordOutcome& out, const SourceRecord& src, const Layout& layout,
                       std::span<const LayoutFormat> formats, std::uint64_t seed,
                       const FilterConfig& cfg) {
  ShiftResult shift;
  try {
    shift = shift_augment(layout, seed, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoFeasibleMove) throw;
    out.shift_unavailable = true;
    return;
  }
  for (LayoutFormat f : formats) {
    InstructionRecord r;
    r.id = src.id + "/layout_shift/" + std::string(f.name());
    r.task = Task::kLayoutShift;
    r.prompt = shift_prompt(layout, f, shift.instruction.instruction_text);
    r.target_layout = shift.layout;
    r.format = f;
    r.source_id = src.id;
    r.source = src.source;
    r.seed = seed;
    r.shift = shift.instruction;
    out.records.push_back(std::move(r));
  }
}

}  // namespace dataset_detail

// Transforms one source record. Filtering never depends on the seed.
inline RecordOutcome process_record(const SourceRecord& src, const FilterConfig& cfg,
                                    std::span<const LayoutFormat> formats, std::uint64_t seed) {
  using dataset_detail::emit;
  RecordOutcome out;
  const std::uint64_t rec_seed = derive_seed(seed, src.id);
  switch (src.source) {
    case SourceKind::kCoco: {
      Layout norm;
      try {
        norm = normalize_to_square(src.image_w, src.image_h, src.elements, cfg.canvas_side);
      } catch (const Error&) {
        out.drop_rule = "degenerate";
        return out;
      }
      if (!is_valid(norm)) {
        out.drop_rule = "degenerate";
        return out;
      }
      const auto keep = selected_indices(norm, cfg);
      if (keep.empty()) {
        out.drop_rule = "no_objects";
        return out;
      }
      Layout sel = norm;
      sel.elements.clear();
      for (std::size_t i : keep) sel.elements.push_back(norm.elements[i]);
      if (!overlap_ok(sel, cfg)) {
        out.drop_rule = "overlap";
        return out;
      }
      if (!crowd_ok(src)) {
        out.drop_rule = "crowd";
        return out;
      }
      const std::string caption = caption_of(src, sel);
      emit(out, src, Task::kLayoutPlanning, planning_prompt(caption, sel), sel, formats,
           rec_seed);
      if (!src.aug_labels.empty()) {
        Layout aug = sel;
        for (std::size_t k = 0; k < keep.size(); ++k) aug.elements[k].label = src.aug_labels[keep[k]];
        emit(out, src, Task::kKeywordsAug, planning_prompt(caption, aug), aug, formats, rec_seed);
      }
      dataset_detail::emit_shift(out, src, sel, formats, rec_seed, cfg);
      return out;
    }
    case SourceKind::kCrello: {
      if (!(src.image_w > 0.0 && src.image_h > 0.0)) {
        out.drop_rule = "degenerate";
        return out;
      }
      CrelloResult c = preprocess_crello(src, cfg);
      if (!c.layout) {
        out.drop_rule = "crello_elements";
        return out;
      }
      if (!is_valid(*c.layout) || c.remaining == 0) {
        out.drop_rule = c.remaining == 0 ? "no_objects" : "degenerate";
        return out;
      }
      const std::string caption = caption_of(src, *c.layout);
      emit(out, src, Task::kLayoutPlanning, graphic_prompt(caption, *c.layout), *c.layout,
           formats, rec_seed);
      dataset_detail::emit_shift(out, src, *c.layout, formats, rec_seed, cfg);
      for (auto& r : out.records) r.merged_ids = c.merged_ids;
      return out;
    }
    case SourceKind::kVisualText: {
      if (src.ocr_words.size() > static_cast<std::size_t>(cfg.max_ocr_words)) {
        out.drop_rule = "ocr_words";
        return out;
      }
      TextPromptPair pair;
      try {
        pair = build_text_prompt_pair(src, cfg);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSource) throw;
        out.drop_rule = "degenerate";
        return out;
      }
      if (!is_valid(pair.split.target_layout)) {
        out.drop_rule = "degenerate";
        return out;
      }
      emit(out, src, Task::kTextSplit, pair.split.prompt, pair.split.target_layout, formats,
           rec_seed);
      emit(out, src, Task::kLayoutPlanning, pair.planning.prompt, pair.planning.target_layout,
           formats, rec_seed);
      return out;
    }
  }
  return out;
}

// Runs every record through its source's rules. Output order follows input
// order regardless of `workers`.
inline PipelineOutput run_pipeline(std::span<const SourceRecord> records,
                                   const FilterConfig& cfg,
                                   std::span<const LayoutFormat> formats, std::uint64_t seed,
                                   unsigned workers = 1) {
  cfg.check();
  if (formats.empty()) throw Error(ErrorCode::kInvalidArgument, "no output formats given");
  std::vector<RecordOutcome> outcomes(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) {
    outcomes[i] = process_record(records[i], cfg, formats, seed);
  });
  PipelineOutput out;
  out.stats.input = records.size();
  for (const char* rule : kDropRules) out.stats.dropped[rule] = 0;
  for (auto& o : outcomes) {
    if (!o.drop_rule.empty()) {
      ++out.stats.dropped[o.drop_rule];
      continue;
    }
    ++out.stats.kept;
    out.stats.shift_unavailable += o.shift_unavailable;
    for (auto& r : o.records) {
      ++out.stats.emitted[std::string(to_string(r.task))];
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline OrderedJson to_json(const InstructionRecord& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["task"] = std::string(to_string(r.task));
  j["source"] = std::string(to_string(r.source));
  j["source_id"] = r.source_id;
  j["format"] = std::string(r.format.name());
  j["prompt"] = r.prompt;
  j["target"] = serialize(r.target_layout, r.format);
  j["layout"] = to_json(r.target_layout);
  j["seed"] = r.seed;
  if (r.shift) {
    j["shift"] = {{"element_id", r.shift->element_id},
                  {"direction", std::string(to_string(r.shift->direction))},
                  {"distance", r.shift->distance},
                  {"instruction", r.shift->instruction_text}};
  }
  if (!r.merged_ids.empty()) j["merged"] = r.merged_ids;
  return j;
}

// Normalized view of an ingested record; boxes stay in source pixels.
inline OrderedJson to_json(const SourceRecord& r) {
  OrderedJson j;
  j["id"] = r.id;
  j["source"] = std::string(to_string(r.source));
  j["image_w"] = r.image_w;
  j["image_h"] = r.image_h;
  j["elements"] = OrderedJson::array();
  for (const auto& e : r.elements) j["elements"].push_back(to_json(e));
  j["captions"] = r.captions;
  j["ocr_words"] = r.ocr_words;
  j["aug_labels"] = r.aug_labels;
  return j;
}

inline OrderedJson to_json(const PipelineStats& s) {
  OrderedJson j;
  j["input"] = s.input;
  j["kept"] = s.kept;
  OrderedJson dropped = OrderedJson::object();
  for (const char* rule : kDropRules) {
    const auto it = s.dropped.find(rule);
    dropped[rule] = it == s.dropped.end() ? 0 : it->second;
  }
  j["dropped"] = std::move(dropped);
  OrderedJson emitted = OrderedJson::object();
  for (Task t : {Task::kLayoutPlanning, Task::kKeywordsAug, Task::kLayoutShift, Task::kTextSplit}) {
    const auto it = s.emitted.find(std::string(to_string(t)));
    emitted[std::string(to_string(t))] = it == s.emitted.end() ? 0 : it->second;
  }
  j["emitted"] = std::move(emitted);
  j["shift_unavailable"] = s.shift_unavailable;
  return j;
}

inline std::string to_jsonl(std::span<const InstructionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace layoutplan
