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

// JSON mappings for layouts, parse outcomes and evaluation reports. Schemas
// are documented in docs/schemas.md.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "layoutplan/codec.hpp"
#include "layoutplan/error.hpp"
#include "layoutplan/geometry.hpp"
#include "layoutplan/metrics.hpp"

namespace layoutplan {

using Json = nlohmann::json;
// Key order is preserved so that files are byte-stable.
using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json(const Element& e) {
  OrderedJson j;
  j["id"] = e.id;
  j["kind"] = std::string(to_string(e.kind));
  j["label"] = e.label;
  j["bbox"] = {e.bbox.left, e.bbox.top, e.bbox.right, e.bbox.bottom};
  if (!e.attrs.empty()) {
    OrderedJson a = OrderedJson::object();
    if (e.attrs.area_fraction) a["area_fraction"] = *e.attrs.area_fraction;
    if (e.attrs.transparent_fraction) a["transparent_fraction"] = *e.attrs.transparent_fraction;
    if (e.attrs.is_crowd) a["is_crowd"] = *e.attrs.is_crowd;
    j["attrs"] = std::move(a);
  }
  return j;
}

inline OrderedJson to_json(const Layout& l) {
  OrderedJson j;
  j["canvas_w"] = l.canvas_w;
  j["canvas_h"] = l.canvas_h;
  j["elements"] = OrderedJson::array();
  for (const auto& e : l.elements) j["elements"].push_back(to_json(e));
  return j;
}

namespace io_detail {

template <typename J>
double number_field(const J& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw Error(ErrorCode::kSchemaError, where + ": missing numeric '" + key + "'");
  }
  return j[key].template get<double>();
}

}  // namespace io_detail

template <typename J>
Element element_from_json(const J& j, const std::string& where = "element") {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, where + ": expected an object");
  Element e;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw Error(ErrorCode::kSchemaError, where + ": id must be a string");
    e.id = j["id"].template get<std::string>();
  }
  if (j.contains("kind")) {
    auto k = j["kind"].is_string()
                 ? element_kind_from_string(j["kind"].template get<std::string>())
                 : std::nullopt;
    if (!k) throw Error(ErrorCode::kSchemaError, where + ": unknown kind");
    e.kind = *k;
  }
  if (!j.contains("label") || !j["label"].is_string()) {
    throw Error(ErrorCode::kSchemaError, where + ": missing string 'label'");
  }
  e.label = j["label"].template get<std::string>();
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) {
    throw Error(ErrorCode::kSchemaError, where + ": 'bbox' must be [l, t, r, b]");
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!j["bbox"][i].is_number()) {
      throw Error(ErrorCode::kSchemaError, where + ": non-numeric bbox entry");
    }
    v[i] = j["bbox"][i].template get<double>();
  }
  e.bbox = {v[0], v[1], v[2], v[3]};
  if (j.contains("attrs")) {
    const auto& a = j["attrs"];
    auto fraction = [&](const char* key) -> std::optional<double> {
      if (!a.contains(key)) return std::nullopt;
      const double x = io_detail::number_field(a, key, where);
      if (!(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::kSchemaError, where + ": '" + key + "' outside [0,1]");
      }
      return x;
    };
    e.attrs.area_fraction = fraction("area_fraction");
    e.attrs.transparent_fraction = fraction("transparent_fraction");
    if (a.contains("is_crowd")) {
      if (a["is_crowd"].is_boolean()) {
        e.attrs.is_crowd = a["is_crowd"].template get<bool>();
      } else if (a["is_crowd"].is_number()) {
        e.attrs.is_crowd = a["is_crowd"].template get<double>() != 0.0;
      } else {
        throw Error(ErrorCode::kSchemaError, where + ": bad 'is_crowd'");
      }
    }
  }
  return e;
}

// Accepts {"canvas_w", "canvas_h", "elements"}. Elements without ids get
// e0, e1, ... by position.
template <typename J>
Layout layout_from_json(const J& j, const std::string& where = "layout") {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, where + ": expected an object");
  Layout l;
  l.canvas_w = io_detail::number_field(j, "canvas_w", where);
  l.canvas_h = io_detail::number_field(j, "canvas_h", where);
  if (!j.contains("elements") || !j["elements"].is_array()) {
    throw Error(ErrorCode::kSchemaError, where + ": missing 'elements' array");
  }
  for (std::size_t i = 0; i < j["elements"].size(); ++i) {
    Element e = element_from_json(j["elements"][i], where + ".elements[" + std::to_string(i) + "]");
    if (e.id.empty()) e.id = "e" + std::to_string(i);
    l.elements.push_back(std::move(e));
  }
  return l;
}

inline OrderedJson to_json(const ParseOutcome& o) {
  OrderedJson j;
  j["status"] = o.ok() ? "success" : "failure";
  if (o.ok()) {
    j["layout"] = to_json(*o.layout);
  } else {
    j["failure_reason"] = std::string(to_string(*o.failure));
    j["detail"] = o.detail;
  }
  j["raw_text"] = o.raw_text;
  return j;
}

inline OrderedJson to_json(const ItemDiagnostics& d) {
  OrderedJson j;
  j["id"] = d.id;
  j["status"] = d.ok ? "success" : "failure";
  j["failure_reason"] =
      d.failure ? OrderedJson(std::string(to_string(*d.failure))) : OrderedJson(nullptr);
  j["max_iou"] = d.max_iou;
  j["precision"] = d.prf.precision;
  j["recall"] = d.prf.recall;
  j["f_score"] = d.prf.f_score;
  j["n_gen"] = d.n_gen;
  j["n_ref"] = d.n_ref;
  return j;
}

// Report summary; per-item diagnostics are written separately.
inline OrderedJson to_json(const EvalReport& r) {
  OrderedJson j;
  j["mode"] = std::string(to_string(r.mode));
  j["fid"] = r.fid ? OrderedJson(*r.fid) : OrderedJson(nullptr);
  j["max_iou"] = r.max_iou;
  j["max_iou_success"] = r.max_iou_success;
  j["fail_percent"] = r.fail_percent;
  j["fail_percent_text"] = format_percent(r.fail_percent);
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f_score"] = r.f_score;
  j["f_score_item_mean"] = r.f_score_item_mean;
  j["n_generated"] = r.n_generated;
  j["n_reference"] = r.n_reference;
  j["n_success"] = r.n_success;
  return j;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSchemaError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << content;
}

// One JSON value per non-blank line; SchemaError names the offending line.
inline std::vector<Json> read_jsonl(const std::string& path) {
  std::vector<Json> out;
  const std::string text = read_file(path);
  std::size_t lineno = 0;
  for (auto line : split_lines(text)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kSchemaError,
                  path + ":" + std::to_string(lineno) + ": malformed JSON");
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace layoutplan
