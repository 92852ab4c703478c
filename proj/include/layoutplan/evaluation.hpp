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

// Loading evaluation inputs from JSONL files.
//
// Reference lines: {"id", "layout": <layout object>} or {"id", "target":
// <serialized text>, "format", "canvas_w"?, "canvas_h"?}. Pipeline output
// lines carry both and "layout" wins.
// Generated lines: {"id", "output": <raw model text>}. Each output is parsed
// in the format and canvas of its reference.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "layoutplan/codec.hpp"
#include "layoutplan/embedding.hpp"
#include "layoutplan/io.hpp"
#include "layoutplan/metrics.hpp"

namespace layoutplan {

struct EvalInputs {
  std::vector<GeneratedItem> generated;
  std::vector<ReferenceItem> references;
};

namespace eval_detail {

inline std::string string_field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kSchemaError, where + ": missing string '" + key + "'");
  }
  return j[key].get<std::string>();
}

struct RefInfo {
  LayoutFormat format;
  double canvas_w;
  double canvas_h;
};

}  // namespace eval_detail

// `fallback` is the format for references that carry no "format" field.
inline EvalInputs parse_eval_inputs(const std::vector<Json>& gen_lines,
                                    const std::vector<Json>& ref_lines,
                                    LayoutFormat fallback = LayoutFormat::int128()) {
  using namespace eval_detail;
  EvalInputs in;
  std::map<std::string, RefInfo> info;
  for (std::size_t n = 0; n < ref_lines.size(); ++n) {
    const Json& j = ref_lines[n];
    const std::string where = "reference line " + std::to_string(n + 1);
    ReferenceItem r;
    r.id = string_field(j, "id", where);
    LayoutFormat fmt = fallback;
    if (j.contains("format")) {
      const auto f = LayoutFormat::from_name(string_field(j, "format", where));
      if (!f) throw Error(ErrorCode::kSchemaError, where + ": unknown format");
      fmt = *f;
    }
    if (j.contains("layout")) {
      r.layout = layout_from_json(j["layout"], where + ".layout");
    } else {
      const double w = j.contains("canvas_w") && j["canvas_w"].is_number()
                           ? j["canvas_w"].get<double>() : kDefaultCanvasSide;
      const double h = j.contains("canvas_h") && j["canvas_h"].is_number()
                           ? j["canvas_h"].get<double>() : kDefaultCanvasSide;
      ParseOutcome o = parse(string_field(j, "target", where), fmt, w, h);
      if (!o.ok()) {
        throw Error(ErrorCode::kSchemaError, where + ": target does not parse (" + o.detail + ")");
      }
      r.layout = std::move(*o.layout);
    }
    info.insert_or_assign(r.id, RefInfo{fmt, r.layout.canvas_w, r.layout.canvas_h});
    in.references.push_back(std::move(r));
  }
  for (std::size_t n = 0; n < gen_lines.size(); ++n) {
    const Json& j = gen_lines[n];
    const std::string where = "generated line " + std::to_string(n + 1);
    GeneratedItem g;
    g.id = string_field(j, "id", where);
    const std::string output = string_field(j, "output", where);
    const auto it = info.find(g.id);
    // Unmatched ids are reported by evaluate_corpus as alignment errors.
    const RefInfo ri = it != info.end() ? it->second
                                        : RefInfo{fallback, kDefaultCanvasSide, kDefaultCanvasSide};
    g.outcome = parse(output, ri.format, ri.canvas_w, ri.canvas_h);
    in.generated.push_back(std::move(g));
  }
  return in;
}

inline EvalReport evaluate_files(const std::string& gen_path, const std::string& ref_path,
                                 MatchMode mode, LayoutFormat fallback = LayoutFormat::int128(),
                                 unsigned workers = 1,
                                 const EmbeddingProvider* provider = nullptr) {
  const EvalInputs in = parse_eval_inputs(read_jsonl(gen_path), read_jsonl(ref_path), fallback);
  const TrigramEmbedding trigrams;
  return evaluate_corpus(in.generated, in.references, mode, provider ? *provider : trigrams, {},
                         workers);
}

}  // namespace layoutplan
