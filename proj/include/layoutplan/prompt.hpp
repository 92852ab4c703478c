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

// Prompt specs, demonstrations, demonstration retrieval and the prompt
// template sent to chat backends.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "layoutplan/codec.hpp"
#include "layoutplan/embedding.hpp"
#include "layoutplan/error.hpp"
#include "layoutplan/geometry.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

// Bumped whenever the template text changes.
inline constexpr const char* kPromptTemplateVersion = "1";

enum class PlanMode { kClosed, kOpen, kVisualText, kGraphic };

inline std::string_view to_string(PlanMode m) {
  switch (m) {
    case PlanMode::kClosed: return "closed";
    case PlanMode::kOpen: return "open";
    case PlanMode::kVisualText: return "visual_text";
    case PlanMode::kGraphic: return "graphic";
  }
  return "closed";
}

inline std::optional<PlanMode> plan_mode_from_string(std::string_view s) {
  if (s == "closed") return PlanMode::kClosed;
  if (s == "open") return PlanMode::kOpen;
  if (s == "visual_text") return PlanMode::kVisualText;
  if (s == "graphic") return PlanMode::kGraphic;
  return std::nullopt;
}

struct PromptSpec {
  std::string caption;
  std::optional<std::vector<std::string>> target_elements;
  LayoutFormat format = LayoutFormat::int128();
  PlanMode mode = PlanMode::kClosed;
  double canvas_w = kDefaultCanvasSide;
  double canvas_h = kDefaultCanvasSide;

  void check() const {
    if (!(canvas_w > 0.0) || !(canvas_h > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "canvas must be positive");
    }
  }
};

struct Demonstration {
  std::string prompt_text;
  std::string layout_text;
  std::string source_id;
};

// One retrievable example: its prompt, target layout and embedding.
struct IndexEntry {
  std::string id;
  std::string prompt;
  Layout layout;
  std::vector<double> vector;
};

struct RetrievalIndex {
  std::vector<IndexEntry> entries;
  std::size_t size() const { return entries.size(); }
};

struct CorpusItem {
  std::string id;
  std::string prompt;
  Layout layout;
};

inline RetrievalIndex embed_corpus(std::span<const CorpusItem> corpus,
                                   const EmbeddingProvider& provider) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "retrieval corpus is empty");
  RetrievalIndex index;
  index.entries.reserve(corpus.size());
  for (const auto& item : corpus) {
    IndexEntry e{item.id, item.prompt, item.layout, provider.embed(item.prompt)};
    if (e.vector.size() != provider.dim()) {
      throw Error(ErrorCode::kProviderError, "provider returned a vector of the wrong size");
    }
    index.entries.push_back(std::move(e));
  }
  return index;
}

// The three examples used when no retrieval corpus is consulted.
inline std::vector<CorpusItem> fixed_examples() {
  auto el = [](std::string id, std::string label, double l, double t, double r, double b) {
    Element e;
    e.id = std::move(id);
    e.label = std::move(label);
    e.bbox = {l, t, r, b};
    return e;
  };
  auto layout = [](std::vector<Element> els) {
    Layout l;
    l.elements = std::move(els);
    return l;
  };
  return {
      {"fixed-1", "A dog sitting next to a bicycle on a quiet street.",
       layout({el("e0", "dog", 8, 64, 52, 112), el("e1", "bicycle", 60, 40, 124, 112)})},
      {"fixed-2", "A person flying a kite in an open park.",
       layout({el("e0", "kite", 16, 8, 48, 36), el("e1", "person", 56, 56, 88, 124)})},
      {"fixed-3", "A cup of coffee resting on a wooden bench.",
       layout({el("e0", "cup", 52, 36, 76, 64), el("e1", "bench", 4, 72, 124, 120)})},
  };
}

inline Demonstration to_demonstration(const CorpusItem& item, LayoutFormat fmt) {
  return {item.prompt, serialize(item.layout, fmt), item.id};
}

// Top-k entries by cosine similarity to the query, ties by id. k = 0 selects
// the fixed examples.
inline std::vector<Demonstration> retrieve_demonstrations(std::string_view query,
                                                          const RetrievalIndex& index,
                                                          std::size_t k,
                                                          const EmbeddingProvider& provider,
                                                          LayoutFormat fmt) {
  std::vector<Demonstration> out;
  if (k == 0) {
    for (const auto& item : fixed_examples()) out.push_back(to_demonstration(item, fmt));
    return out;
  }
  const auto q = provider.embed(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    scored.emplace_back(cosine_similarity(q, index.entries[i].vector), i);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return index.entries[a.second].id < index.entries[b.second].id;
  });
  for (std::size_t r = 0; r < std::min(k, scored.size()); ++r) {
    const IndexEntry& e = index.entries[scored[r].second];
    out.push_back({e.prompt, serialize(e.layout, fmt), e.id});
  }
  return out;
}

inline std::string format_description(LayoutFormat fmt) {
  switch (fmt.variant()) {
    case FormatVariant::kIntList128:
    case FormatVariant::kIntList1024:
      return "one element per line as `label: [left, top, right, bottom]` with integer "
             "coordinates from 0 to " + std::to_string(*fmt.bins()) + " on each axis";
    case FormatVariant::kFloatList:
      return "one element per line as `label: [left, top, right, bottom]` with decimal "
             "coordinates from 0 to 1";
    case FormatVariant::kCss128:
      return "one element per line as `label { left: Lpx; top: Tpx; width: Wpx; height: Hpx }` "
             "with integer values on a 128 grid per axis";
    case FormatVariant::kJsonFloat:
      return "a JSON array of objects with keys label, left, top, right, bottom and decimal "
             "coordinates from 0 to 1";
  }
  return "";
}

// Deterministic prompt: instructions, format, canvas size for integer formats
// in graphic mode, demonstrations, then the request.
inline std::string build_prompt(const PromptSpec& spec, std::span<const Demonstration> demos) {
  spec.check();
  std::string p =
      "You plan layouts. Place every element the description needs on the canvas and "
      "answer with the layout only.\n";
  p += "Format: " + format_description(spec.format) + ".\n";
  if (spec.mode == PlanMode::kGraphic && spec.format.bins()) {
    p += "Canvas: " + format_compact(spec.canvas_w) + "x" + format_compact(spec.canvas_h) +
         " pixels.\n";
  }
  if (spec.mode == PlanMode::kVisualText) {
    p += "Write rendered text elements with their words in double quotes.\n";
  }
  if (!demos.empty()) {
    p += "\nExamples:\n";
    for (const auto& d : demos) {
      p += "\nDescription: " + d.prompt_text + "\nLayout:\n" + d.layout_text;
      if (!d.layout_text.empty() && d.layout_text.back() != '\n') p += '\n';
    }
  }
  p += "\nDescription: " + spec.caption + "\n";
  if (spec.target_elements) {
    p += "Elements: " + join(*spec.target_elements, ", ") + "\n";
  }
  p += "Layout:\n";
  return p;
}

// Element kind implied by the planning mode; text in quotes is a text span
// in visual-text mode.
inline void assign_kinds(Layout& layout, PlanMode mode) {
  for (auto& e : layout.elements) {
    if (mode == PlanMode::kGraphic) {
      e.kind = ElementKind::kImageAsset;
    } else if (mode == PlanMode::kVisualText && e.label.size() >= 2 &&
               e.label.front() == '"' && e.label.back() == '"') {
      e.kind = ElementKind::kTextSpan;
    } else {
      e.kind = ElementKind::kVisualObject;
    }
  }
}

}  // namespace layoutplan
