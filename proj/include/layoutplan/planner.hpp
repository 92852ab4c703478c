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

#pragma once

#include <string>
#include <vector>

#include "layoutplan/backend.hpp"
#include "layoutplan/codec.hpp"
#include "layoutplan/prompt.hpp"

namespace layoutplan {

struct PlanResult {
  ParseOutcome outcome;  // the final attempt only
  std::vector<ChatMessage> transcript;
  std::string raw_reply;
  int repair_count = 0;
};

inline std::string repair_message(const ParseOutcome& failed) {
  return "The previous answer could not be read (" + std::string(to_string(*failed.failure)) +
         ": " + failed.detail + "). Answer again with the layout only, in the required format.";
}

// Parses a reply in the spec's format and canvas, with kinds set by mode.
inline ParseOutcome parse_reply(std::string_view reply, const PromptSpec& spec) {
  ParseOutcome o = parse(reply, spec.format, spec.canvas_w, spec.canvas_h);
  if (o.ok()) assign_kinds(*o.layout, spec.mode);
  return o;
}

// Sends `messages`, then up to `retry` repair rounds while the reply fails to
// parse. Backend errors propagate.
inline PlanResult converse(std::vector<ChatMessage> messages, const PromptSpec& spec,
                           Backend& backend, int retry) {
  if (retry < 0) throw Error(ErrorCode::kInvalidArgument, "retry must be non-negative");
  PlanResult result;
  for (int attempt = 0;; ++attempt) {
    result.raw_reply = backend.complete(messages);
    messages.push_back({"assistant", result.raw_reply});
    result.outcome = parse_reply(result.raw_reply, spec);
    if (result.outcome.ok() || attempt == retry) break;
    messages.push_back({"user", repair_message(result.outcome)});
    ++result.repair_count;
  }
  result.transcript = std::move(messages);
  return result;
}

inline PlanResult plan_layout(const PromptSpec& spec, std::span<const Demonstration> demos,
                              Backend& backend, int retry = 1) {
  return converse({{"user", build_prompt(spec, demos)}}, spec, backend, retry);
}

// Prompt for a free-form change to an existing layout.
inline std::string revision_prompt(const PromptSpec& spec, const Layout& current,
                                   std::string_view request) {
  std::string p = "You revise layouts. Apply the request to the current layout and answer "
                  "with the full updated layout only.\n";
  p += "Format: " + format_description(spec.format) + ".\n";
  if (spec.mode == PlanMode::kGraphic && spec.format.bins()) {
    p += "Canvas: " + format_compact(spec.canvas_w) + "x" + format_compact(spec.canvas_h) +
         " pixels.\n";
  }
  p += "\nDescription: " + spec.caption + "\nCurrent layout:\n" + serialize(current, spec.format);
  p += "Request: " + std::string(request) + "\nLayout:\n";
  return p;
}

}  // namespace layoutplan
