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

// Interactive sessions: an append-only list of revisions per session, with
// steps routed either through the deterministic edit grammar or the chat
// backend. Steps within a session are serialized; sessions are independent.
// With a journal directory each session appends one JSON line per event to
// <dir>/<id>.jsonl, and restore() rebuilds sessions from those files.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "layoutplan/backend.hpp"
#include "layoutplan/edit.hpp"
#include "layoutplan/io.hpp"
#include "layoutplan/planner.hpp"
#include "layoutplan/prompt.hpp"

namespace layoutplan {

enum class RevisionOrigin { kInitial, kBackend, kDeterministicEdit };

inline std::string_view to_string(RevisionOrigin o) {
  switch (o) {
    case RevisionOrigin::kInitial: return "initial";
    case RevisionOrigin::kBackend: return "backend";
    case RevisionOrigin::kDeterministicEdit: return "deterministic-edit";
  }
  return "initial";
}

inline std::optional<RevisionOrigin> revision_origin_from_string(std::string_view s) {
  if (s == "initial") return RevisionOrigin::kInitial;
  if (s == "backend") return RevisionOrigin::kBackend;
  if (s == "deterministic-edit") return RevisionOrigin::kDeterministicEdit;
  return std::nullopt;
}

struct Revision {
  Layout layout;
  std::string message;
  RevisionOrigin origin = RevisionOrigin::kInitial;
  // Deterministic edits: requested and applied magnitude. Backend: repair
  // rounds used.
  double requested = 0.0;
  double applied = 0.0;
  int repair_count = 0;
};

struct StepResult {
  std::size_t revision_index = 0;
  Revision revision;
};

// ---------------------------------------------------------------------------
// JSON mappings
// ---------------------------------------------------------------------------

inline OrderedJson to_json(const PromptSpec& s) {
  OrderedJson j;
  j["caption"] = s.caption;
  j["target_elements"] = s.target_elements ? OrderedJson(*s.target_elements) : OrderedJson(nullptr);
  j["format"] = std::string(s.format.name());
  j["mode"] = std::string(to_string(s.mode));
  j["canvas_w"] = s.canvas_w;
  j["canvas_h"] = s.canvas_h;
  return j;
}

// Only "caption" is required. Defaults: int128, closed, 128 x 128.
template <typename J>
PromptSpec prompt_spec_from_json(const J& j, const std::string& where = "spec") {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, where + ": expected an object");
  PromptSpec s;
  if (!j.contains("caption") || !j["caption"].is_string()) {
    throw Error(ErrorCode::kSchemaError, where + ": missing string 'caption'");
  }
  s.caption = j["caption"].template get<std::string>();
  if (j.contains("target_elements") && !j["target_elements"].is_null()) {
    if (!j["target_elements"].is_array()) {
      throw Error(ErrorCode::kSchemaError, where + ": 'target_elements' must be an array");
    }
    std::vector<std::string> t;
    for (const auto& x : j["target_elements"]) {
      if (!x.is_string()) throw Error(ErrorCode::kSchemaError, where + ": non-string target");
      t.push_back(x.template get<std::string>());
    }
    s.target_elements = std::move(t);
  }
  if (j.contains("format")) {
    const auto f = j["format"].is_string()
                       ? LayoutFormat::from_name(j["format"].template get<std::string>())
                       : std::nullopt;
    if (!f) throw Error(ErrorCode::kSchemaError, where + ": unknown format");
    s.format = *f;
  }
  if (j.contains("mode")) {
    const auto m = j["mode"].is_string()
                       ? plan_mode_from_string(j["mode"].template get<std::string>())
                       : std::nullopt;
    if (!m) throw Error(ErrorCode::kSchemaError, where + ": unknown mode");
    s.mode = *m;
  }
  for (const char* key : {"canvas_w", "canvas_h"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_number()) throw Error(ErrorCode::kSchemaError, where + ": non-numeric canvas");
    (std::string_view(key) == "canvas_w" ? s.canvas_w : s.canvas_h) =
        j[key].template get<double>();
  }
  try {
    s.check();
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchemaError, where + ": " + e.what());
  }
  return s;
}

inline OrderedJson to_json(const Revision& r) {
  OrderedJson j;
  j["origin"] = std::string(to_string(r.origin));
  j["message"] = r.message;
  j["layout"] = to_json(r.layout);
  if (r.origin == RevisionOrigin::kDeterministicEdit) {
    j["requested"] = r.requested;
    j["applied"] = r.applied;
  }
  if (r.origin == RevisionOrigin::kBackend) j["repair_count"] = r.repair_count;
  return j;
}

template <typename J>
Revision revision_from_json(const J& j, const std::string& where = "revision") {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, where + ": expected an object");
  Revision r;
  const auto o = j.contains("origin") && j["origin"].is_string()
                     ? revision_origin_from_string(j["origin"].template get<std::string>())
                     : std::nullopt;
  if (!o) throw Error(ErrorCode::kSchemaError, where + ": bad 'origin'");
  r.origin = *o;
  if (j.contains("message") && j["message"].is_string()) {
    r.message = j["message"].template get<std::string>();
  }
  if (!j.contains("layout")) throw Error(ErrorCode::kSchemaError, where + ": missing 'layout'");
  r.layout = layout_from_json(j["layout"], where + ".layout");
  if (j.contains("requested") && j["requested"].is_number()) r.requested = j["requested"];
  if (j.contains("applied") && j["applied"].is_number()) r.applied = j["applied"];
  if (j.contains("repair_count") && j["repair_count"].is_number_integer()) {
    r.repair_count = j["repair_count"];
  }
  return r;
}

// ---------------------------------------------------------------------------
// Session manager
// ---------------------------------------------------------------------------

struct SessionOptions {
  double tau_o = 0.01;
  int retry = 1;
  // Empty disables journaling.
  std::string journal_dir;
};

class SessionManager {
 public:
  // `backend` may be null; free-form messages then fail with NoBackend.
  explicit SessionManager(std::shared_ptr<Backend> backend = nullptr, SessionOptions opts = {})
      : backend_(std::move(backend)), opts_(std::move(opts)) {
    if (opts_.retry < 0) throw Error(ErrorCode::kInvalidArgument, "retry must be non-negative");
    if (!opts_.journal_dir.empty()) std::filesystem::create_directories(opts_.journal_dir);
  }

  // Starts a session at revision 0. `initial` defaults to an empty canvas of
  // the spec's size and must match that canvas.
  std::string create(const PromptSpec& spec, std::optional<Layout> initial = std::nullopt) {
    spec.check();
    Layout start;
    start.canvas_w = spec.canvas_w;
    start.canvas_h = spec.canvas_h;
    if (initial) {
      if (initial->canvas_w != spec.canvas_w || initial->canvas_h != spec.canvas_h) {
        throw Error(ErrorCode::kInvalidArgument, "initial layout canvas differs from the spec");
      }
      start = std::move(*initial);
    }
    require_valid(start, ErrorCode::kInvalidArgument);
    auto s = std::make_shared<Session>();
    s->spec = spec;
    s->revisions.push_back({start, "", RevisionOrigin::kInitial});
    std::unique_lock lock(mu_);
    s->id = "s" + std::to_string(++counter_);
    while (sessions_.count(s->id)) s->id = "s" + std::to_string(++counter_);
    sessions_.emplace(s->id, s);
    {
      OrderedJson j;
      j["event"] = "create";
      j["session_id"] = s->id;
      j["spec"] = to_json(spec);
      j["revision"] = to_json(s->revisions.front());
      journal(s->id, j, /*truncate=*/true);
    }
    return s->id;
  }

  // Applies one user message. On any error the session is unchanged.
  StepResult step(const std::string& id, std::string_view message) {
    auto s = get(id);
    std::lock_guard lock(s->mu);
    const Layout& current = s->revisions.back().layout;
    Revision next;
    next.message = std::string(message);
    if (auto cmd = parse_edit_command(message, current)) {
      EditResult r = apply_edit(current, *cmd, opts_.tau_o);
      next.layout = std::move(r.layout);
      next.origin = RevisionOrigin::kDeterministicEdit;
      next.requested = r.requested;
      next.applied = r.applied;
    } else {
      if (!backend_) {
        throw Error(ErrorCode::kNoBackend,
                    "message is not a deterministic edit and no backend is configured");
      }
      PlanResult p = converse({{"user", revision_prompt(s->spec, current, message)}}, s->spec,
                              *backend_, opts_.retry);
      if (!p.outcome.ok()) {
        throw Error(ErrorCode::kPlanFailed,
                    "backend reply did not parse (" +
                        std::string(to_string(*p.outcome.failure)) + ": " + p.outcome.detail + ")");
      }
      next.layout = std::move(*p.outcome.layout);
      next.origin = RevisionOrigin::kBackend;
      next.repair_count = p.repair_count;
    }
    require_valid(next.layout);
    OrderedJson j;
    j["event"] = "revision";
    j["session_id"] = id;
    j["index"] = s->revisions.size();
    j["revision"] = to_json(next);
    journal(id, j, false);
    s->revisions.push_back(next);
    return {s->revisions.size() - 1, std::move(next)};
  }

  std::vector<Revision> history(const std::string& id) const {
    auto s = get(id);
    std::lock_guard lock(s->mu);
    return s->revisions;
  }

  Layout latest(const std::string& id) const {
    auto s = get(id);
    std::lock_guard lock(s->mu);
    return s->revisions.back().layout;
  }

  PromptSpec spec(const std::string& id) const { return get(id)->spec; }

  std::vector<std::string> ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [k, v] : sessions_) out.push_back(k);
    return out;
  }

  // Rebuilds sessions from the journal directory. Returns the number of
  // sessions restored. A truncated last line (crash mid-write) is ignored.
  std::size_t restore() {
    if (opts_.journal_dir.empty()) return 0;
    std::size_t n = 0;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(opts_.journal_dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
      auto s = std::make_shared<Session>();
      std::ifstream in(path);
      std::string line;
      while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) break;
        const std::string where = path.string();
        if (j.value("event", "") == "create") {
          s->id = j.value("session_id", "");
          s->spec = prompt_spec_from_json(j["spec"], where);
        }
        s->revisions.push_back(revision_from_json(j["revision"], where));
      }
      if (s->id.empty() || s->revisions.empty()) continue;
      std::unique_lock lock(mu_);
      if (sessions_.count(s->id)) continue;
      if (s->id.size() > 1 && s->id[0] == 's') {
        const std::string digits = s->id.substr(1);
        if (std::all_of(digits.begin(), digits.end(), ::isdigit) && digits.size() < 18) {
          counter_ = std::max<std::uint64_t>(counter_, std::stoull(digits));
        }
      }
      sessions_.emplace(s->id, s);
      ++n;
    }
    return n;
  }

  bool has_backend() const { return backend_ != nullptr; }

 private:
  struct Session {
    std::string id;
    PromptSpec spec;
    std::vector<Revision> revisions;
    mutable std::mutex mu;
  };

  static void require_valid(const Layout& layout, ErrorCode code = ErrorCode::kPlanFailed) {
    const auto v = validate(layout);
    if (!v.empty()) {
      throw Error(code, "layout is invalid: " + std::string(to_string(v[0].code)) +
                            (v[0].element_id ? " (" + *v[0].element_id + ")" : std::string()));
    }
  }

  std::shared_ptr<Session> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::kSessionNotFound, "no session '" + id + "'");
    return it->second;
  }

  void journal(const std::string& id, const OrderedJson& j, bool truncate) const {
    if (opts_.journal_dir.empty()) return;
    const auto path = std::filesystem::path(opts_.journal_dir) / (id + ".jsonl");
    std::ofstream out(path, truncate ? std::ios::trunc : std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write journal " + path.string());
  }

  std::shared_ptr<Backend> backend_;
  SessionOptions opts_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace layoutplan
