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

// layoutplan command-line tool. Exit status: 0 success, 1 domain error, 2
// usage error. Every run logs its resolved configuration to stderr.

#include <csignal>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "layoutplan/dataset.hpp"
#include "layoutplan/edit.hpp"
#include "layoutplan/evaluation.hpp"
#include "layoutplan/io.hpp"
#include "layoutplan/planner.hpp"
#include "layoutplan/remote_embedding.hpp"
#include "layoutplan/service.hpp"
#include "layoutplan/svg.hpp"

namespace lp = layoutplan;

namespace {

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  return lp::read_file(path);
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    lp::write_file(path, content);
  }
}

// A layout object, or any object with a "layout" member (pipeline records,
// revisions).
lp::Layout read_layout(const std::string& path) {
  const lp::Json j = lp::Json::parse(read_input(path), nullptr, false);
  if (j.is_discarded()) throw lp::Error(lp::ErrorCode::kSchemaError, path + ": malformed JSON");
  if (j.is_object() && j.contains("layout") && !j.contains("elements")) {
    return lp::layout_from_json(j["layout"], path);
  }
  return lp::layout_from_json(j, path);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      const auto t = lp::trim(cur);
      if (!t.empty()) out.emplace_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

const std::map<std::string, lp::LayoutFormat> kFormats = {
    {"int128", lp::LayoutFormat::int128()},     {"int1024", lp::LayoutFormat::int1024()},
    {"float", lp::LayoutFormat::float_list()},  {"css128", lp::LayoutFormat::css128()},
    {"json", lp::LayoutFormat::json_float()}};

const std::map<std::string, lp::PlanMode> kModes = {{"closed", lp::PlanMode::kClosed},
                                                    {"open", lp::PlanMode::kOpen},
                                                    {"visual_text", lp::PlanMode::kVisualText},
                                                    {"graphic", lp::PlanMode::kGraphic}};

const std::map<std::string, lp::MatchMode> kMatchModes = {{"closed", lp::MatchMode::kClosed},
                                                          {"open", lp::MatchMode::kOpen}};

const std::map<std::string, lp::SourceKind> kSources = {
    {"coco", lp::SourceKind::kCoco},
    {"crello", lp::SourceKind::kCrello},
    {"visual_text", lp::SourceKind::kVisualText}};

// Backend: scripted replies when --reply-file is given, otherwise the
// environment, otherwise none.
std::shared_ptr<lp::Backend> make_backend(const std::vector<std::string>& reply_files) {
  if (!reply_files.empty()) {
    std::vector<std::string> replies;
    for (const auto& f : reply_files) replies.push_back(lp::read_file(f));
    return std::make_shared<lp::LoopbackBackend>(std::move(replies));
  }
  if (auto cfg = lp::backend_config_from_env()) {
    return std::make_shared<lp::HttpChatBackend>(*cfg);
  }
  return nullptr;
}

std::optional<lp::RetrievalIndex> make_index(const std::string& corpus,
                                            const lp::EmbeddingProvider& provider) {
  if (corpus.empty()) return std::nullopt;
  return lp::embed_corpus(lp::load_corpus(corpus), provider);
}

struct Options {
  // shared
  std::string input = "-";
  std::string output = "-";
  std::string format = "int128";
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool quiet = false;
  lp::FilterConfig filter;
  // ingest
  std::string source = "coco";
  // pipeline
  std::string coco, crello, visual_text, formats = "int128", stats;
  // decode / plan
  double canvas_w = lp::kDefaultCanvasSide, canvas_h = lp::kDefaultCanvasSide;
  // plan
  std::string caption, targets, mode = "closed", corpus;
  int k = 0;
  int retry = 1;
  std::vector<std::string> reply_files;
  bool show_prompt = false;
  // eval
  std::string gen, ref, match_mode = "closed", items;
  // serve
  std::string host = "127.0.0.1", token, journal;
  int port = 8080;
};

void add_filter_flags(CLI::App* sub, lp::FilterConfig& f) {
  sub->add_option("--tau-a", f.tau_a, "Minimum object area as a fraction of the largest box")
      ->group("Filters");
  sub->add_option("--tau-l", f.tau_l, "Minimum longer side as a fraction of the canvas side")
      ->group("Filters");
  sub->add_option("--tau-o", f.tau_o, "Maximum pairwise IoU")->group("Filters");
  sub->add_option("--crello-min-area", f.crello_min_area,
                  "Design elements smaller than this fraction are merged")
      ->group("Filters");
  sub->add_option("--crello-max-transparent", f.crello_max_transparent,
                  "Design elements more transparent than this are merged")
      ->group("Filters");
  sub->add_option("--crello-max-elements", f.crello_max_elements,
                  "Designs with more elements after merging are dropped")
      ->group("Filters");
  sub->add_option("--max-ocr-words", f.max_ocr_words,
                  "Images with more OCR words are dropped")
      ->group("Filters");
  sub->add_option("--canvas-side", f.canvas_side, "Side of the normalized square canvas")
      ->group("Filters");
  sub->add_option("--shift-min-fraction", f.shift_min_fraction,
                  "Smallest shift as a fraction of the canvas extent")
      ->group("Filters");
}

// Logs the active subcommand's resolved options, defaults included.
void log_config(const CLI::App& app, const Options& o) {
  if (o.quiet) return;
  const CLI::App* sub = app.get_subcommands().front();
  std::cerr << "layoutplan " << sub->get_name() << ": resolved configuration\n"
            << sub->config_to_str(true, false);
  std::cerr << "seed=" << o.seed << "\n";
}

int run_ingest(const Options& o) {
  const auto r = lp::ingest(o.input, kSources.at(o.source));
  std::string out;
  for (const auto& rec : r.records) out += lp::to_json(rec).dump() + "\n";
  write_output(o.output, out);
  std::cerr << "ingested " << r.records.size() << " records, skipped " << r.skipped << "\n";
  return 0;
}

int run_pipeline(const Options& o) {
  if (o.coco.empty() && o.crello.empty() && o.visual_text.empty()) {
    throw CLI::ValidationError("pipeline", "give at least one of --coco, --crello, --visual-text");
  }
  std::vector<lp::LayoutFormat> formats;
  for (const auto& name : split_csv(o.formats)) {
    const auto it = kFormats.find(name);
    if (it == kFormats.end()) throw CLI::ValidationError("--formats", "unknown format " + name);
    formats.push_back(it->second);
  }
  std::vector<lp::SourceRecord> records;
  std::size_t skipped = 0;
  for (const auto& [path, kind] : {std::pair{o.coco, lp::SourceKind::kCoco},
                                   std::pair{o.crello, lp::SourceKind::kCrello},
                                   std::pair{o.visual_text, lp::SourceKind::kVisualText}}) {
    if (path.empty()) continue;
    auto r = lp::ingest(path, kind);
    skipped += r.skipped;
    for (auto& rec : r.records) records.push_back(std::move(rec));
  }
  const auto result = lp::run_pipeline(records, o.filter, formats, o.seed, o.workers);
  write_output(o.output, lp::to_jsonl(result.records));
  auto stats = lp::to_json(result.stats);
  stats["skipped_at_ingest"] = skipped;
  if (!o.stats.empty()) write_output(o.stats, stats.dump(2) + "\n");
  std::cerr << stats.dump() << "\n";
  return 0;
}

int run_encode(const Options& o) {
  write_output(o.output, lp::serialize(read_layout(o.input), kFormats.at(o.format)));
  return 0;
}

int run_decode(const Options& o) {
  const auto outcome =
      lp::parse(read_input(o.input), kFormats.at(o.format), o.canvas_w, o.canvas_h);
  write_output(o.output, lp::to_json(outcome).dump(2) + "\n");
  return outcome.ok() ? 0 : 1;
}

int run_augment(const Options& o) {
  o.filter.check();
  const auto r = lp::shift_augment(read_layout(o.input), o.seed, o.filter);
  lp::OrderedJson j;
  j["instruction"] = r.instruction.instruction_text;
  j["element_id"] = r.instruction.element_id;
  j["direction"] = std::string(lp::to_string(r.instruction.direction));
  j["distance"] = r.instruction.distance;
  j["layout"] = lp::to_json(r.layout);
  write_output(o.output, j.dump(2) + "\n");
  return 0;
}

int run_plan(const Options& o) {
  lp::PromptSpec spec;
  spec.caption = o.caption;
  if (!o.targets.empty()) spec.target_elements = split_csv(o.targets);
  spec.format = kFormats.at(o.format);
  spec.mode = kModes.at(o.mode);
  spec.canvas_w = o.canvas_w;
  spec.canvas_h = o.canvas_h;
  spec.check();
  const auto backend = make_backend(o.reply_files);
  if (!backend) {
    throw lp::Error(lp::ErrorCode::kNoBackend,
                    "set LAYOUTPLAN_BACKEND_URL or pass --reply-file");
  }
  const auto provider = lp::embedding_provider_from_env();
  const auto index = make_index(o.corpus, *provider);
  if (o.k > 0 && !index) {
    throw CLI::ValidationError("--k", "retrieval needs --corpus; use --k 0 for fixed examples");
  }
  const auto demos = lp::retrieve_demonstrations(spec.caption, index ? *index : lp::RetrievalIndex{},
                                                 static_cast<std::size_t>(o.k), *provider,
                                                 spec.format);
  const auto r = lp::plan_layout(spec, demos, *backend, o.retry);
  lp::OrderedJson j;
  j["outcome"] = lp::to_json(r.outcome);
  j["raw_reply"] = r.raw_reply;
  j["repair_count"] = r.repair_count;
  j["demonstrations"] = lp::OrderedJson::array();
  for (const auto& d : demos) j["demonstrations"].push_back(d.source_id);
  if (o.show_prompt) j["prompt"] = r.transcript.front().content;
  write_output(o.output, j.dump(2) + "\n");
  return r.outcome.ok() ? 0 : 1;
}

int run_eval(const Options& o) {
  const auto provider = lp::embedding_provider_from_env();
  const auto report = lp::evaluate_files(o.gen, o.ref, kMatchModes.at(o.match_mode),
                                         kFormats.at(o.format), o.workers, provider.get());
  write_output(o.output, lp::to_json(report).dump(2) + "\n");
  if (!o.items.empty()) {
    std::string lines;
    for (const auto& d : report.items) lines += lp::to_json(d).dump() + "\n";
    write_output(o.items, lines);
  }
  return 0;
}

int run_render(const Options& o) {
  const auto layout = read_layout(o.input);
  const auto violations = lp::validate(layout);
  if (!violations.empty()) {
    throw lp::Error(lp::ErrorCode::kInvalidArgument, violations.front().message);
  }
  write_output(o.output, lp::render_svg(layout));
  return 0;
}

int run_serve(const Options& o) {
  lp::ServiceOptions so;
  so.host = o.host;
  so.port = o.port;
  so.token = o.token;
  so.sessions.tau_o = o.filter.tau_o;
  so.sessions.retry = o.retry;
  so.sessions.journal_dir = o.journal;
  so.plan_retry = o.retry;
  so.eval_workers = o.workers;
  so.embedder = lp::embedding_provider_from_env();
  // Block termination signals before any server thread exists so that only
  // this thread receives them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  lp::Service service(so, make_backend(o.reply_files), make_index(o.corpus, *so.embedder));
  const int port = service.start();
  std::cerr << "listening on http://" << o.host << ":" << port << "\n";
  int sig = 0;
  sigwait(&set, &sig);
  std::cerr << "stopping\n";
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layout planning toolkit: dataset pipeline, layout codecs, metrics, planner "
               "and service."};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML or INI file with option values; flags override it");
  app.require_subcommand(1);
  Options o;
  app.add_flag("-q,--quiet", o.quiet, "Do not log the resolved configuration");

  auto formats = CLI::IsMember(kFormats);

  auto* ingest = app.add_subcommand("ingest", "Read a source dataset into normalized records");
  ingest->add_option("--source", o.source, "Source kind")->check(CLI::IsMember(kSources));
  ingest->add_option("-i,--input", o.input, "Source file")->required();
  ingest->add_option("-o,--output", o.output, "JSONL output, '-' for stdout");

  auto* pipeline = app.add_subcommand("pipeline", "Filter sources and emit instruction records");
  pipeline->add_option("--coco", o.coco, "COCO-style annotation JSON");
  pipeline->add_option("--crello", o.crello, "Graphic design JSONL");
  pipeline->add_option("--visual-text", o.visual_text, "Visual text JSONL");
  pipeline->add_option("--formats", o.formats, "Comma-separated output formats");
  pipeline->add_option("--seed", o.seed, "Seed for shift augmentation");
  pipeline->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  pipeline->add_option("-o,--output", o.output, "Records JSONL, '-' for stdout");
  pipeline->add_option("--stats", o.stats, "Write keep/drop statistics JSON here");
  add_filter_flags(pipeline, o.filter);

  auto* encode = app.add_subcommand("encode", "Serialize a layout JSON file to text");
  encode->add_option("-i,--input", o.input, "Layout JSON, '-' for stdin");
  encode->add_option("--format", o.format, "Output format")->check(formats);
  encode->add_option("-o,--output", o.output, "Output file, '-' for stdout");

  auto* decode = app.add_subcommand("decode", "Parse layout text and report the outcome");
  decode->add_option("-i,--input", o.input, "Text file, '-' for stdin");
  decode->add_option("--format", o.format, "Input format")->check(formats);
  decode->add_option("--canvas-w", o.canvas_w, "Canvas width")->check(CLI::PositiveNumber);
  decode->add_option("--canvas-h", o.canvas_h, "Canvas height")->check(CLI::PositiveNumber);
  decode->add_option("-o,--output", o.output, "Outcome JSON, '-' for stdout");

  auto* augment = app.add_subcommand("augment", "Apply one seeded layout shift");
  augment->add_option("-i,--input", o.input, "Layout JSON, '-' for stdin");
  augment->add_option("--seed", o.seed, "Seed");
  augment->add_option("-o,--output", o.output, "Result JSON, '-' for stdout");
  add_filter_flags(augment, o.filter);

  auto* plan = app.add_subcommand("plan", "Plan a layout with a chat backend");
  plan->add_option("--caption", o.caption, "Description to plan for")->required();
  plan->add_option("--targets", o.targets, "Comma-separated element labels to place");
  plan->add_option("--format", o.format, "Layout format")->check(formats);
  plan->add_option("--mode", o.mode, "Planning mode")->check(CLI::IsMember(kModes));
  plan->add_option("--canvas-w", o.canvas_w, "Canvas width")->check(CLI::PositiveNumber);
  plan->add_option("--canvas-h", o.canvas_h, "Canvas height")->check(CLI::PositiveNumber);
  plan->add_option("--k", o.k, "Demonstrations to retrieve; 0 uses the fixed examples")
      ->check(CLI::NonNegativeNumber);
  plan->add_option("--corpus", o.corpus, "Retrieval corpus JSONL (pipeline output)");
  plan->add_option("--retry", o.retry, "Repair rounds after a parse failure")
      ->check(CLI::NonNegativeNumber);
  plan->add_option("--reply-file", o.reply_files,
                   "Scripted backend reply (repeatable); overrides the environment");
  plan->add_flag("--show-prompt", o.show_prompt, "Include the prompt in the output");
  plan->add_option("-o,--output", o.output, "Result JSON, '-' for stdout");

  auto* eval = app.add_subcommand("eval", "Score generated layouts against references");
  eval->add_option("--gen", o.gen, "Generated JSONL {id, output}")->required();
  eval->add_option("--ref", o.ref, "Reference JSONL {id, layout | target}")->required();
  eval->add_option("--mode", o.match_mode, "Label matching")->check(CLI::IsMember(kMatchModes));
  eval->add_option("--format", o.format, "Format for references without one")->check(formats);
  eval->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  eval->add_option("-o,--output,--report", o.output, "Report JSON, '-' for stdout");
  eval->add_option("--items", o.items, "Per-item diagnostics JSONL");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--port", o.port, "Port, 0 for any free port")->check(CLI::Range(0, 65535));
  serve->add_option("--token", o.token, "Require this bearer token")
      ->envname("LAYOUTPLAN_SERVICE_TOKEN");
  serve->add_option("--journal", o.journal, "Directory for session journals");
  serve->add_option("--corpus", o.corpus, "Retrieval corpus JSONL for /plan");
  serve->add_option("--retry", o.retry, "Repair rounds after a parse failure")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--tau-o", o.filter.tau_o, "Overlap limit for deterministic edits");
  serve->add_option("--workers", o.workers, "Worker threads for /evaluate")
      ->check(CLI::PositiveNumber);
  serve->add_option("--reply-file", o.reply_files, "Scripted backend reply (repeatable)");

  auto* render = app.add_subcommand("render", "Render a layout JSON file to SVG");
  render->add_option("-i,--input", o.input, "Layout JSON, '-' for stdin");
  render->add_option("-o,--output", o.output, "SVG output, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    // The token is a credential; keep it out of the log.
    const std::string token = o.token;
    if (!token.empty()) serve->get_option("--token")->clear();
    log_config(app, o);
    o.token = token;
    if (*ingest) return run_ingest(o);
    if (*pipeline) return run_pipeline(o);
    if (*encode) return run_encode(o);
    if (*decode) return run_decode(o);
    if (*augment) return run_augment(o);
    if (*plan) return run_plan(o);
    if (*eval) return run_eval(o);
    if (*serve) return run_serve(o);
    if (*render) return run_render(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const lp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
