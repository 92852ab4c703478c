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

// Layout evaluation metrics: MaxIoU with optimal matching (closed and open
// label sets), extraction precision/recall/F, failure rate, and a layout
// Frechet distance over a deterministic feature space.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layoutplan/codec.hpp"
#include "layoutplan/embedding.hpp"
#include "layoutplan/error.hpp"
#include "layoutplan/geometry.hpp"
#include "layoutplan/hungarian.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

enum class MatchMode { kClosed, kOpen };

inline std::string_view to_string(MatchMode m) {
  return m == MatchMode::kClosed ? "closed" : "open";
}

inline std::optional<MatchMode> match_mode_from_string(std::string_view s) {
  if (s == "closed") return MatchMode::kClosed;
  if (s == "open") return MatchMode::kOpen;
  return std::nullopt;
}

struct MetricsConfig {
  // Open-set MaxIoU drops matched pairs below this label cosine.
  double open_similarity_floor = 0.2;
  // Open-set extraction counts a label as found at or above this cosine.
  double open_match_threshold = 0.9;
  // Ridge added to every fitted covariance.
  double fid_epsilon = 1e-6;
};

struct MatchedPair {
  std::size_t gen = 0;
  std::size_t ref = 0;
  double iou = 0.0;
  double similarity = 1.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_gen;
  std::vector<std::size_t> unmatched_ref;
  double score = 0.0;
};

namespace metrics_detail {

inline MatchResult finish(std::vector<MatchedPair> pairs, std::size_t n_gen,
                          std::size_t n_ref) {
  MatchResult r;
  std::sort(pairs.begin(), pairs.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.gen < b.gen; });
  std::vector<char> g(n_gen, 0), f(n_ref, 0);
  std::vector<double> ious;
  for (const auto& p : pairs) {
    g[p.gen] = 1;
    f[p.ref] = 1;
    ious.push_back(p.iou);
  }
  for (std::size_t i = 0; i < n_gen; ++i) {
    if (!g[i]) r.unmatched_gen.push_back(i);
  }
  for (std::size_t j = 0; j < n_ref; ++j) {
    if (!f[j]) r.unmatched_ref.push_back(j);
  }
  // Sorted summation keeps the score independent of which side is "gen".
  std::sort(ious.begin(), ious.end());
  const std::size_t denom = std::max(n_gen, n_ref);
  if (denom == 0) {
    r.score = 1.0;
  } else {
    r.score = std::clamp(pairwise_sum(ious) / static_cast<double>(denom), 0.0, 1.0);
  }
  r.pairs = std::move(pairs);
  return r;
}

}  // namespace metrics_detail

// MaxIoU where only label-equal elements (case- and whitespace-insensitive)
// may be paired. Score is the matched IoU sum over max(|gen|, |ref|); two
// empty layouts score 1.
inline MatchResult max_iou_closed(const Layout& gen, const Layout& ref) {
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    groups[normalize_label(gen.elements[i].label)].first.push_back(i);
  }
  for (std::size_t j = 0; j < ref.size(); ++j) {
    groups[normalize_label(ref.elements[j].label)].second.push_back(j);
  }
  std::vector<MatchedPair> pairs;
  for (const auto& [label, members] : groups) {
    const auto& [gi, ri] = members;
    if (gi.empty() || ri.empty()) continue;
    Matrix w(gi.size(), std::vector<double>(ri.size()));
    for (std::size_t a = 0; a < gi.size(); ++a) {
      for (std::size_t b = 0; b < ri.size(); ++b) {
        w[a][b] = iou(gen.elements[gi[a]].bbox, ref.elements[ri[b]].bbox);
      }
    }
    for (auto [a, b] : hungarian_max(w).pairs) {
      pairs.push_back({gi[a], ri[b], w[a][b], 1.0});
    }
  }
  return metrics_detail::finish(std::move(pairs), gen.size(), ref.size());
}

// MaxIoU where pairing maximises total label cosine similarity; pairs below
// `similarity_floor` are discarded. Ties in similarity are broken towards the
// larger IoU.
inline MatchResult max_iou_open(const Layout& gen, const Layout& ref,
                                const EmbeddingProvider& provider,
                                double similarity_floor = 0.2) {
  constexpr double kTieBreak = 1e-9;
  std::vector<std::vector<double>> ge, re;
  for (const auto& e : gen.elements) ge.push_back(provider.embed(e.label));
  for (const auto& e : ref.elements) re.push_back(provider.embed(e.label));
  Matrix sim(gen.size(), std::vector<double>(ref.size()));
  Matrix w = sim;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      sim[i][j] = cosine_similarity(ge[i], re[j]);
      w[i][j] = sim[i][j] +
                kTieBreak * iou(gen.elements[i].bbox, ref.elements[j].bbox);
    }
  }
  std::vector<MatchedPair> pairs;
  for (auto [i, j] : hungarian_max(w).pairs) {
    if (sim[i][j] < similarity_floor) continue;
    pairs.push_back({i, j, iou(gen.elements[i].bbox, ref.elements[j].bbox), sim[i][j]});
  }
  return metrics_detail::finish(std::move(pairs), gen.size(), ref.size());
}

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

inline double harmonic_mean(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

namespace metrics_detail {

inline PrfScore prf_from_matches(std::size_t matches, std::size_t n_gen,
                                 std::size_t n_ref) {
  if (n_gen == 0 && n_ref == 0) return {1.0, 1.0, 1.0};
  PrfScore s;
  s.precision = n_gen ? static_cast<double>(matches) / n_gen : 0.0;
  s.recall = n_ref ? static_cast<double>(matches) / n_ref : 0.0;
  s.f_score = harmonic_mean(s.precision, s.recall);
  return s;
}

}  // namespace metrics_detail

// Closed-set extraction: greedy one-to-one matching on normalised label
// equality, generated labels visited in order.
inline PrfScore extraction_prf(std::span<const std::string> gen_labels,
                               std::span<const std::string> ref_labels) {
  std::vector<std::string> refs;
  for (const auto& r : ref_labels) refs.push_back(normalize_label(r));
  std::vector<char> used(refs.size(), 0);
  std::size_t matches = 0;
  for (const auto& g : gen_labels) {
    const std::string key = normalize_label(g);
    for (std::size_t j = 0; j < refs.size(); ++j) {
      if (!used[j] && refs[j] == key) {
        used[j] = 1;
        ++matches;
        break;
      }
    }
  }
  return metrics_detail::prf_from_matches(matches, gen_labels.size(), ref_labels.size());
}

// Open-set extraction: each generated label takes the most similar unused
// reference label if the cosine reaches `threshold` (ties to the lower index).
inline PrfScore extraction_prf(std::span<const std::string> gen_labels,
                               std::span<const std::string> ref_labels,
                               const EmbeddingProvider& provider,
                               double threshold = 0.9) {
  std::vector<std::vector<double>> re;
  for (const auto& r : ref_labels) re.push_back(provider.embed(r));
  std::vector<char> used(re.size(), 0);
  std::size_t matches = 0;
  for (const auto& g : gen_labels) {
    const auto ge = provider.embed(g);
    std::optional<std::size_t> best;
    double best_sim = -2.0;
    for (std::size_t j = 0; j < re.size(); ++j) {
      if (used[j]) continue;
      const double s = cosine_similarity(ge, re[j]);
      if (s >= threshold && s > best_sim) {
        best_sim = s;
        best = j;
      }
    }
    if (best) {
      used[*best] = 1;
      ++matches;
    }
  }
  return metrics_detail::prf_from_matches(matches, gen_labels.size(), ref_labels.size());
}

inline std::vector<std::string> labels_of(const Layout& layout) {
  std::vector<std::string> out;
  for (const auto& e : layout.elements) out.push_back(e.label);
  return out;
}

// Percentage of outcomes that failed to parse.
inline double failure_rate(std::span<const ParseOutcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::kEmptyInput, "no outcomes");
  std::size_t failures = 0;
  for (const auto& o : outcomes) failures += o.ok() ? 0 : 1;
  return 100.0 * static_cast<double>(failures) / static_cast<double>(outcomes.size());
}

// Three-decimal rendering used for failure percentages ("0.398").
inline std::string format_percent(double percent) { return format_fixed(percent, 3); }

// ---------------------------------------------------------------------------
// Layout features
// ---------------------------------------------------------------------------

inline constexpr std::size_t kGeometricFeatures = 32;
inline constexpr std::size_t kElementTextFeatures = 60;
inline constexpr std::size_t kFeatureDim = kGeometricFeatures + 4 + kElementTextFeatures;

// Slot indices of the geometric block.
namespace feature_slot {
inline constexpr std::size_t kCount = 0;
inline constexpr std::size_t kCoverage = 1;
inline constexpr std::size_t kCenterMeanX = 2;
inline constexpr std::size_t kCenterMeanY = 3;
inline constexpr std::size_t kCenterStdX = 4;
inline constexpr std::size_t kCenterStdY = 5;
inline constexpr std::size_t kSizeMeanW = 6;
inline constexpr std::size_t kSizeMeanH = 7;
inline constexpr std::size_t kSizeStdW = 8;
inline constexpr std::size_t kSizeStdH = 9;
inline constexpr std::size_t kAreaMean = 10;
inline constexpr std::size_t kAreaStd = 11;
inline constexpr std::size_t kAspectMean = 12;
inline constexpr std::size_t kAspectStd = 13;
inline constexpr std::size_t kIouMean = 14;
inline constexpr std::size_t kIouMax = 15;
inline constexpr std::size_t kExtent = 16;          // min l, min t, max r, max b
inline constexpr std::size_t kQuadrantCenters = 20;  // TL, TR, BL, BR
inline constexpr std::size_t kQuadrantCoverage = 24;
inline constexpr std::size_t kKindFractions = 28;    // text, visual, asset, background
inline constexpr std::size_t kPooledBox = 32;        // mean l, t, r, b
inline constexpr std::size_t kPooledText = 36;
}  // namespace feature_slot

namespace metrics_detail {

inline std::pair<double, double> mean_std(std::vector<double> v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = pairwise_sum(v) / n;
  for (double& x : v) x = (x - mean) * (x - mean);
  return {mean, std::sqrt(pairwise_sum(v) / n)};
}

// Union area of boxes via coordinate compression.
inline double union_area(std::span<const BBox> boxes) {
  std::vector<double> xs, ys;
  for (const auto& b : boxes) {
    if (b.area() <= 0.0) continue;
    xs.insert(xs.end(), {b.left, b.right});
    ys.insert(ys.end(), {b.top, b.bottom});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cx = 0.5 * (xs[i] + xs[i + 1]);
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      for (const auto& b : boxes) {
        if (b.area() > 0.0 && cx > b.left && cx < b.right && cy > b.top &&
            cy < b.bottom) {
          total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
          break;
        }
      }
    }
  }
  return total;
}

}  // namespace metrics_detail

// Fixed-length layout descriptor: 32 geometric statistics, then the mean of
// per-element vectors [l, t, r, b (canvas fractions), label embedding fitted
// to 60 dims]. The empty layout maps to the zero vector.
inline std::vector<double> featurize_layout(const Layout& layout,
                                            const EmbeddingProvider& provider) {
  namespace fs = feature_slot;
  using metrics_detail::mean_std;
  std::vector<double> f(kFeatureDim, 0.0);
  const std::size_t n = layout.size();
  if (n == 0) return f;
  const double W = layout.canvas_w;
  const double H = layout.canvas_h;

  std::vector<BBox> boxes;
  std::vector<double> cx, cy, w, h, area, aspect;
  for (const auto& e : layout.elements) {
    const BBox b{e.bbox.left / W, e.bbox.top / H, e.bbox.right / W, e.bbox.bottom / H};
    boxes.push_back(b);
    cx.push_back(b.center_x());
    cy.push_back(b.center_y());
    w.push_back(b.width());
    h.push_back(b.height());
    area.push_back(b.area());
    const double s = b.width() + b.height();
    aspect.push_back(s > 0.0 ? b.width() / s : 0.5);
  }

  f[fs::kCount] = static_cast<double>(n) / 10.0;
  f[fs::kCoverage] = metrics_detail::union_area(boxes);
  std::tie(f[fs::kCenterMeanX], f[fs::kCenterStdX]) = mean_std(cx);
  std::tie(f[fs::kCenterMeanY], f[fs::kCenterStdY]) = mean_std(cy);
  std::tie(f[fs::kSizeMeanW], f[fs::kSizeStdW]) = mean_std(w);
  std::tie(f[fs::kSizeMeanH], f[fs::kSizeStdH]) = mean_std(h);
  std::tie(f[fs::kAreaMean], f[fs::kAreaStd]) = mean_std(area);
  std::tie(f[fs::kAspectMean], f[fs::kAspectStd]) = mean_std(aspect);

  std::vector<double> ious;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) ious.push_back(iou(boxes[i], boxes[j]));
  }
  if (!ious.empty()) {
    std::sort(ious.begin(), ious.end());
    f[fs::kIouMean] = pairwise_sum(ious) / static_cast<double>(ious.size());
    f[fs::kIouMax] = ious.back();
  }

  double min_l = 1.0, min_t = 1.0, max_r = 0.0, max_b = 0.0;
  double quad_count[4] = {0, 0, 0, 0};
  double quad_area[4] = {0, 0, 0, 0};
  const BBox quads[4] = {{0.0, 0.0, 0.5, 0.5}, {0.5, 0.0, 1.0, 0.5},
                         {0.0, 0.5, 0.5, 1.0}, {0.5, 0.5, 1.0, 1.0}};
  double kinds[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const BBox& b = boxes[i];
    min_l = std::min(min_l, b.left);
    min_t = std::min(min_t, b.top);
    max_r = std::max(max_r, b.right);
    max_b = std::max(max_b, b.bottom);
    const int q = (cx[i] >= 0.5 ? 1 : 0) + (cy[i] >= 0.5 ? 2 : 0);
    quad_count[q] += 1.0;
    for (int k = 0; k < 4; ++k) quad_area[k] += intersection_area(b, quads[k]);
    switch (layout.elements[i].kind) {
      case ElementKind::kTextSpan: kinds[0] += 1.0; break;
      case ElementKind::kVisualObject: kinds[1] += 1.0; break;
      case ElementKind::kImageAsset:
      case ElementKind::kVectorAsset: kinds[2] += 1.0; break;
      case ElementKind::kBackground: kinds[3] += 1.0; break;
    }
  }
  f[fs::kExtent + 0] = min_l;
  f[fs::kExtent + 1] = min_t;
  f[fs::kExtent + 2] = max_r;
  f[fs::kExtent + 3] = max_b;
  for (int k = 0; k < 4; ++k) {
    f[fs::kQuadrantCenters + k] = quad_count[k] / static_cast<double>(n);
    f[fs::kQuadrantCoverage + k] = std::min(1.0, quad_area[k] / 0.25);
    f[fs::kKindFractions + k] = kinds[k] / static_cast<double>(n);
  }

  // Mean-pooled element vectors.
  std::vector<std::vector<double>> columns(4 + kElementTextFeatures);
  for (std::size_t i = 0; i < n; ++i) {
    const BBox& b = boxes[i];
    columns[0].push_back(b.left);
    columns[1].push_back(b.top);
    columns[2].push_back(b.right);
    columns[3].push_back(b.bottom);
    const auto text = fit_length(provider.embed(layout.elements[i].label),
                                 kElementTextFeatures);
    for (std::size_t k = 0; k < kElementTextFeatures; ++k) {
      columns[4 + k].push_back(text[k]);
    }
  }
  for (std::size_t k = 0; k < columns.size(); ++k) {
    f[fs::kPooledBox + k] = pairwise_sum(columns[k]) / static_cast<double>(n);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Frechet distance between Gaussian fits
// ---------------------------------------------------------------------------

struct FidStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;
};

// Sample mean and unbiased covariance, plus epsilon on the diagonal.
inline FidStats fit_gaussian(const std::vector<std::vector<double>>& vectors,
                             double epsilon = 1e-6) {
  if (vectors.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples,
                "need at least 2 vectors, got " + std::to_string(vectors.size()));
  }
  const std::size_t d = vectors[0].size();
  Eigen::MatrixXd x(vectors.size(), d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "feature vectors differ in length");
    }
    for (std::size_t k = 0; k < d; ++k) x(i, k) = vectors[i][k];
  }
  FidStats s;
  s.count = vectors.size();
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.covariance = (centered.transpose() * centered) / static_cast<double>(s.count - 1);
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
  s.covariance.diagonal().array() += epsilon;
  return s;
}

// Symmetric positive semi-definite square root; negative eigenvalues from
// round-off are clamped to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with the trace term
// taken as tr((A S_b A)^(1/2)) for A = S_a^(1/2). Clamped at zero.
inline double frechet_distance(const FidStats& a, const FidStats& b) {
  if (a.mean.size() != b.mean.size() || a.covariance.rows() != b.covariance.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "stat dimensions " + std::to_string(a.mean.size()) + " and " +
                    std::to_string(b.mean.size()));
  }
  const Eigen::MatrixXd root_a = psd_sqrt(a.covariance);
  const Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.covariance.trace() +
                   b.covariance.trace() - 2.0 * tr_cross;
  return std::max(0.0, d);
}

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct GeneratedItem {
  std::string id;
  ParseOutcome outcome;
};

struct ReferenceItem {
  std::string id;
  Layout layout;
};

struct ItemDiagnostics {
  std::string id;
  bool ok = false;
  std::optional<FailureReason> failure;
  double max_iou = 0.0;
  PrfScore prf;
  std::size_t n_gen = 0;
  std::size_t n_ref = 0;
};

struct EvalReport {
  MatchMode mode = MatchMode::kClosed;
  // Absent when either side has fewer than two layouts to fit.
  std::optional<double> fid;
  // Mean over all items, failures scoring 0.
  double max_iou = 0.0;
  // Mean over successful parses only.
  double max_iou_success = 0.0;
  double fail_percent = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  // Harmonic mean of `precision` and `recall`.
  double f_score = 0.0;
  // Mean of per-item F-scores.
  double f_score_item_mean = 0.0;
  std::size_t n_generated = 0;
  std::size_t n_reference = 0;
  std::size_t n_success = 0;
  std::vector<ItemDiagnostics> items;
};

// Rescales a layout onto another canvas extent.
inline Layout rescale(const Layout& layout, double canvas_w, double canvas_h) {
  if (layout.canvas_w == canvas_w && layout.canvas_h == canvas_h) return layout;
  Layout out = layout;
  const double sx = canvas_w / layout.canvas_w;
  const double sy = canvas_h / layout.canvas_h;
  out.canvas_w = canvas_w;
  out.canvas_h = canvas_h;
  for (auto& e : out.elements) {
    e.bbox = {e.bbox.left * sx, e.bbox.top * sy, e.bbox.right * sx, e.bbox.bottom * sy};
  }
  return out;
}

inline EvalReport evaluate_corpus(std::span<const GeneratedItem> generated,
                                  std::span<const ReferenceItem> references,
                                  MatchMode mode, const EmbeddingProvider& provider,
                                  const MetricsConfig& cfg = {}, unsigned workers = 1) {
  if (references.empty()) {
    throw Error(ErrorCode::kAlignmentError, "empty reference set");
  }
  std::map<std::string, const ReferenceItem*> ref_by_id;
  for (const auto& r : references) {
    if (!ref_by_id.emplace(r.id, &r).second) {
      throw Error(ErrorCode::kAlignmentError, "duplicate reference id '" + r.id + "'");
    }
  }
  std::map<std::string, const GeneratedItem*> gen_by_id;
  for (const auto& g : generated) {
    if (!gen_by_id.emplace(g.id, &g).second) {
      throw Error(ErrorCode::kAlignmentError, "duplicate generated id '" + g.id + "'");
    }
    if (!ref_by_id.count(g.id)) {
      throw Error(ErrorCode::kAlignmentError, "no reference for id '" + g.id + "'");
    }
  }
  for (const auto& [id, _] : ref_by_id) {
    if (!gen_by_id.count(id)) {
      throw Error(ErrorCode::kAlignmentError, "no generation for id '" + id + "'");
    }
  }

  // Items in id order so every aggregate is independent of input order.
  std::vector<std::pair<const GeneratedItem*, const ReferenceItem*>> items;
  for (const auto& [id, g] : gen_by_id) items.emplace_back(g, ref_by_id.at(id));

  const std::size_t n = items.size();
  std::vector<ItemDiagnostics> diags(n);
  std::vector<std::optional<std::vector<double>>> gen_features(n);
  std::vector<std::vector<double>> ref_features(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto& [g, r] = items[i];
    ItemDiagnostics d;
    d.id = g->id;
    d.n_ref = r->layout.size();
    ref_features[i] = featurize_layout(r->layout, provider);
    if (g->outcome.ok()) {
      const Layout gl =
          rescale(*g->outcome.layout, r->layout.canvas_w, r->layout.canvas_h);
      d.ok = true;
      d.n_gen = gl.size();
      const auto gen_labels = labels_of(gl);
      const auto ref_labels = labels_of(r->layout);
      if (mode == MatchMode::kClosed) {
        d.max_iou = max_iou_closed(gl, r->layout).score;
        d.prf = extraction_prf(gen_labels, ref_labels);
      } else {
        d.max_iou = max_iou_open(gl, r->layout, provider, cfg.open_similarity_floor).score;
        d.prf = extraction_prf(gen_labels, ref_labels, provider, cfg.open_match_threshold);
      }
      gen_features[i] = featurize_layout(gl, provider);
    } else {
      d.failure = g->outcome.failure;
    }
    diags[i] = std::move(d);
  });

  EvalReport rep;
  rep.mode = mode;
  rep.n_generated = n;
  rep.n_reference = n;
  std::vector<double> ious, ps, rs, fs;
  std::vector<std::vector<double>> gen_ok_features;
  for (std::size_t i = 0; i < n; ++i) {
    if (!diags[i].ok) continue;
    ++rep.n_success;
    ious.push_back(diags[i].max_iou);
    ps.push_back(diags[i].prf.precision);
    rs.push_back(diags[i].prf.recall);
    fs.push_back(diags[i].prf.f_score);
    gen_ok_features.push_back(*gen_features[i]);
  }
  rep.fail_percent = 100.0 * static_cast<double>(n - rep.n_success) / static_cast<double>(n);
  const double iou_sum = pairwise_sum(ious);
  rep.max_iou = iou_sum / static_cast<double>(n);
  if (rep.n_success > 0) {
    const double ns = static_cast<double>(rep.n_success);
    rep.max_iou_success = iou_sum / ns;
    rep.precision = pairwise_sum(ps) / ns;
    rep.recall = pairwise_sum(rs) / ns;
    rep.f_score_item_mean = pairwise_sum(fs) / ns;
  }
  rep.f_score = harmonic_mean(rep.precision, rep.recall);
  if (gen_ok_features.size() >= 2 && ref_features.size() >= 2) {
    rep.fid = frechet_distance(fit_gaussian(gen_ok_features, cfg.fid_epsilon),
                               fit_gaussian(ref_features, cfg.fid_epsilon));
  }
  rep.items = std::move(diags);
  return rep;
}

}  // namespace layoutplan
