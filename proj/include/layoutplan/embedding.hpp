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

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layoutplan/error.hpp"
#include "layoutplan/util.hpp"

namespace layoutplan {

// Text feature provider. Implementations return unit-norm vectors of length
// dim() and must be deterministic: equal text, identical vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector lengths " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline void l2_normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

// Hashed character-trigram term frequencies, L2-normalised. Text is
// lower-cased and whitespace-collapsed first, then padded with one space on
// each side. Text without any trigram maps to the first basis vector.
class TrigramEmbedding final : public EmbeddingProvider {
 public:
  explicit TrigramEmbedding(std::size_t dim = 64) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "dim must be positive");
  }

  std::size_t dim() const override { return dim_; }

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dim_, 0.0);
    const std::string padded = " " + normalize_label(text) + " ";
    bool any = false;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const std::string_view tri(padded.data() + i, 3);
      if (tri == "   ") continue;
      v[fnv1a64(tri) % dim_] += 1.0;
      any = true;
    }
    if (!any) {
      v[0] = 1.0;
      return v;
    }
    l2_normalize(v);
    return v;
  }

 private:
  std::size_t dim_;
};

// First `dim` components of v, zero-padded when v is shorter.
inline std::vector<double> fit_length(std::span<const double> v, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < std::min(dim, v.size()); ++i) out[i] = v[i];
  return out;
}

}  // namespace layoutplan
