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

#include "layoutplan/codec.hpp"

#include <gtest/gtest.h>

#include <random>

#include "layoutplan/io.hpp"
#include "test_util.hpp"

namespace layoutplan {
namespace {

using testing::make_element;
using testing::make_layout;

// Bound on coordinate error after a round trip, as a canvas fraction. The
// 1e-12 term absorbs binary floating point in the fraction arithmetic.
double roundtrip_bound(LayoutFormat f) {
  const auto bins = f.bins();
  return (bins ? 1.0 / (2.0 * *bins) : 0.0005) + 1e-12;
}

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize(0.5, 128), 64);
  EXPECT_EQ(quantize(1.0, 128), 128);
  EXPECT_EQ(quantize(0.333, 128), 43);  // 42.624 rounds up
  EXPECT_EQ(quantize(0.0, 1024), 0);
  EXPECT_EQ(quantize(1.0 + 1e-10, 128), 128);
  EXPECT_DOUBLE_EQ(dequantize(64, 128), 0.5);
}

TEST(Quantize, RoundHalfUp) {
  EXPECT_EQ(quantize(1.0 / 256.0, 128), 1);  // exactly 0.5 bins
  EXPECT_EQ(quantize(3.0 / 256.0, 128), 2);  // exactly 1.5 bins
}

TEST(Quantize, OutOfDomain) {
  for (double x : {-0.01, 1.01, std::nan("")}) {
    try {
      quantize(x, 128);
      FAIL() << x;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kOutOfDomain);
    }
  }
}

TEST(Serialize, IntList128) {
  const Layout l = make_layout({make_element("a", "dog", 0, 0, 64, 64)});
  EXPECT_EQ(serialize(l, LayoutFormat::int128()), "dog: [0, 0, 64, 64]\n");
}

TEST(Serialize, Css128) {
  const Layout l = make_layout({make_element("a", "dog", 0, 0, 64, 64)});
  EXPECT_EQ(serialize(l, LayoutFormat::css128()),
            "dog { left: 0px; top: 0px; width: 64px; height: 64px }\n");
}

TEST(Serialize, OtherFormats) {
  const Layout l = make_layout({make_element("a", "dog", 0, 0, 64, 64),
                                make_element("b", "red car", 32, 96, 128, 128)});
  EXPECT_EQ(serialize(l, LayoutFormat::int1024()),
            "dog: [0, 0, 512, 512]\nred car: [256, 768, 1024, 1024]\n");
  EXPECT_EQ(serialize(l, LayoutFormat::float_list()),
            "dog: [0.000, 0.000, 0.500, 0.500]\nred car: [0.250, 0.750, 1.000, 1.000]\n");
  EXPECT_EQ(serialize(l, LayoutFormat::json_float()),
            "[\n"
            "  {\"label\": \"dog\", \"left\": 0.000, \"top\": 0.000, \"right\": 0.500, "
            "\"bottom\": 0.500},\n"
            "  {\"label\": \"red car\", \"left\": 0.250, \"top\": 0.750, \"right\": 1.000, "
            "\"bottom\": 1.000}\n"
            "]\n");
}

TEST(Serialize, EmptyLayoutIsEmptyText) {
  for (auto f : kAllFormats) EXPECT_EQ(serialize(Layout{}, f), "") << f.name();
}

TEST(Serialize, NonSquareCanvasQuantizesPerAxis) {
  const Layout l = make_layout({make_element("a", "title", 100, 75, 300, 150)}, 400, 300);
  EXPECT_EQ(serialize(l, LayoutFormat::int128()), "title: [32, 32, 96, 64]\n");
}

TEST(Serialize, EscapesDelimitersInLabels) {
  const Layout l = make_layout({make_element("a", "a:b{c}[d]", 0, 0, 64, 64)});
  EXPECT_EQ(serialize(l, LayoutFormat::int128()), "a-b-c--d-: [0, 0, 64, 64]\n");
  const ParseOutcome o =
      parse(serialize(l, LayoutFormat::css128()), LayoutFormat::css128(), 128, 128);
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o.layout->elements[0].label, "a-b-c--d-");
}

TEST(Serialize, Deterministic) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Layout l = testing::random_layout(rng);
    for (auto f : kAllFormats) EXPECT_EQ(serialize(l, f), serialize(l, f));
  }
}

TEST(Parse, TruncatedIsSyntaxError) {
  const ParseOutcome o = parse("dog: [0, 0, 64", LayoutFormat::int128(), 128, 128);
  ASSERT_FALSE(o.ok());
  EXPECT_EQ(*o.failure, FailureReason::kSyntaxError);
  EXPECT_EQ(o.raw_text, "dog: [0, 0, 64");
}

TEST(Parse, OutOfRange) {
  const ParseOutcome o = parse("dog: [0, 0, 200, 64]", LayoutFormat::int128(), 128, 128);
  ASSERT_FALSE(o.ok());
  EXPECT_EQ(*o.failure, FailureReason::kCoordinateOutOfRange);
}

TEST(Parse, UpperEndpointIsInRange) {
  const ParseOutcome o = parse("dog: [0, 0, 128, 128]", LayoutFormat::int128(), 128, 128);
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o.layout->elements[0].bbox, (BBox{0, 0, 128, 128}));
}

TEST(Parse, StripsFencesAndBlankLines) {
  const std::string text =
      "\n\n```css\n"
      "dog { left: 0px; top: 0px; width: 64px; height: 64px }\n"
      "cat {left:64px;top:64px;width:64px;height:64px;}\n"
      "```\n\n";
  const ParseOutcome o = parse(text, LayoutFormat::css128(), 128, 128);
  ASSERT_TRUE(o.ok()) << o.detail;
  ASSERT_EQ(o.layout->size(), 2u);
  EXPECT_EQ(o.layout->elements[1].label, "cat");
  EXPECT_EQ(o.layout->elements[1].bbox, (BBox{64, 64, 128, 128}));
  EXPECT_EQ(o.layout->elements[1].id, "e1");
  EXPECT_EQ(o.raw_text, text);
}

TEST(Parse, UnclosedFenceIsNotStripped) {
  const ParseOutcome o =
      parse("```\ndog: [0, 0, 64, 64]", LayoutFormat::int128(), 128, 128);
  ASSERT_FALSE(o.ok());
  EXPECT_EQ(*o.failure, FailureReason::kSyntaxError);
}

TEST(Parse, JsonEmptyArrayIsEmptyLayout) {
  const ParseOutcome o = parse("[]", LayoutFormat::json_float(), 128, 128);
  ASSERT_TRUE(o.ok());
  EXPECT_TRUE(o.layout->empty());
}

TEST(Parse, AssignsKindAndCanvas) {
  const ParseOutcome o = parse("hello: [0.0, 0.0, 0.5, 0.5]", LayoutFormat::float_list(),
                               400, 300, ElementKind::kTextSpan);
  ASSERT_TRUE(o.ok());
  EXPECT_EQ(o.layout->canvas_w, 400);
  EXPECT_EQ(o.layout->elements[0].kind, ElementKind::kTextSpan);
  EXPECT_EQ(o.layout->elements[0].bbox, (BBox{0, 0, 200, 150}));
}

TEST(Parse, CorruptedFixturesClassify) {
  const Json cases = Json::parse(read_file(LAYOUTPLAN_TEST_DATA "/corrupted_outputs.json"));
  ASSERT_EQ(cases.size(), 30u);
  for (const auto& c : cases) {
    const auto fmt = LayoutFormat::from_name(c["format"].get<std::string>());
    ASSERT_TRUE(fmt) << c["name"];
    const ParseOutcome o = parse(c["text"].get<std::string>(), *fmt, 128, 128);
    ASSERT_FALSE(o.ok()) << c["name"];
    EXPECT_EQ(to_string(*o.failure), c["expected"].get<std::string>())
        << c["name"] << ": " << o.detail;
  }
}

TEST(Parse, RoundTripProperty) {
  std::mt19937_64 rng(42);
  for (auto f : kAllFormats) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Layout l = testing::random_layout(rng, 8, trial % 3 ? 128.0 : 400.0,
                                              trial % 3 ? 128.0 : 300.0);
      const ParseOutcome o = parse(serialize(l, f), f, l.canvas_w, l.canvas_h);
      ASSERT_TRUE(o.ok()) << f.name() << " " << o.detail;
      ASSERT_EQ(o.layout->size(), l.size());
      EXPECT_TRUE(is_valid(*o.layout));
      EXPECT_LE(roundtrip_error(l, f), roundtrip_bound(f)) << f.name();
      for (std::size_t i = 0; i < l.size(); ++i) {
        EXPECT_EQ(o.layout->elements[i].label, l.elements[i].label);
      }
    }
  }
}

TEST(RoundtripError, ExactOnGrid) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> q(0, 128);
  for (int trial = 0; trial < 100; ++trial) {
    int a = q(rng), b = q(rng), c = q(rng), d = q(rng);
    const Layout l = make_layout({make_element("a", "dog", std::min(a, b), std::min(c, d),
                                               std::max(a, b), std::max(c, d))});
    EXPECT_EQ(roundtrip_error(l, LayoutFormat::int128()), 0.0);
    EXPECT_EQ(roundtrip_error(l, LayoutFormat::css128()), 0.0);
    EXPECT_EQ(roundtrip_error(l, LayoutFormat::int1024()), 0.0);
  }
}

TEST(Parse, NeverThrowsOnArbitraryBytes) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_int_distribution<int> byte(0, 255);
  const std::string alphabet = "dog:[],{} 0123456789.-px;leftopwidthbm\n\"`";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      s.push_back(trial % 2 ? static_cast<char>(byte(rng)) : alphabet[pick(rng)]);
    }
    for (auto f : kAllFormats) {
      ParseOutcome o;
      EXPECT_NO_THROW(o = parse(s, f, 128, 128));
      EXPECT_NE(o.ok(), o.failure.has_value());
      if (o.ok()) {
        EXPECT_TRUE(is_valid(*o.layout));
      }
    }
  }
}

TEST(LayoutFormat, NamesRoundTrip) {
  for (auto f : kAllFormats) EXPECT_EQ(LayoutFormat::from_name(f.name()), f);
  EXPECT_FALSE(LayoutFormat::from_name("html"));
  EXPECT_EQ(LayoutFormat::css128().bins(), 128);
  EXPECT_EQ(LayoutFormat::int1024().bins(), 1024);
  EXPECT_FALSE(LayoutFormat::float_list().bins());
  EXPECT_EQ(LayoutFormat::json_float().decimals(), 3);
}

}  // namespace
}  // namespace layoutplan
