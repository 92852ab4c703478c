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

// Hand-built source records that each trip exactly one filtering rule, with
// the expected outcome written out by hand.

#pragma once

#include <string>
#include <vector>

#include "layoutplan/dataset.hpp"

namespace layoutplan::testing {

struct RuleCase {
  std::string name;
  SourceRecord record;
  std::string drop_rule;               // empty when the record is kept
  std::vector<std::string> kept_ids;   // element ids of the emitted target
};

inline Element source_element(std::string id, std::string label, double l, double t,
                              double r, double b,
                              ElementKind kind = ElementKind::kVisualObject) {
  Element e;
  e.id = std::move(id);
  e.label = std::move(label);
  e.kind = kind;
  e.bbox = {l, t, r, b};
  return e;
}

inline SourceRecord coco_record(std::string id, std::vector<Element> elements) {
  SourceRecord r;
  r.id = std::move(id);
  r.source = SourceKind::kCoco;
  // A 128 x 128 source keeps coordinates unchanged by normalization.
  r.image_w = 128;
  r.image_h = 128;
  r.elements = std::move(elements);
  r.captions = {"a caption"};
  return r;
}

inline SourceRecord crello_design(std::string id, std::vector<Element> elements) {
  SourceRecord r;
  r.id = std::move(id);
  r.source = SourceKind::kCrello;
  r.image_w = 400;
  r.image_h = 300;
  r.elements = std::move(elements);
  r.captions = {"a poster"};
  return r;
}

inline SourceRecord text_record(std::string id, int words) {
  SourceRecord r;
  r.id = std::move(id);
  r.source = SourceKind::kVisualText;
  r.image_w = 512;
  r.image_h = 512;
  r.captions = {"a sign"};
  for (int i = 0; i < words; ++i) r.ocr_words.push_back("w" + std::to_string(i));
  if (words > 0) {
    std::string text;
    for (int i = 0; i < words; ++i) text += (i ? " w" : "w") + std::to_string(i);
    r.elements.push_back(source_element("t0", text, 10, 10, 500, 60, ElementKind::kTextSpan));
  }
  return r;
}

// A design element that passes both merge rules unless overridden.
inline Element design_element(std::string id, double area_fraction = 0.05,
                              double transparent = 0.1) {
  Element e = source_element(id, "graphic " + id, 0, 0, 40, 30, ElementKind::kImageAsset);
  e.attrs.area_fraction = area_fraction;
  e.attrs.transparent_fraction = transparent;
  return e;
}

inline std::vector<RuleCase> rule_cases() {
  std::vector<RuleCase> cases;

  cases.push_back({"kept_as_is",
                   coco_record("keep", {source_element("a", "dog", 0, 0, 50, 50),
                                        source_element("b", "cat", 60, 60, 120, 120)}),
                   "", {"a", "b"}});

  // Largest area 100*100 = 10000; 28*28 = 784 < 0.1 * 10000 while 28 >= 25.6.
  cases.push_back({"tau_a",
                   coco_record("tau-a", {source_element("big", "dog", 0, 0, 100, 100),
                                         source_element("small", "cup", 100, 100, 128, 128)}),
                   "", {"big"}});

  // 24 < 0.2 * 128 = 25.6 drops the 20x24 box; 30 >= 25.6 keeps the 20x30 one.
  // Areas 480 and 600 both clear tau_a.
  cases.push_back({"tau_l",
                   coco_record("tau-l", {source_element("short", "cup", 0, 0, 20, 24),
                                         source_element("tall", "kite", 30, 30, 50, 60)}),
                   "", {"tall"}});

  cases.push_back({"no_objects",
                   coco_record("tiny", {source_element("a", "cup", 0, 0, 20, 20)}),
                   "no_objects", {}});

  // Intersection 20*20 = 400, union 1600+1600-400 = 2800, IoU 1/7 > 0.01.
  cases.push_back({"tau_o",
                   coco_record("overlap", {source_element("a", "dog", 0, 0, 40, 40),
                                           source_element("b", "cat", 20, 20, 60, 60)}),
                   "overlap", {}});

  {
    SourceRecord r = coco_record("crowd", {source_element("a", "person", 0, 0, 50, 50),
                                           source_element("b", "person", 60, 60, 120, 120)});
    r.elements[1].attrs.is_crowd = true;
    cases.push_back({"is_crowd", r, "crowd", {}});
    r.id = "crowd-false";
    r.elements[1].attrs.is_crowd = false;
    cases.push_back({"is_crowd_false", r, "", {"a", "b"}});
  }

  cases.push_back({"crello_area",
                   crello_design("area", {design_element("keep"), design_element("tiny", 0.005)}),
                   "", {"keep"}});
  cases.push_back(
      {"crello_transparent",
       crello_design("transparent",
                     {design_element("keep"), design_element("ghost", 0.05, 0.75)}),
       "", {"keep"}});
  {
    std::vector<Element> eleven, ten;
    std::vector<std::string> ten_ids;
    for (int i = 0; i < 11; ++i) eleven.push_back(design_element("x" + std::to_string(i)));
    for (int i = 0; i < 10; ++i) {
      ten.push_back(design_element("x" + std::to_string(i)));
      ten_ids.push_back("x" + std::to_string(i));
    }
    // Merged elements do not count toward the limit.
    std::vector<Element> ten_plus_merged = ten;
    ten_plus_merged.push_back(design_element("tiny", 0.001));
    cases.push_back({"crello_eleven", crello_design("eleven", eleven), "crello_elements", {}});
    cases.push_back({"crello_ten", crello_design("ten", ten), "", ten_ids});
    cases.push_back({"crello_ten_plus_merged", crello_design("ten-merged", ten_plus_merged), "",
                     ten_ids});
  }

  cases.push_back({"ocr_eleven", text_record("ocr-11", 11), "ocr_words", {}});
  cases.push_back({"ocr_ten", text_record("ocr-10", 10), "", {"t0"}});
  return cases;
}

}  // namespace layoutplan::testing
