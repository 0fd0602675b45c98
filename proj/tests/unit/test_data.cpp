// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "trojan_game/data.hpp"
#include "trojan_game/error.hpp"

using namespace trojan_game;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("tg_data_" + name);
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

}  // namespace

TEST_CASE("embed_trigger is x(1-m) + p m") {
  TriggerSpec t{Vector::Zero(4), Vector::Zero(4), TargetRule::fixed(0)};
  t.mask << 0.0, 0.5, 1.0, 0.25;
  t.pattern << 0.9, 0.9, 0.9, 0.1;
  Vector x(4);
  x << 0.2, 0.2, 0.2, 0.8;
  const Vector y = embed_trigger(x, t);
  for (int j = 0; j < 4; ++j) {
    CHECK(y(j) == doctest::Approx(x(j) * (1 - t.mask(j)) + t.pattern(j) * t.mask(j)));
  }
}

TEST_CASE("block trigger at zero transparency writes the pattern exactly") {
  const TriggerSpec t = block_trigger(8, 2, 3, 0.7, 0.0, TargetRule::fixed(1));
  const Vector y = embed_trigger(Vector::Constant(8, 0.1), t);
  for (int j = 0; j < 8; ++j) CHECK(y(j) == (j >= 2 && j < 5 ? 0.7 : 0.1));
  CHECK_THROWS_AS(block_trigger(8, 6, 3, 0.7, 0.0, TargetRule::fixed(1)), ConfigError);
}

TEST_CASE("target rules") {
  CHECK(TargetRule::fixed(2).apply(0, 4) == 2);
  CHECK(TargetRule::all_to_all().apply(3, 4) == 0);
  CHECK(TargetRule::all_to_all().apply(1, 4) == 2);
}

TEST_CASE("poison_subset touches only the listed indices") {
  const Dataset d = make_blobs(3, 6, 10, 0.1, 1);
  const TriggerSpec t = block_trigger(6, 0, 2, 1.0, 0.0, TargetRule::all_to_all());
  const Dataset p = poison_subset(d, {1, 4}, t);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool hit = i == 1 || i == 4;
    CHECK(same_values(p.samples[i].x, hit ? embed_trigger(d.samples[i].x, t) : d.samples[i].x));
    CHECK(p.samples[i].y == (hit ? (d.samples[i].y + 1) % 3 : d.samples[i].y));
  }
  CHECK_THROWS_AS(poison_subset(d, {999}, t), ShapeError);
}

TEST_CASE("blobs are deterministic and inside the unit cube") {
  const Dataset a = make_blobs(3, 5, 20, 0.1, 7), b = make_blobs(3, 5, 20, 0.1, 7);
  CHECK(a == b);
  CHECK_FALSE(a == make_blobs(3, 5, 20, 0.1, 8));
  for (const Sample& s : a.samples) {
    CHECK(s.x.minCoeff() >= 0.0);
    CHECK(s.x.maxCoeff() <= 1.0);
  }
}

TEST_CASE("split is stratified and disjoint") {
  const Dataset d = make_blobs(2, 4, 40, 0.1, 2);
  auto [train, test] = split(d, 0.25, 3);
  CHECK(train.size() + test.size() == d.size());
  int c0 = 0;
  for (const Sample& s : test.samples) c0 += s.y == 0;
  CHECK(c0 == 10);
  CHECK_THROWS_AS(split(d, 1.0, 3), ConfigError);
}

TEST_CASE("jumbo draws respect their ranges") {
  JumboParams jp;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const JumboDraw dr = sample_jumbo_trigger(jp, 16, 3, s);
    int active = 0;
    for (int j = 0; j < 16; ++j) active += dr.trigger.mask(j) > 0.0;
    CHECK(active >= jp.mask_size_min);
    CHECK(active <= jp.mask_size_max);
    CHECK(dr.poison_ratio >= jp.poison_ratio_lo);
    CHECK(dr.poison_ratio <= jp.poison_ratio_hi);
    CHECK(dr.transparency <= jp.transparency_hi);
    if (dr.transparency == 0.0) {
      const Vector y = embed_trigger(Vector::Constant(16, 0.5), dr.trigger);
      for (int j = 0; j < 16; ++j) {
        if (dr.trigger.mask(j) > 0.0) CHECK(y(j) == dr.trigger.pattern(j));
      }
    }
  }
  jp.mask_size_max = 40;
  CHECK_THROWS_AS(jp.validate(16), ConfigError);
}

TEST_CASE("CSV round-trip is exact") {
  const Dataset d = make_blobs(3, 4, 5, 0.2, 11);
  const auto p = std::filesystem::temp_directory_path() / "tg_data_roundtrip.csv";
  save_csv(d, p);
  CHECK(load_csv(p) == d);
}

TEST_CASE("CSV directives, CRLF and scaling") {
  const auto p = temp_file("crlf.csv", "#classes=3\r\n#scale=auto\r\nf0,f1,label\r\n2,4,0\r\n4,6,2\r\n");
  const Dataset d = load_csv(p);
  CHECK(d.num_classes == 3);
  CHECK(d.feature_dim == 2);
  CHECK(d.samples[0].x(0) == doctest::Approx(0.0));
  CHECK(d.samples[1].x(1) == doctest::Approx(1.0));
  CHECK(d.samples[0].x(1) == doctest::Approx(0.5));
}

TEST_CASE("CSV errors name the line") {
  auto line_of = [](const std::string& body) {
    try {
      load_csv(temp_file("bad.csv", body));
    } catch (const ParseError& e) {
      return static_cast<long>(e.line());
    }
    return -1L;
  };
  CHECK(line_of("f0,f1,label\n0.1,0.2,0\n0.1,0\n") == 3);
  CHECK(line_of("f0,f1,label\n0.1,abc,0\n") == 2);
  CHECK(line_of("f0,f1,label\n0.1,0.2,-1\n") == 2);
  CHECK(line_of("#classes=2\nf0,f1,label\n0.1,0.2,5\n") == 3);
  CHECK(line_of("f0,x1,label\n") == 1);
  CHECK(line_of("f0,f1,label\n") >= 1);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), IoError);
}

TEST_CASE("dataset validation") {
  Dataset d{{}, 2, 2};
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.samples.push_back({Vector::Zero(2), 3});
  CHECK_THROWS_AS(d.validate(), ConfigError);
}
