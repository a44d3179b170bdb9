/**
 * Copyright 2026 The npers Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "npers/conv.hpp"
#include "npers/io.hpp"
#include "test_support.hpp"

namespace npers {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "npers_io_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Snapshot, MinimalDenseFile) {
  const auto s = io::snapshot_from_text(
      R"({"format": "np-snapshot-v1", "step": 4, "layers": [{"rows": 2, "cols": 2, "values": [1, 0.5, 0.5, 0.5]}]})");
  EXPECT_EQ(s.step, 4);
  ASSERT_EQ(s.layers.size(), 1u);
  EXPECT_EQ(testing::values_of(s.layers[0]), (std::vector<double>{1, 0.5, 0.5, 0.5}));
}

TEST(Snapshot, SparseUnrolledConvExample) {
  NetworkSnapshot net;
  net.layers.push_back(unroll_filter(ConvFilter(2, 2, {4, 3, 2, 1}), {3, 3, 0}));
  const auto text = io::dump_json(io::snapshot_to_json(net));
  EXPECT_NE(text.find("\"entries\""), std::string::npos);
  const auto back = io::snapshot_from_text(text);
  EXPECT_EQ(back.layers[0].edge_count(), 16u);
  EXPECT_EQ(back, net);
}

TEST(Snapshot, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  NetworkSnapshot net;
  net.step = 17;
  for (int k = 0; k < 4; ++k) net.layers.push_back(testing::random_layer(rng, testing::WeightKind::normal));
  // Values whose shortest decimal form needs all 17 digits.
  net.layers.push_back(WeightedBipartiteLayer::dense(1, 3, {0.1 + 0.2, 1.0 / 3.0, 5e-324}));
  const auto path = scratch("round_trip.json");
  io::save_snapshot(net, path);
  EXPECT_EQ(io::load_snapshot(path), net);
}

TEST(Snapshot, TamperedLengthIsDimensionMismatch) {
  try {
    io::snapshot_from_text(
        R"({"format": "np-snapshot-v1", "layers": [{"rows": 2, "cols": 2, "values": [1, 2, 3]}]})");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
  }
}

TEST(Snapshot, ParseErrorsCarryLineNumbers) {
  try {
    io::snapshot_from_text("{\n\"format\": \"np-snapshot-v1\",\n\"layers\": [,]\n}", "f.json");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("f.json:3"), std::string::npos) << e.what();
  }
}

TEST(Snapshot, RejectsBadContent) {
  EXPECT_THROW(io::snapshot_from_text(R"({"format": "other", "layers": []})"), FormatError);
  EXPECT_THROW(io::snapshot_from_text(R"({"format": "np-snapshot-v1", "layers": [{"rows": 1, "cols": 1, "values": [null]}]})"),
               FormatError);
  EXPECT_THROW(io::snapshot_from_text(R"({"format": "np-snapshot-v1", "layers": [{"rows": 1, "cols": 2, "entries": [[0, 5, 1.0]]}]})"),
               FormatError);
  EXPECT_THROW(io::load_snapshot(scratch("does_not_exist.json")), FormatError);
}

TEST(Snapshot, StrictFlagChecksChaining) {
  const std::string loose =
      R"({"format": "np-snapshot-v1", %s "layers": [{"rows": 2, "cols": 3, "values": [1,2,3,4,5,6]},
          {"rows": 1, "cols": 3, "values": [1,2,3]}]})";
  auto with = [&](const std::string& flag) {
    std::string t = loose;
    t.replace(t.find("%s"), 2, flag);
    return t;
  };
  EXPECT_NO_THROW(io::snapshot_from_text(with("")));
  EXPECT_THROW(io::snapshot_from_text(with("\"strict\": true,")), FormatError);
}

TEST(Json, SeventeenDigitsAndFixedOrder) {
  io::Json j;
  j["b"] = 0.1;
  j["a"] = 1.0 / 3.0;
  const auto text = io::dump_json(j, -1);
  EXPECT_EQ(text, "{\"b\":0.10000000000000001,\"a\":0.33333333333333331}");
}

TEST(Traces, ParsesAndGroupsMetrics) {
  const auto t = io::traces_from_text(
      "step,metric_name,value\n0,val_loss,1.5\n0,np_mean_normalized,0.25\n4,val_loss,1.25\n4,np_mean_normalized,nan\n");
  EXPECT_EQ(t.series().size(), 2u);
  EXPECT_EQ(t.trace("val_loss").direction(), Direction::minimize);
  EXPECT_EQ(t.trace("val_loss").final_value(), 1.25);
  EXPECT_TRUE(std::isnan(t.trace("np_mean_normalized").final_value()));
}

TEST(Traces, AcceptsOtherDelimiters) {
  const auto tab = io::traces_from_text("step\tmetric_name\tvalue\n1\ttest_accuracy\t0.5\n");
  const auto semi = io::traces_from_text("step;metric_name;value\r\n1;test_accuracy;0.5\r\n");
  EXPECT_EQ(tab, semi);
}

TEST(Traces, RepeatedStepKeepsLastValue) {
  const auto t = io::traces_from_text("step,metric_name,value\n0,val_loss,2\n0,val_loss,1\n1,val_loss,0.5\n");
  const auto trace = t.trace("val_loss");
  ASSERT_EQ(trace.samples().size(), 2u);
  EXPECT_EQ(trace.samples()[0].value, 1.0);
}

TEST(Traces, Errors) {
  EXPECT_THROW(io::traces_from_text(""), FormatError);
  EXPECT_THROW(io::traces_from_text("step,name,value\n"), FormatError);
  EXPECT_THROW(io::traces_from_text("step,metric_name,value\n0,accuracy,1\n"), FormatError);
  EXPECT_THROW(io::traces_from_text("step,metric_name,value\nx,val_loss,1\n"), FormatError);
  EXPECT_THROW(io::traces_from_text("step,metric_name,value\n0,val_loss,1,2\n"), FormatError);
  EXPECT_THROW(io::traces_from_text("step;metric_name;value\n0;val_loss;1,5\n"), FormatError);
  EXPECT_THROW(io::traces_from_text("step,metric_name,value\n3,val_loss,1\n2,val_loss,1\n"), FormatError);
  EXPECT_THROW(io::traces_from_text("step,metric_name,value\n3,val_loss,abc\n"), FormatError);
}

TEST(Traces, RoundTrip) {
  TraceTable t;
  t.add("val_loss", 0, 0.1 + 0.2);
  t.add("val_loss", 4, 1e-300);
  t.add("test_accuracy", 0, 0.75);
  const auto path = scratch("trace.csv");
  io::save_traces(t, path);
  EXPECT_EQ(io::load_traces(path), t);
}

TEST(Matrix, DelimitersAndComments) {
  const auto m = io::matrix_from_text("# filter\n4 3\n2;1\n");
  EXPECT_EQ(m.rows, 2u);
  EXPECT_EQ(m.values, (std::vector<double>{4, 3, 2, 1}));
  EXPECT_THROW(io::matrix_from_text("1,2\n3\n"), FormatError);
  EXPECT_THROW(io::matrix_from_text("# nothing\n"), FormatError);
  EXPECT_THROW(io::matrix_from_text("1,inf\n"), FormatError);
}

TEST(Files, AtomicWriteCreatesDirectories) {
  const auto path = scratch("nested/dir/out.txt");
  io::write_file_atomic(path, "hello");
  EXPECT_EQ(io::read_file(path), "hello");
  io::write_file_atomic(path, "again");
  EXPECT_EQ(io::read_file(path), "again");
}

}  // namespace
}  // namespace npers
