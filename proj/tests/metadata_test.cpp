#include <string>

#include <gtest/gtest.h>

#include "slicehub/error.hpp"
#include "slicehub/interpolation.hpp"
#include "slicehub/metadata.hpp"
#include "slicehub/zip.hpp"
#include "support.hpp"

namespace slicehub {
namespace {

using testing::cube;
using testing::synthetic_grid;

SliceGrid mixed_grid() {
  const SliceGrid full = synthetic_grid(compute_metrics(cube(20.0)), build_axes(16, 16));
  SliceGrid partial(full.axes());
  for (const CellIndex c : sub_lattice(full.axes(), 5, 5)) partial.at(c) = full.at(c);
  return interpolate_grid(partial);
}

TEST(Metadata, QuantizesToOneDecimal) {
  EXPECT_DOUBLE_EQ(quantize(1.26), 1.3);
  EXPECT_DOUBLE_EQ(quantize(1234.04), 1234.0);
  EXPECT_DOUBLE_EQ(quantize(0.0), 0.0);
}

TEST(Metadata, RoundTrip) {
  const MetadataDocument doc = make_document("abc", "um3", "pla", mixed_grid());
  const MetadataDocument back = parse_document(serialize(doc));
  EXPECT_EQ(back, doc);
  EXPECT_EQ(serialize(back), serialize(doc));
  EXPECT_EQ(count_status(back, ResultStatus::Sliced), 25u);
  EXPECT_EQ(count_status(back, ResultStatus::Interpolated), 231u);
}

TEST(Metadata, GridRoundTripIsQuantized) {
  const SliceGrid grid = mixed_grid();
  const SliceGrid back = to_grid(make_document("abc", "um3", "pla", grid));
  ASSERT_EQ(back.axes(), grid.axes());
  for (const CellIndex idx : grid.all_cells()) {
    EXPECT_EQ(back.at(idx)->status, grid.at(idx)->status);
    EXPECT_NEAR(back.at(idx)->print_time_s, grid.at(idx)->print_time_s, 0.05 + 1e-9);
    EXPECT_NEAR(back.at(idx)->material_mm3, grid.at(idx)->material_mm3, 0.05 + 1e-9);
  }
}

TEST(Metadata, EmptyCellsAreOmitted) {
  SliceGrid grid(build_axes(4, 4));
  grid.at({1, 2}) = SlicingResult::sliced(5, 6);
  const MetadataDocument doc = make_document("m", "p", "x", grid);
  ASSERT_EQ(doc.cells.size(), 1u);
  EXPECT_EQ(to_grid(doc).empty_count(), 15u);
}

TEST(Metadata, FullySlicedDocumentUnderSixteenKilobytes) {
  const SliceGrid grid = synthetic_grid(compute_metrics(cube(80.0)), build_axes(16, 16));
  const std::string text = serialize(make_document("0123456789abcdef", "raise3d-n2", "nylon", grid));
  EXPECT_LE(text.size(), 16u * 1024u);
}

TEST(Metadata, MalformedInputRejected) {
  for (const std::string bad : {"", "{", "[]", R"({"v":1})",
                                R"({"v":1,"model":"m","printer":"p","material":"x","res":[0.1],"scl":[1],"cells":[[0,0,1,1,"Q"]]})",
                                R"({"v":1,"model":"m","printer":"p","material":"x","res":[0.1],"scl":[1],"cells":[[0,0,1]]})"}) {
    try {
      parse_document(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidArgument) << bad;
    }
  }
}

TEST(Metadata, DuplicateCellsRejected) {
  MetadataDocument doc = make_document("m", "p", "x", mixed_grid());
  doc.cells.push_back(doc.cells.front());
  try {
    to_grid(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(Zip, RoundTrip) {
  const std::string binary("\0\1\2\3\xff", 5);
  const std::vector<ZipEntry> entries = {{"model.stl", binary}, {"meta.json", "{}"}, {"empty", ""}};
  const std::vector<ZipEntry> back = read_zip(write_zip(entries));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].name, entries[i].name);
    EXPECT_EQ(back[i].data, entries[i].data);
  }
}

TEST(Zip, Deterministic) {
  const std::vector<ZipEntry> entries = {{"a.txt", "hello"}};
  EXPECT_EQ(write_zip(entries), write_zip(entries));
  EXPECT_EQ(write_zip(entries).substr(0, 4), std::string("PK\3\4"));
}

TEST(Zip, GarbageRejected) {
  try {
    read_zip("definitely not a zip archive");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

}  // namespace
}  // namespace slicehub
