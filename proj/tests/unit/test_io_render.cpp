#include <gtest/gtest.h>

#include <cmath>

#include "daql/errors.hpp"
#include "daql/io.hpp"
#include "daql/render.hpp"

using namespace daql;

TEST(Io, Sha256KnownDigest) {
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 0.8, 1.0 / 3.0, -2.5e-300, 1e22}) EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(0.8), "0.8");
}

TEST(Io, CsvParsingAndErrors) {
  const auto t = io::parse_csv("a,b\r\n1,2\n\n3,x\n");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(0, t.column("b")), 2.0);
  EXPECT_THROW(t.number(1, 1), FormatError);
  EXPECT_THROW(t.column("c"), FormatError);
  EXPECT_THROW(io::parse_csv("a,b\n1\n"), FormatError);
  EXPECT_THROW(io::parse_csv(""), FormatError);
}

TEST(Io, ByteReaderChecksLength) {
  std::string buf;
  io::append_le<std::uint32_t>(buf, 0x01020304u);
  io::append_le<double>(buf, 1.5);
  io::ByteReader r(buf);
  EXPECT_EQ(r.get<std::uint32_t>(), 0x01020304u);
  EXPECT_EQ(buf[0], 0x04);
  EXPECT_EQ(r.get<double>(), 1.5);
  EXPECT_THROW(r.get<std::uint8_t>(), FormatError);
}

TEST(Io, WriteFileCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "daql_io_test";
  std::filesystem::remove_all(dir);
  io::write_file(dir / "a" / "b.txt", "hello");
  EXPECT_EQ(io::read_file(dir / "a" / "b.txt"), "hello");
  std::filesystem::remove_all(dir);
}

TEST(Render, ColorEndpointsAndNan) {
  EXPECT_EQ(render::color(0.0), (render::Rgb{0, 0, 255}));
  EXPECT_EQ(render::color(1.0), (render::Rgb{255, 0, 0}));
  EXPECT_EQ(render::color(std::nan("")), (render::Rgb{0, 0, 0}));
}

TEST(Render, TwoByTwoCorners) {
  const auto grid = render::grid_from_csv(io::parse_csv("x,y,value\n0,0,0\n1,0,1\n0,1,2\n1,1,3\n"));
  const auto img = render::heatmap(grid, 2);
  EXPECT_EQ(img.width, 4);
  EXPECT_EQ(img.height, 4);
  EXPECT_EQ(img.min, 0.0);
  EXPECT_EQ(img.max, 3.0);
  const std::string header = "P6\n4 4\n255\n";
  ASSERT_EQ(img.ppm.substr(0, header.size()), header);
  ASSERT_EQ(img.ppm.size(), header.size() + 48);
  const auto px = [&](int col, int row) {
    const auto* p = reinterpret_cast<const unsigned char*>(img.ppm.data() + header.size() + 3 * (row * 4 + col));
    return render::Rgb{p[0], p[1], p[2]};
  };
  // Top rows hold y = 1.
  EXPECT_EQ(px(0, 0), render::color(2.0 / 3.0));
  EXPECT_EQ(px(3, 1), (render::Rgb{255, 0, 0}));
  EXPECT_EQ(px(0, 3), (render::Rgb{0, 0, 255}));
  EXPECT_EQ(px(3, 2), render::color(1.0 / 3.0));
}

TEST(Render, ConstantGridIsUniform) {
  const auto grid = render::grid_from_csv(io::parse_csv("x,y,value\n0,0,5\n1,0,5\n0,1,5\n1,1,5\n"));
  const auto img = render::heatmap(grid, 3);
  const std::string body = img.ppm.substr(img.ppm.size() - 3 * 36);
  for (std::size_t i = 0; i < body.size(); i += 3) EXPECT_EQ(body.substr(i, 3), body.substr(0, 3));
}

TEST(Render, RejectsRaggedAndDuplicateGrids) {
  EXPECT_THROW(render::grid_from_csv(io::parse_csv("x,y,value\n0,0,1\n1,0,1\n0,1,1\n")), FormatError);
  EXPECT_THROW(render::grid_from_csv(io::parse_csv("x,y,value\n0,0,1\n0,0,1\n")), FormatError);
  EXPECT_THROW(render::grid_from_csv(io::parse_csv("x,y,loss\n0,0,1\n")), FormatError);
}
