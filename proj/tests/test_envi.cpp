#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "badband/envi.hpp"
#include "oracles.hpp"

using namespace badband;

namespace {

const char* kIndianPinesLike = R"(ENVI
description = {
  AVIRIS scene, 145 x 145, 220 bands}
samples = 145
lines   = 145
bands   = 220
header offset = 0
file type = ENVI Standard
data type = 2
interleave = bsq
sensor type = AVIRIS
byte order = 0
)";

std::vector<std::byte> doubles_le(std::initializer_list<double> values) {
  std::vector<std::byte> out(values.size() * 8);
  std::size_t k = 0;
  for (double v : values) std::memcpy(out.data() + 8 * k++, &v, 8);
  return out;
}

EnviHeader tiny_header(std::size_t s, std::size_t l, std::size_t b, Interleave il, DataType t) {
  EnviHeader h;
  h.samples = s;
  h.lines = l;
  h.bands = b;
  h.interleave = il;
  h.data_type = t;
  return h;
}

}  // namespace

TEST(ParseEnviHeader, ReadsDimensionsAndPreservesUnknownKeys) {
  const EnviHeader h = parse_envi_header(kIndianPinesLike);
  EXPECT_EQ(h.samples, 145u);
  EXPECT_EQ(h.lines, 145u);
  EXPECT_EQ(h.bands, 220u);
  EXPECT_EQ(h.data_type, DataType::I16);
  EXPECT_EQ(h.interleave, Interleave::BSQ);
  EXPECT_EQ(h.byte_order, ByteOrder::Little);
  ASSERT_EQ(h.extra.size(), 2u);
  EXPECT_EQ(h.extra[0].first, "description");
  EXPECT_EQ(h.extra[1].first, "sensor type");
  EXPECT_EQ(h.extra[1].second, "AVIRIS");
}

TEST(ParseEnviHeader, KeysAreCaseInsensitive) {
  const EnviHeader h = parse_envi_header(
      "ENVI\nSamples = 2\nLINES = 3\nBands=1\nData  Type = 4\nInterleave = BIP\nByte Order = 1\n");
  EXPECT_EQ(h.samples, 2u);
  EXPECT_EQ(h.lines, 3u);
  EXPECT_EQ(h.data_type, DataType::F32);
  EXPECT_EQ(h.interleave, Interleave::BIP);
  EXPECT_EQ(h.byte_order, ByteOrder::Big);
}

TEST(ParseEnviHeader, MissingInterleaveIsAnError) {
  try {
    parse_envi_header("ENVI\nsamples = 1\nlines = 1\nbands = 1\ndata type = 4\nbyte order = 0\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("interleave"), std::string::npos);
  }
}

TEST(ParseEnviHeader, RejectsBadMagicTypeAndBraces) {
  EXPECT_THROW(parse_envi_header("samples = 1\n"), InputError);
  EXPECT_THROW(parse_envi_header("ENVI\nsamples = 1\nlines = 1\nbands = 1\ndata type = 6\n"
                                 "interleave = bsq\nbyte order = 0\n"),
               InputError);
  try {
    parse_envi_header("ENVI\nsamples = 1\nwavelength = {1, 2,\n3\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    parse_envi_header("ENVI\nsamples = 1\nthis line has no equals sign\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseEnviHeader, MultiLineListsAndWavelengthUnits) {
  const EnviHeader h = parse_envi_header(
      "ENVI\nsamples = 1\nlines = 1\nbands = 3\ndata type = 5\ninterleave = bsq\nbyte order = 0\n"
      "wavelength units = Nanometers\nwavelength = {400.0,\n 500.0,\n 2500.0}\n"
      "band names = {a, b, c}\nbbl = {1, 0, 1.0}\n");
  ASSERT_TRUE(h.wavelengths);
  EXPECT_DOUBLE_EQ((*h.wavelengths)[0], 0.4);
  EXPECT_DOUBLE_EQ((*h.wavelengths)[2], 2.5);
  EXPECT_EQ(*h.band_names, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(*h.bbl, (std::vector<bool>{true, false, true}));
}

TEST(ParseEnviHeader, WavelengthListOfWrongLengthIsAnError) {
  EXPECT_THROW(parse_envi_header("ENVI\nsamples = 1\nlines = 1\nbands = 3\ndata type = 5\n"
                                 "interleave = bsq\nbyte order = 0\nwavelength = {1, 2}\n"),
               InputError);
}

TEST(ParseEnviHeader, FormatThenParseIsStable) {
  EnviHeader h = tiny_header(3, 2, 2, Interleave::BIL, DataType::U16);
  h.byte_order = ByteOrder::Big;
  h.header_offset = 16;
  h.wavelengths = std::vector<double>{0.4123456789012345, 2.5};
  h.bbl = std::vector<bool>{true, false};
  h.extra = {{"sensor type", "AVIRIS"}};
  const std::string text = format_envi_header(h);
  const EnviHeader back = parse_envi_header(text);
  EXPECT_EQ(format_envi_header(back), text);
  EXPECT_EQ(back.wavelengths, h.wavelengths);
  EXPECT_EQ(back.header_offset, 16u);
  // Canonical order: dimensions come first.
  EXPECT_LT(text.find("samples"), text.find("data type"));
  EXPECT_LT(text.find("byte order"), text.find("wavelength"));
}

TEST(ReadCube, SinglePixelBipF64) {
  const EnviHeader h = tiny_header(1, 1, 3, Interleave::BIP, DataType::F64);
  const HyperspectralCube cube = read_cube(h, doubles_le({2.0, 4.0, 6.0}));
  EXPECT_EQ(cube.bands(), 3u);
  EXPECT_EQ(cube.band(0)[0], 2.0);
  EXPECT_EQ(cube.band(1)[0], 4.0);
  EXPECT_EQ(cube.band(2)[0], 6.0);
}

TEST(ReadCube, TruncatedPayloadIsAnError) {
  const EnviHeader h = tiny_header(1, 1, 3, Interleave::BIP, DataType::F64);
  auto bytes = doubles_le({2.0, 4.0, 6.0});
  bytes.pop_back();
  EXPECT_THROW(read_cube(h, bytes), InputError);
}

TEST(ReadCube, NonFiniteFloatIsAnError) {
  const EnviHeader h = tiny_header(1, 1, 2, Interleave::BSQ, DataType::F64);
  EXPECT_THROW(read_cube(h, doubles_le({1.0, std::numeric_limits<double>::infinity()})), InputError);
}

TEST(ReadCube, AllInterleavesDecodeToTheSameCube) {
  // 2 lines x 2 samples x 2 bands; value = 100 b + 10 l + s, laid out by hand.
  auto value = [](int b, int l, int s) { return 100.0 * b + 10.0 * l + s; };
  std::vector<double> bsq, bil, bip;
  for (int b = 0; b < 2; ++b)
    for (int l = 0; l < 2; ++l)
      for (int s = 0; s < 2; ++s) bsq.push_back(value(b, l, s));
  for (int l = 0; l < 2; ++l)
    for (int b = 0; b < 2; ++b)
      for (int s = 0; s < 2; ++s) bil.push_back(value(b, l, s));
  for (int l = 0; l < 2; ++l)
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < 2; ++b) bip.push_back(value(b, l, s));
  auto bytes = [](const std::vector<double>& v) {
    std::vector<std::byte> out(v.size() * 8);
    std::memcpy(out.data(), v.data(), out.size());
    return out;
  };
  const auto a = read_cube(tiny_header(2, 2, 2, Interleave::BSQ, DataType::F64), bytes(bsq));
  const auto b = read_cube(tiny_header(2, 2, 2, Interleave::BIL, DataType::F64), bytes(bil));
  const auto c = read_cube(tiny_header(2, 2, 2, Interleave::BIP, DataType::F64), bytes(bip));
  EXPECT_EQ(a.data(), b.data());
  EXPECT_EQ(a.data(), c.data());
  EXPECT_EQ(a.data()(1, 3), value(1, 1, 1));  // band 2, line 2, sample 2
}

TEST(ReadCube, HonorsBigEndianAndHeaderOffset) {
  EnviHeader h = tiny_header(2, 1, 1, Interleave::BSQ, DataType::I16);
  h.byte_order = ByteOrder::Big;
  h.header_offset = 3;
  const std::vector<std::byte> payload{std::byte{0xAA}, std::byte{0xBB}, std::byte{0xCC},
                                       std::byte{0x01}, std::byte{0x02},   // 258
                                       std::byte{0xFF}, std::byte{0xFE}};  // -2
  const auto cube = read_cube(h, payload);
  EXPECT_EQ(cube.band(0)[0], 258.0);
  EXPECT_EQ(cube.band(0)[1], -2.0);
}

TEST(WriteCube, F64RoundTripIsBitIdenticalForEveryLayoutAndOrder) {
  const auto cube = oracle::random_cube(3, 3, 4, 17, 1.0);
  for (Interleave il : {Interleave::BSQ, Interleave::BIL, Interleave::BIP})
    for (ByteOrder bo : {ByteOrder::Little, ByteOrder::Big}) {
      const EnviFile f = write_cube(cube, il, DataType::F64, bo);
      const auto back = read_cube(parse_envi_header(f.header_text), f.payload);
      EXPECT_TRUE((back.data().array() == cube.data().array()).all()) << to_string(il);
    }
}

TEST(WriteCube, IntegerQuantizationRoundsHalfAwayFromZero) {
  const auto cube = HyperspectralCube::from_band_major(1, 4, 1, std::vector<double>{0.5, 1.49, -2.5, 7.0});
  const EnviFile f = write_cube(cube, Interleave::BSQ, DataType::I16);
  const auto back = read_cube(f.header, f.payload);
  EXPECT_EQ(back.band(0)[0], 1.0);
  EXPECT_EQ(back.band(0)[1], 1.0);
  EXPECT_EQ(back.band(0)[2], -3.0);
  EXPECT_EQ(back.band(0)[3], 7.0);
}

TEST(WriteCube, UnrepresentableValueIsAnError) {
  const auto cube = HyperspectralCube::from_band_major(1, 1, 1, std::vector<double>{300.0});
  EXPECT_THROW(write_cube(cube, Interleave::BSQ, DataType::U8), InputError);
  const auto neg = HyperspectralCube::from_band_major(1, 1, 1, std::vector<double>{-1.0});
  EXPECT_THROW(write_cube(neg, Interleave::BSQ, DataType::U16), InputError);
  EXPECT_NO_THROW(write_cube(cube, Interleave::BSQ, DataType::U16));
}

TEST(WriteCube, BsqFileReadBackAsBipAfterConversion) {
  const auto cube = oracle::random_cube(2, 3, 3, 4);
  const EnviFile bsq = write_cube(cube, Interleave::BSQ, DataType::F64);
  const auto mid = read_cube(bsq.header, bsq.payload);
  const EnviFile bip = write_cube(mid, Interleave::BIP, DataType::F64);
  EXPECT_NE(bip.payload, bsq.payload);
  const auto back = read_cube(parse_envi_header(bip.header_text), bip.payload);
  EXPECT_EQ(back.data(), cube.data());
}

TEST(EnviFiles, WriteThenReadFromDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "badband_envi_test";
  std::filesystem::create_directories(dir);
  BandMatrix data(2, 4);
  data << 1, 2, 3, 4, 5, 6, 7, 8;
  const HyperspectralCube cube(2, 2, data, std::vector<double>{0.45, 0.55});
  const auto hdr = write_envi(dir / "cube", cube, Interleave::BIL, DataType::F32);
  const EnviDataset ds = read_envi(hdr);
  EXPECT_EQ(ds.cube.data(), cube.data());
  EXPECT_EQ(ds.header.interleave, Interleave::BIL);
  EXPECT_EQ(ds.data_path.filename(), "cube.img");
  const EnviDataset via_data = read_envi(dir / "cube.img");
  EXPECT_EQ(via_data.cube.data(), cube.data());
  EXPECT_THROW(read_envi(dir / "missing.hdr"), InputError);
  std::filesystem::remove_all(dir);
}
