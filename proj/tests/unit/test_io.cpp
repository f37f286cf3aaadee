// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sphsynth/io.hpp"

using namespace sphsynth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sphsynth_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("pfm round trip is exact at float precision") {
  const ErpGrid g(16, 8);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(0.1, 20.0);
  ScalarMap m(g);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = uni(rng);
  const std::string path = scratch("a.pfm").string();
  save_pfm(path, m);
  const ScalarMap back = load_pfm(path);
  REQUIRE(back.grid() == g);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(m[i])));

  // saving what was loaded reproduces the file byte for byte
  const std::string again = scratch("b.pfm").string();
  save_pfm(again, back);
  CHECK(oracle::file_bytes(path) == oracle::file_bytes(again));
}

TEST_CASE("pfm layout: header, little endian, bottom-up rows") {
  const ErpGrid g(4, 2);
  ScalarMap m(g);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<double>(i);
  const std::string path = scratch("layout.pfm").string();
  save_pfm(path, m);
  const std::vector<char> bytes = oracle::file_bytes(path);
  const std::string header = "Pf\n4 2\n-1.0\n";
  REQUIRE(bytes.size() == header.size() + 8 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + header.size()) == header);
  // first stored row is the bottom raster row
  float first;
  unsigned char le[4];
  std::memcpy(le, bytes.data() + header.size(), 4);
  const std::uint32_t bits = le[0] | (le[1] << 8) | (le[2] << 16) | (std::uint32_t(le[3]) << 24);
  std::memcpy(&first, &bits, 4);
  CHECK(first == 4.0f);
}

TEST_CASE("big-endian pfm files are read") {
  std::string data = "Pf\n4 2\n1.0\n";
  for (float f : {0.f, 0.f, 0.f, 0.f, 1.5f, -2.25f, 0.f, 0.f}) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int s = 24; s >= 0; s -= 8) data.push_back(static_cast<char>((bits >> s) & 0xff));
  }
  const fs::path p = scratch("be.pfm");
  write_bytes(p, data);
  const ScalarMap m = load_pfm(p.string());
  CHECK(m(0, 0) == 1.5);
  CHECK(m(1, 0) == -2.25);
}

TEST_CASE("malformed pfm files are rejected") {
  const fs::path p = scratch("bad.pfm");
  write_bytes(p, "PF\n4 2\n-1.0\n");
  CHECK_THROWS_AS(load_pfm(p.string()), IoError);
  write_bytes(p, "P6\n2 1\n255\n");
  CHECK_THROWS_AS(load_pfm(p.string()), IoError);
  write_bytes(p, "Pf\n4 2\n-1.0\nabc");
  CHECK_THROWS_AS(load_pfm(p.string()), IoError);
  write_bytes(p, "Pf\n6 2\n-1.0\n");
  CHECK_THROWS_AS(load_pfm(p.string()), IoError);
  write_bytes(p, "Pf\n4 2\n0\n");
  CHECK_THROWS_AS(load_pfm(p.string()), IoError);
  CHECK_THROWS_AS(load_pfm(scratch("missing.pfm").string()), IoError);
}

TEST_CASE("ppm round trip within quantization") {
  const ErpGrid g(16, 8);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(-0.1, 1.1);
  Image img = make_image(g);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = uni(rng);
  const std::string path = scratch("c.ppm").string();
  save_ppm(path, img);
  const Image back = load_ppm(path);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double clipped = std::clamp(img[i], 0.0, 1.0);
    CHECK(std::abs(back[i] - clipped) <= 0.5 / 255.0 + 1e-12);
  }
  const std::string again = scratch("d.ppm").string();
  save_ppm(again, back);
  CHECK(oracle::file_bytes(path) == oracle::file_bytes(again));
}

TEST_CASE("quantization") {
  CHECK(quantize8(-1.0) == 0);
  CHECK(quantize8(NAN) == 0);
  CHECK(quantize8(0.0) == 0);
  CHECK(quantize8(1.0) == 255);
  CHECK(quantize8(2.0) == 255);
  CHECK(quantize8(0.5) == 128);
  CHECK(quantize8(1.0 / 255.0) == 1);
}

TEST_CASE("netpbm headers may carry comments") {
  const fs::path p = scratch("comment.ppm");
  write_bytes(p, std::string("P6\n# made by hand\n4 # width\n2\n255\n") + std::string("\xff\x00\x00\x00\xff\x00", 6) +
                   std::string(18, '\0'));
  const Image img = load_ppm(p.string());
  CHECK(img(0, 0, 0) == 1.0);
  CHECK(img(1, 0, 1) == 1.0);
  write_bytes(p, "P6\n4 2\n65535\n");
  CHECK_THROWS_AS(load_ppm(p.string()), IoError);
  write_bytes(p, "P3\n2 1\n255\n");
  CHECK_THROWS_AS(load_ppm(p.string()), IoError);
}

TEST_CASE("pgm masks") {
  const ErpGrid g(8, 4);
  Mask m(g);
  m(1, 1) = 1;
  m(7, 3) = 1;
  const std::string path = scratch("m.pgm").string();
  save_pgm(path, m);
  CHECK(load_pgm(path) == m);
  const std::vector<char> bytes = oracle::file_bytes(path);
  CHECK(static_cast<unsigned char>(bytes[bytes.size() - 1]) == 255);
}

TEST_CASE("manifest round trip") {
  Manifest m{{"width", "64"}, {"baseline", "0.26000000000000001"}, {"scene", "default scene"}};
  const std::string path = scratch("manifest.txt").string();
  save_manifest(path, m);
  const Manifest back = load_manifest(path);
  CHECK(back == m);
  CHECK(manifest_get(back, "scene", path) == "default scene");
  CHECK_THROWS_AS(manifest_get(back, "seed", path), IoError);

  const fs::path p = scratch("bad_manifest.txt");
  write_bytes(p, "# comment\n\nwidth 4\nheight\n");
  try {
    load_manifest(p.string());
    FAIL("expected an exception");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}
