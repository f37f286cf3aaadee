// Copyright 2026 The sphsynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "sphsynth/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace sphsynth {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw IoError("truncated header in '" + path + "'");
  return tok;
}

int header_int(std::istream& in, const std::string& path, const char* what) {
  const std::string tok = header_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw IoError("bad " + std::string(what) + " '" + tok + "' in '" + path + "'");
}

ErpGrid file_grid(int w, int h, const std::string& path) {
  try {
    return ErpGrid(w, h);
  } catch (const std::invalid_argument& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

void read_exact(std::istream& in, void* dst, std::size_t n, const std::string& path) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw IoError("truncated data in '" + path + "'");
}

}  // namespace

std::uint8_t quantize8(double x) {
  if (!(x > 0.0)) return 0;
  if (x >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::lround(x * 255.0));
}

void save_pfm(const std::string& path, const ScalarMap& map) {
  if (map.channels() != 1) throw std::invalid_argument("save_pfm: single-channel only");
  auto out = open_out(path);
  out << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
  std::vector<float> row(map.width());
  for (int v = map.height() - 1; v >= 0; --v) {
    for (int u = 0; u < map.width(); ++u) row[u] = static_cast<float>(map(u, v));
    if constexpr (std::endian::native == std::endian::big) {
      for (float& f : row) f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  finish(out, path);
}

ScalarMap load_pfm(const std::string& path) {
  auto in = open_in(path);
  const std::string magic = header_token(in, path);
  if (magic == "PF") throw IoError("'" + path + "' is a 3-channel PFM; depth must be 'Pf'");
  if (magic != "Pf") throw IoError("'" + path + "' is not a PFM file");
  const int w = header_int(in, path, "width");
  const int h = header_int(in, path, "height");
  std::string scale_tok;
  if (!std::getline(in >> std::ws, scale_tok)) throw IoError("truncated header in '" + path + "'");
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw IoError("bad scale '" + scale_tok + "' in '" + path + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw IoError("bad scale in '" + path + "'");
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);

  ScalarMap map(file_grid(w, h, path));
  std::vector<std::uint32_t> row(w);
  for (int v = h - 1; v >= 0; --v) {
    read_exact(in, row.data(), row.size() * sizeof(std::uint32_t), path);
    for (int u = 0; u < w; ++u) {
      const std::uint32_t bits = swap ? __builtin_bswap32(row[u]) : row[u];
      map(u, v) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return map;
}

void save_ppm(const std::string& path, const Image& img) {
  if (img.channels() != kColorChannels) throw std::invalid_argument("save_ppm: 3 channels only");
  auto out = open_out(path);
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) bytes[i] = quantize8(img[i]);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

Image load_ppm(const std::string& path) {
  auto in = open_in(path);
  if (header_token(in, path) != "P6") throw IoError("'" + path + "' is not a binary PPM (P6)");
  const int w = header_int(in, path, "width");
  const int h = header_int(in, path, "height");
  const int maxval = header_int(in, path, "maxval");
  if (maxval > 255) throw IoError("'" + path + "': 16-bit PPM is not supported");
  Image img = make_image(file_grid(w, h, path));
  std::vector<std::uint8_t> bytes(img.size());
  read_exact(in, bytes.data(), bytes.size(), path);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = bytes[i] / static_cast<double>(maxval);
  return img;
}

void save_pgm(const std::string& path, const Mask& mask) {
  auto out = open_out(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  finish(out, path);
}

Mask load_pgm(const std::string& path) {
  auto in = open_in(path);
  if (header_token(in, path) != "P5") throw IoError("'" + path + "' is not a binary PGM (P5)");
  const int w = header_int(in, path, "width");
  const int h = header_int(in, path, "height");
  const int maxval = header_int(in, path, "maxval");
  if (maxval > 255) throw IoError("'" + path + "': 16-bit PGM is not supported");
  Mask mask(file_grid(w, h, path));
  read_exact(in, mask.data().data(), mask.size(), path);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] ? 1 : 0;
  return mask;
}

void save_manifest(const std::string& path, const Manifest& m) {
  auto out = open_out(path);
  for (const auto& [k, v] : m) out << k << ' ' << v << '\n';
  finish(out, path);
}

Manifest load_manifest(const std::string& path) {
  auto in = open_in(path);
  Manifest m;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key, value;
    if (!(ss >> key)) continue;
    std::getline(ss >> std::ws, value);
    if (value.empty()) {
      throw IoError("'" + path + "' line " + std::to_string(n) + ": missing value for '" + key +
                    "'");
    }
    m[key] = value;
  }
  return m;
}

const std::string& manifest_get(const Manifest& m, const std::string& key,
                                const std::string& path) {
  const auto it = m.find(key);
  if (it == m.end()) throw IoError("manifest '" + path + "' has no '" + key + "' entry");
  return it->second;
}

}  // namespace sphsynth
