#include <cstdint>
#include <cstring>
#include <fstream>

#include "gss/cacgmm.hpp"

namespace gss {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'S', 'M', 'A', 'S', 'K', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("mask file truncated");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

}  // namespace

void write_masks(const std::string& path, const MaskSet& masks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(masks.class_count()));
  put_u32(out, static_cast<std::uint32_t>(masks.frames()));
  put_u32(out, static_cast<std::uint32_t>(masks.frequencies()));
  for (const auto& g : masks.gamma)
    for (Eigen::Index t = 0; t < g.rows(); ++t)
      for (Eigen::Index f = 0; f < g.cols(); ++f) {
        const float v = static_cast<float>(g(t, f));
        std::uint32_t raw;
        std::memcpy(&raw, &v, sizeof v);
        put_u32(out, raw);
      }

  std::ofstream names(path + ".classes.txt");
  if (!names) throw Error("cannot write " + path + ".classes.txt");
  for (const auto& c : masks.classes) names << c << '\n';
}

MaskSet read_masks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(path + ": bad mask file magic");
  const std::uint32_t classes = get_u32(in);
  const std::uint32_t frames = get_u32(in);
  const std::uint32_t freqs = get_u32(in);

  MaskSet masks;
  masks.gamma.assign(classes, RealMatrix(frames, freqs));
  for (auto& g : masks.gamma)
    for (std::uint32_t t = 0; t < frames; ++t)
      for (std::uint32_t f = 0; f < freqs; ++f) {
        const std::uint32_t raw = get_u32(in);
        float v;
        std::memcpy(&v, &raw, sizeof v);
        g(t, f) = v;
      }

  std::ifstream names(path + ".classes.txt");
  std::string line;
  while (names && std::getline(names, line))
    if (!line.empty()) masks.classes.push_back(line);
  if (masks.classes.size() != classes) {
    masks.classes.clear();
    for (std::uint32_t k = 0; k < classes; ++k) masks.classes.push_back("class" + std::to_string(k));
  }
  return masks;
}

}  // namespace gss
