#include "svq/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "svq/errors.hpp"

namespace svq {

std::uint8_t to_gray(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to black
  return static_cast<std::uint8_t>(std::lround(std::min(v, 1.0) * 255.0));
}

void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_pgm(out, img);
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

GrayImage read_pgm(std::istream& in) {
  std::string magic;
  std::size_t w = 0, h = 0;
  int maxval = 0;
  if (!(in >> magic) || magic != "P5") throw ConfigError("pgm: not a P5 file");
  if (!(in >> w >> h >> maxval) || maxval != 255) throw ConfigError("pgm: bad header");
  in.get();  // single whitespace byte before the raster
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) throw ConfigError("pgm: truncated raster");
  if (in.peek() != std::char_traits<char>::eof()) throw ConfigError("pgm: trailing bytes after raster");
  return img;
}

}  // namespace svq
