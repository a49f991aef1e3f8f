#include "thermotrack/data.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thermotrack {
namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L)); }

// Next header token of a PNM file, skipping whitespace and comments.
std::string pnm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

int pnm_int(std::istream& in, const fs::path& path) {
  const std::string t = pnm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCategory::io, path.string() + ": malformed PGM header");
}

Frame read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  const std::string magic = pnm_token(in);
  if (magic != "P5" && magic != "P2") throw Error(ErrorCategory::io, path.string() + ": not a PGM file");
  const int width = pnm_int(in, path), height = pnm_int(in, path), maxval = pnm_int(in, path);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw Error(ErrorCategory::io, path.string() + ": unsupported PGM dimensions or depth");
  Frame frame(width, height, 1);
  if (magic == "P5") {
    std::vector<unsigned char> bytes(frame.pixels.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
      throw Error(ErrorCategory::io, path.string() + ": truncated PGM data");
    for (std::size_t i = 0; i < bytes.size(); ++i) frame.pixels[i] = bytes[i] * 255.0 / maxval;
  } else {
    for (double& p : frame.pixels) p = pnm_int(in, path) * 255.0 / maxval;
  }
  return frame;
}

void write_pgm(const fs::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  const Eigen::ArrayXXd gray = frame.luma();
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) out.put(static_cast<char>(to_byte(gray(y, x))));
  if (!out) throw Error(ErrorCategory::io, "write failed for " + path.string());
}

Frame read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw Error(ErrorCategory::io, path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCategory::io, path.string() + ": " + message);
  }
  Frame frame(static_cast<int>(image.width), static_cast<int>(image.height), color ? 3 : 1);
  std::copy(buffer.begin(), buffer.end(), frame.pixels.begin());
  return frame;
}

void write_png(const fs::path& path, const Frame& frame) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = frame.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(frame.pixels.size());
  std::transform(frame.pixels.begin(), frame.pixels.end(), buffer.begin(), to_byte);
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr))
    throw Error(ErrorCategory::io, path.string() + ": " + image.message);
}

}  // namespace

Frame read_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw Error(ErrorCategory::io, path.string() + ": unsupported image extension");
}

void write_image(const fs::path& path, const Frame& frame) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return write_pgm(path, frame);
  if (ext == ".png") return write_png(path, frame);
  throw Error(ErrorCategory::io, path.string() + ": unsupported image extension");
}

bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ei = i, ej = j;
      while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
      while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
      std::size_t si = i, sj = j;
      while (si + 1 < ei && a[si] == '0') ++si;
      while (sj + 1 < ej && b[sj] == '0') ++sj;
      if (ei - si != ej - sj) return ei - si < ej - sj;
      const int cmp = a.compare(si, ei - si, b, sj, ej - sj);
      if (cmp != 0) return cmp < 0;
      if (ei - i != ej - j) return ei - i < ej - j;
      i = ei;
      j = ej;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

}  // namespace thermotrack
