#pragma once

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tmat/lifting.hpp"
#include "tmat/mask.hpp"

namespace tmat {

namespace detail {

inline std::uint8_t quantize_byte(double v) {
  return std::uint8_t(std::clamp(std::round(v), 0.0, 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

/// 8-bit interleaved samples, scaled out of the unit domain if needed.
inline std::vector<std::uint8_t> image_bytes(const SpectralImage& img) {
  const double scale = img.domain() == ValueDomain::Unit ? 255.0 : 1.0;
  std::vector<std::uint8_t> bytes(img.size());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = quantize_byte(scale * img.values()[i]);
  return bytes;
}

inline void check_writable_channels(std::size_t channels, const char* who) {
  if (channels != 1 && channels != 3)
    throw std::invalid_argument(std::string(who) +
                                ": channel count must be 1 (gray) or 3 (RGB), got " +
                                std::to_string(channels));
}

/// Next whitespace-delimited token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  for (;;) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (c != EOF && std::isspace(static_cast<unsigned char>(c))) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(static_cast<unsigned char>(c))) {
    tok.push_back(char(c));
    c = in.get();
  }
  // the single whitespace byte terminating the token has been consumed,
  // which is exactly the header/raster separator PNM requires
  return tok;
}

}  // namespace detail

inline SpectralImage read_png(const std::string& path) {
  detail::FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("libpng: allocation failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng: failed to read " + path);
  }
  png_init_io(png, file.get());
  // normalize to 8-bit gray or RGB regardless of the on-disk variant
  png_read_png(png, info,
               PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_STRIP_ALPHA |
                   PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_PACKING,
               nullptr);
  const std::size_t h = png_get_image_height(png, info);
  const std::size_t w = png_get_image_width(png, info);
  const std::size_t ch = png_get_channels(png, info);
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": unsupported channel count " +
                             std::to_string(ch) + " after normalization");
  }
  png_bytepp rows = png_get_rows(png, info);
  SpectralImage img(h, w, ch);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w * ch; ++c)
      img.values()[r * w * ch + c] = double(rows[r][c]);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_png(const std::string& path, const SpectralImage& img) {
  detail::check_writable_channels(img.channels(), "write_png");
  std::vector<std::uint8_t> bytes = detail::image_bytes(img);
  std::vector<png_bytep> rows(img.height());
  for (std::size_t r = 0; r < img.height(); ++r)
    rows[r] = bytes.data() + r * img.width() * img.channels();

  detail::FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: allocation failure");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng: allocation failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng: failed to write " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(img.width()), png_uint_32(img.height()),
               8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Binary PPM (P6, RGB) / PGM (P5, gray), 8 bits per sample.
inline SpectralImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);

  const std::string magic = detail::pnm_token(in);
  if (magic != "P5" && magic != "P6")
    throw std::runtime_error(path + ": unsupported magic '" + magic +
                             "' (binary P5/P6 only)");
  const std::size_t channels = magic == "P6" ? 3 : 1;

  auto read_num = [&](const char* what) -> std::size_t {
    const std::string tok = detail::pnm_token(in);
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used);
      if (used != tok.size() || tok.empty()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": malformed PNM " + what + " '" + tok + "'");
    }
  };
  const std::size_t w = read_num("width");
  const std::size_t h = read_num("height");
  const std::size_t maxval = read_num("maxval");
  if (w == 0 || h == 0)
    throw std::runtime_error(path + ": empty PNM raster");
  if (maxval == 0 || maxval > 255)
    throw std::runtime_error(path + ": PNM maxval " + std::to_string(maxval) +
                             " unsupported (8-bit only)");

  std::vector<std::uint8_t> bytes(w * h * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
  if (std::size_t(in.gcount()) != bytes.size())
    throw std::runtime_error(path + ": truncated PNM raster");

  SpectralImage img(h, w, channels);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    img.values()[i] = double(bytes[i]);
  return img;
}

inline void write_pnm(const std::string& path, const SpectralImage& img) {
  detail::check_writable_channels(img.channels(), "write_pnm");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << (img.channels() == 3 ? "P6" : "P5") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  const std::vector<std::uint8_t> bytes = detail::image_bytes(img);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
}

/// Dispatch on the file's magic bytes, not its name.
inline SpectralImage read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const std::size_t got = std::size_t(probe.gcount());
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6'))
    return read_pnm(path);
  throw std::runtime_error(path + ": not a PNG or binary PNM image");
}

inline void write_image(const std::string& path, const SpectralImage& img) {
  if (path.ends_with(".png")) return write_png(path, img);
  if (path.ends_with(".ppm") || path.ends_with(".pgm"))
    return write_pnm(path, img);
  throw std::invalid_argument("write_image: unsupported extension in '" + path +
                              "' (use .png, .ppm or .pgm)");
}

/// Bitmap masks use 0 = missing, 255 = observed; on read, any sample
/// >= 128 counts as observed. A single-channel bitmap applies to every
/// channel of the pixel domain.
inline ObservationMask read_mask_image(const std::string& path,
                                       std::size_t height, std::size_t width,
                                       std::size_t channels) {
  const SpectralImage img = read_image(path);
  if (img.height() != height || img.width() != width)
    throw std::invalid_argument(
        "mask " + path + " is " + std::to_string(img.height()) + "x" +
        std::to_string(img.width()) + ", expected " + std::to_string(height) +
        "x" + std::to_string(width));
  if (img.channels() != 1 && img.channels() != channels)
    throw std::invalid_argument(
        "mask " + path + " has " + std::to_string(img.channels()) +
        " channels, expected 1 or " + std::to_string(channels));

  std::vector<std::uint8_t> flags(height * width * channels);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c)
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const double v = img.at(r, c, img.channels() == 1 ? 0 : ch);
        flags[(r * width + c) * channels + ch] = v >= 128.0 ? 1 : 0;
      }
  return ObservationMask({height, width, channels}, std::move(flags));
}

inline void write_mask_png(const std::string& path,
                           const ObservationMask& pixels) {
  if (pixels.shape().size() != 3)
    throw std::invalid_argument(
        "write_mask_png: pixel mask must be height x width x channels");
  const std::size_t h = pixels.shape()[0], w = pixels.shape()[1],
                    ch = pixels.shape()[2];
  SpectralImage img(h, w, ch);
  for (std::size_t i = 0; i < pixels.domain_size(); ++i)
    img.values()[i] = pixels.observed(i) ? 255.0 : 0.0;
  write_png(path, img);
}

/// CSV masks list the missing pixels one per line as 0-based
/// "row,col,channel" triples; a header line is optional and ignored.
inline ObservationMask read_mask_csv(const std::string& path,
                                     std::size_t height, std::size_t width,
                                     std::size_t channels) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::uint8_t> flags(height * width * channels, 1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && !std::isdigit(static_cast<unsigned char>(line[0])))
      continue;  // header

    const std::string where = path + " line " + std::to_string(lineno);
    std::istringstream fields(line);
    long idx[3];
    std::string cell;
    for (int f = 0; f < 3; ++f) {
      if (!std::getline(fields, cell, ','))
        throw std::invalid_argument(where + ": expected row,col,channel");
      try {
        std::size_t used = 0;
        idx[f] = std::stol(cell, &used);
        while (used < cell.size() && cell[used] == ' ') ++used;
        if (used != cell.size() || cell.empty())
          throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::invalid_argument(where + ": malformed index '" + cell + "'");
      }
    }
    if (std::getline(fields, cell, ','))
      throw std::invalid_argument(where + ": trailing fields after row,col,channel");
    if (idx[0] < 0 || std::size_t(idx[0]) >= height || idx[1] < 0 ||
        std::size_t(idx[1]) >= width || idx[2] < 0 ||
        std::size_t(idx[2]) >= channels)
      throw std::invalid_argument(
          where + ": pixel (" + std::to_string(idx[0]) + ", " +
          std::to_string(idx[1]) + ", " + std::to_string(idx[2]) +
          ") outside " + std::to_string(height) + "x" + std::to_string(width) +
          "x" + std::to_string(channels));
    flags[(std::size_t(idx[0]) * width + std::size_t(idx[1])) * channels +
          std::size_t(idx[2])] = 0;
  }
  return ObservationMask({height, width, channels}, std::move(flags));
}

inline void write_mask_csv(const std::string& path,
                           const ObservationMask& pixels) {
  if (pixels.shape().size() != 3)
    throw std::invalid_argument(
        "write_mask_csv: pixel mask must be height x width x channels");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "row,col,channel\n";
  const std::size_t w = pixels.shape()[1], ch = pixels.shape()[2];
  for (std::size_t i = 0; i < pixels.domain_size(); ++i) {
    if (pixels.observed(i)) continue;
    out << i / (w * ch) << "," << (i / ch) % w << "," << i % ch << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace tmat
