#pragma once

// Binary PPM (P6) frames and PGM (P5) masks, bit-exact round trips.

#include <cctype>
#include <fstream>
#include <string>

#include "trajpair/error.hpp"
#include "trajpair/render.hpp"

namespace trajpair {

inline void write_frame(const FrameBuffer& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("write_frame: cannot open " + path);
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.rgb.data()),
            static_cast<std::streamsize>(frame.rgb.size()));
  if (!out) throw ImageIoError("write_frame: write failed for " + path);
}

inline void write_mask(const MaskFrame& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("write_mask: cannot open " + path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(mask.value.data()),
            static_cast<std::streamsize>(mask.value.size()));
  if (!out) throw ImageIoError("write_mask: write failed for " + path);
}

namespace detail {

// Reads one whitespace-delimited header token, skipping `#` comments.
inline std::string next_pnm_token(std::istream& in, const std::string& path) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (token.empty()) throw ImageIoError("pnm: truncated header in " + path);
  return token;
}

inline void read_pnm_header(std::istream& in, const std::string& path,
                            const std::string& magic, int* width, int* height) {
  if (next_pnm_token(in, path) != magic) {
    throw ImageIoError("pnm: bad magic in " + path + " (expected " + magic + ")");
  }
  *width = std::stoi(next_pnm_token(in, path));
  *height = std::stoi(next_pnm_token(in, path));
  const int maxval = std::stoi(next_pnm_token(in, path));
  if (*width <= 0 || *height <= 0 || maxval != 255) {
    throw ImageIoError("pnm: unsupported dimensions or maxval in " + path);
  }
}

}  // namespace detail

inline FrameBuffer read_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("read_frame: cannot open " + path);
  FrameBuffer frame;
  detail::read_pnm_header(in, path, "P6", &frame.width, &frame.height);
  frame.rgb.resize(static_cast<size_t>(frame.width) * frame.height * 3);
  in.read(reinterpret_cast<char*>(frame.rgb.data()),
          static_cast<std::streamsize>(frame.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.rgb.size())) {
    throw ImageIoError("read_frame: truncated payload in " + path);
  }
  return frame;
}

inline MaskFrame read_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("read_mask: cannot open " + path);
  MaskFrame mask;
  detail::read_pnm_header(in, path, "P5", &mask.width, &mask.height);
  mask.value.resize(static_cast<size_t>(mask.width) * mask.height);
  in.read(reinterpret_cast<char*>(mask.value.data()),
          static_cast<std::streamsize>(mask.value.size()));
  if (in.gcount() != static_cast<std::streamsize>(mask.value.size())) {
    throw ImageIoError("read_mask: truncated payload in " + path);
  }
  return mask;
}

}  // namespace trajpair
