#pragma once

// In-memory codecs: netpbm PGM (P2/P5, maxval <= 255), the HDWT pyramid
// container and the corpus manifest CSV. No file-system access here; see
// fileio.hpp.
//
// HDWT layout (all integers little-endian):
//   "HDWT" | u8 version = 1 | u32 levels | u32 source_rows | u32 source_cols
//   then 3k+1 matrices: LL_k, then for level k down to 1: LH, HL, HH
//   each matrix: u32 rows | u32 cols | rows*cols f64 (IEEE-754 LE), row-major

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tiledwt/error.hpp"
#include "tiledwt/image.hpp"
#include "tiledwt/inspect.hpp"
#include "tiledwt/wavelet.hpp"

namespace tiledwt {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// ---------------------------------------------------------------------------
// PGM

namespace pgm_detail {

class HeaderReader {
 public:
  explicit HeaderReader(ByteView bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments (comment runs to end of line).
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() const noexcept { return pos_ >= bytes_.size(); }

  // Reads an unsigned decimal token. `what` names the field for errors.
  std::uint64_t read_uint(ErrorCode on_missing, const char* what) {
    skip_separators();
    if (at_end()) throw Error(on_missing, std::string("missing ") + what);
    if (!std::isdigit(bytes_[pos_])) {
      throw Error(on_missing == ErrorCode::TruncatedData ? ErrorCode::MalformedData
                                                         : ErrorCode::MalformedHeader,
                  std::string("non-numeric ") + what);
    }
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::MalformedHeader, std::string(what) + " out of range");
      }
      ++pos_;
    }
    if (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      throw Error(on_missing == ErrorCode::TruncatedData ? ErrorCode::MalformedData
                                                         : ErrorCode::MalformedHeader,
                  std::string("bad character after ") + what);
    }
    return v;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  ByteView bytes_;
  std::size_t pos_ = 0;
};

}  // namespace pgm_detail

inline Image load_pgm(ByteView bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw Error(ErrorCode::BadMagic, "expected P2 or P5");
  }
  const bool binary = bytes[1] == '5';
  pgm_detail::HeaderReader in(bytes);
  in.advance(2);
  if (!in.at_end() && !std::isspace(bytes[in.pos()]) && bytes[in.pos()] != '#') {
    throw Error(ErrorCode::BadMagic, "expected P2 or P5");
  }
  const auto width = in.read_uint(ErrorCode::MalformedHeader, "width");
  const auto height = in.read_uint(ErrorCode::MalformedHeader, "height");
  const auto maxval = in.read_uint(ErrorCode::MalformedHeader, "maxval");
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedHeader, "zero dimension");
  if (maxval == 0) throw Error(ErrorCode::MalformedHeader, "maxval 0");
  if (maxval > 255) {
    throw Error(ErrorCode::MaxvalUnsupported, "maxval " + std::to_string(maxval));
  }

  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<double> data(count);
  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (in.at_end() || !std::isspace(bytes[in.pos()])) {
      throw Error(ErrorCode::TruncatedData, "missing raster");
    }
    in.advance(1);
    if (bytes.size() - in.pos() < count) {
      throw Error(ErrorCode::TruncatedData, "expected " + std::to_string(count) + " bytes, have " +
                                                std::to_string(bytes.size() - in.pos()));
    }
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = bytes[in.pos() + i];
      if (v > maxval) throw Error(ErrorCode::MalformedData, "sample exceeds maxval");
      data[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const auto v = in.read_uint(ErrorCode::TruncatedData, "sample");
      if (v > maxval) throw Error(ErrorCode::MalformedData, "sample exceeds maxval");
      data[i] = static_cast<double>(v);
    }
  }
  return Image(height, width, std::move(data));
}

// Clamp to [0, 255], round half-to-even.
inline std::uint8_t to_pixel(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  const double whole = std::floor(v);
  const double frac = v - whole;
  double r = whole;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(whole, 2.0) != 0.0)) r += 1.0;
  return static_cast<std::uint8_t>(r);
}

inline Bytes save_pgm(const Image& image, bool binary = true) {
  std::string header = std::string(binary ? "P5" : "P2") + "\n" + std::to_string(image.cols()) +
                       " " + std::to_string(image.rows()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  if (binary) {
    out.reserve(out.size() + image.size());
    for (double v : image.data()) out.push_back(to_pixel(v));
    return out;
  }
  std::string body;
  for (std::size_t r = 0; r < image.rows(); ++r) {
    for (std::size_t c = 0; c < image.cols(); ++c) {
      if (c) body += ' ';
      body += std::to_string(to_pixel(image(r, c)));
    }
    body += '\n';
  }
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

// ---------------------------------------------------------------------------
// HDWT pyramid container

inline constexpr std::uint8_t kPyramidVersion = 0x01;
inline constexpr char kPyramidMagic[4] = {'H', 'D', 'W', 'T'};

namespace hdwt_detail {

inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(Bytes& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " exceeds u32");
  }
  return static_cast<std::uint32_t>(v);
}

inline void put_matrix(Bytes& out, const Image& m) {
  put_u32(out, checked_u32(m.rows(), "rows"));
  put_u32(out, checked_u32(m.cols(), "cols"));
  for (double v : m.data()) put_f64(out, v);
}

class Reader {
 public:
  explicit Reader(ByteView bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::TruncatedData, "need " + std::to_string(n) + " bytes at offset " +
                                                std::to_string(pos_));
    }
  }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  Image matrix() {
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    if (rows == 0 || cols == 0) throw Error(ErrorCode::CorruptPyramid, "empty matrix");
    const std::uint64_t count = std::uint64_t{rows} * cols;
    if (count > (bytes_.size() - pos_) / 8) {
      throw Error(ErrorCode::TruncatedData, "matrix " + std::to_string(rows) + "x" +
                                                std::to_string(cols) + " exceeds remaining bytes");
    }
    std::vector<double> data(static_cast<std::size_t>(count));
    for (double& v : data) v = f64();
    return Image(rows, cols, std::move(data));
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  ByteView bytes_;
  std::size_t pos_ = 0;
};

}  // namespace hdwt_detail

inline Bytes save_pyramid(const Pyramid& p) {
  validate(p);
  Bytes out(std::begin(kPyramidMagic), std::end(kPyramidMagic));
  out.push_back(kPyramidVersion);
  hdwt_detail::put_u32(out, p.levels);
  hdwt_detail::put_u32(out, hdwt_detail::checked_u32(p.source_rows, "source_rows"));
  hdwt_detail::put_u32(out, hdwt_detail::checked_u32(p.source_cols, "source_cols"));
  hdwt_detail::put_matrix(out, p.approximation);
  for (std::size_t j = p.details.size(); j-- > 0;) {
    hdwt_detail::put_matrix(out, p.details[j].lh);
    hdwt_detail::put_matrix(out, p.details[j].hl);
    hdwt_detail::put_matrix(out, p.details[j].hh);
  }
  return out;
}

inline Pyramid load_pyramid(ByteView bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kPyramidMagic), std::end(kPyramidMagic),
                                      bytes.begin(),
                                      [](char a, std::uint8_t b) { return a == char(b); })) {
    throw Error(ErrorCode::BadMagic, "expected HDWT");
  }
  hdwt_detail::Reader in(bytes.subspan(4));
  const std::uint8_t version = in.u8();
  if (version != kPyramidVersion) {
    throw Error(ErrorCode::VersionUnsupported, "version " + std::to_string(version));
  }
  Pyramid p;
  p.levels = in.u32();
  p.source_rows = in.u32();
  p.source_cols = in.u32();
  if (p.levels < 1 || p.levels >= 32) {
    throw Error(ErrorCode::CorruptPyramid, "levels " + std::to_string(p.levels));
  }
  p.approximation = in.matrix();
  p.details.resize(p.levels);
  for (std::size_t j = p.levels; j-- > 0;) {
    p.details[j].lh = in.matrix();
    p.details[j].hl = in.matrix();
    p.details[j].hh = in.matrix();
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(in.remaining()) + " trailing bytes after last matrix");
  }
  validate(p);
  return p;
}

// ---------------------------------------------------------------------------
// Manifest CSV: header "path,label", label ok|defective (any case).

struct ManifestEntry {
  std::string path;
  Verdict label = Verdict::Ok;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string reference_path;  // supplied out-of-band, not stored in the CSV

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

namespace manifest_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace manifest_detail

inline Manifest load_manifest(ByteView bytes) {
  using manifest_detail::trim;
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  Manifest m;
  std::unordered_set<std::string> seen;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (!header_seen) {
      if (manifest_detail::lower(line) != "path,label") {
        throw Error(ErrorCode::BadHeader, "expected 'path,label', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::MalformedData, "line " + std::to_string(line_no) + ": missing label");
    }
    const std::string path(trim(line.substr(0, comma)));
    const std::string label = manifest_detail::lower(trim(line.substr(comma + 1)));
    if (path.empty()) {
      throw Error(ErrorCode::MalformedData, "line " + std::to_string(line_no) + ": empty path");
    }
    ManifestEntry e{path, Verdict::Ok};
    if (label == "ok") e.label = Verdict::Ok;
    else if (label == "defective") e.label = Verdict::Defective;
    else {
      throw Error(ErrorCode::BadLabel,
                  "line " + std::to_string(line_no) + ": '" + label + "'");
    }
    if (!seen.insert(path).second) {
      throw Error(ErrorCode::DuplicatePath, "line " + std::to_string(line_no) + ": " + path);
    }
    m.entries.push_back(std::move(e));
  }
  if (!header_seen) throw Error(ErrorCode::BadHeader, "empty manifest");
  return m;
}

inline Bytes save_manifest(const Manifest& m) {
  std::string text = "path,label\n";
  for (const ManifestEntry& e : m.entries) {
    text += e.path;
    text += e.label == Verdict::Ok ? ",ok\n" : ",defective\n";
  }
  return Bytes(text.begin(), text.end());
}

}  // namespace tiledwt
