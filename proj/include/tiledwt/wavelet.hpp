#pragma once

// Orthonormal Haar analysis/synthesis in 1-D and 2-D, iterated into a
// multilevel pyramid.
//
// Conventions:
//   approx[i] = (x[2i] + x[2i+1]) / sqrt(2)
//   detail[i] = (x[2i] - x[2i+1]) / sqrt(2)
// A 2-D step is separable: every row, then every column of each half. Subband
// names follow the (row filter, column filter) pair read right-to-left:
//   lh = row high-pass, column low-pass
//   hl = row low-pass,  column high-pass
//   hh = high-pass on both axes
// so that [[1, 2], [3, 4]] gives ll = 5, lh = -1, hl = -2, hh = 0.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tiledwt/error.hpp"
#include "tiledwt/image.hpp"

namespace tiledwt {

inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

struct SubbandSet {
  Image ll;
  Image lh;
  Image hl;
  Image hh;

  friend bool operator==(const SubbandSet&, const SubbandSet&) = default;
};

// Detail triple for one decomposition level.
struct DetailSet {
  Image lh;
  Image hl;
  Image hh;

  friend bool operator==(const DetailSet&, const DetailSet&) = default;
};

// Level-k decomposition. details[0] is the finest level (first iteration).
// When padding was used, source_rows/source_cols hold the pre-padding size
// and reconstruction crops back to it.
struct Pyramid {
  std::uint32_t levels = 0;
  std::size_t source_rows = 0;
  std::size_t source_cols = 0;
  Image approximation;
  std::vector<DetailSet> details;

  // 3k + 1
  std::size_t matrix_count() const noexcept { return 1 + 3 * details.size(); }

  friend bool operator==(const Pyramid&, const Pyramid&) = default;
};

enum class Padding { Reject, Replicate };

namespace detail {

inline void analysis_into(std::span<const double> x, std::span<double> approx,
                          std::span<double> det) noexcept {
  const std::size_t half = x.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double a = x[2 * i];
    const double b = x[2 * i + 1];
    approx[i] = (a + b) * kInvSqrt2;
    det[i] = (a - b) * kInvSqrt2;
  }
}

inline void synthesis_into(std::span<const double> approx, std::span<const double> det,
                           std::span<double> x) noexcept {
  for (std::size_t i = 0; i < approx.size(); ++i) {
    x[2 * i] = (approx[i] + det[i]) * kInvSqrt2;
    x[2 * i + 1] = (approx[i] - det[i]) * kInvSqrt2;
  }
}

inline std::size_t pow2(std::uint32_t k) { return std::size_t{1} << k; }

inline std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

inline std::pair<Signal, Signal> haar_analysis_1d(std::span<const double> signal) {
  if (signal.size() < 2) {
    throw Error(ErrorCode::TooShort, "signal length " + std::to_string(signal.size()) + " < 2");
  }
  if (signal.size() % 2 != 0) {
    throw Error(ErrorCode::OddLength, "signal length " + std::to_string(signal.size()));
  }
  Signal approx(signal.size() / 2);
  Signal det(signal.size() / 2);
  detail::analysis_into(signal, approx, det);
  return {std::move(approx), std::move(det)};
}

inline Signal haar_synthesis_1d(std::span<const double> approx, std::span<const double> det) {
  if (approx.size() != det.size()) {
    throw Error(ErrorCode::LengthMismatch, "approx length " + std::to_string(approx.size()) +
                                               " != detail length " + std::to_string(det.size()));
  }
  if (approx.empty()) {
    throw Error(ErrorCode::TooShort, "empty coefficient vectors");
  }
  Signal out(approx.size() * 2);
  detail::synthesis_into(approx, det, out);
  return out;
}

// The 2-D step applies the unscaled butterfly (a + b, a - b) on both axes
// and folds the two 1/sqrt(2) factors into one exact 0.5, so integer
// images stay exact through a full analysis/synthesis cycle.
inline SubbandSet dwt2(const Image& image) {
  const std::size_t rows = image.rows();
  const std::size_t cols = image.cols();
  if (rows == 0 || cols == 0 || rows % 2 != 0 || cols % 2 != 0) {
    throw Error(ErrorCode::OddDimension, detail::dims(rows, cols));
  }
  const std::size_t hr = rows / 2;
  const std::size_t hc = cols / 2;
  SubbandSet out{Image(hr, hc), Image(hr, hc), Image(hr, hc), Image(hr, hc)};
  for (std::size_t i = 0; i < hr; ++i) {
    const auto top = image.row(2 * i);
    const auto bottom = image.row(2 * i + 1);
    for (std::size_t j = 0; j < hc; ++j) {
      // Row pass on the two rows of the 2x2 block.
      const double top_lo = top[2 * j] + top[2 * j + 1];
      const double top_hi = top[2 * j] - top[2 * j + 1];
      const double bot_lo = bottom[2 * j] + bottom[2 * j + 1];
      const double bot_hi = bottom[2 * j] - bottom[2 * j + 1];
      // Column pass.
      out.ll(i, j) = 0.5 * (top_lo + bot_lo);
      out.hl(i, j) = 0.5 * (top_lo - bot_lo);
      out.lh(i, j) = 0.5 * (top_hi + bot_hi);
      out.hh(i, j) = 0.5 * (top_hi - bot_hi);
    }
  }
  return out;
}

inline Image idwt2(const SubbandSet& bands) {
  const Image& ll = bands.ll;
  if (!ll.same_shape(bands.lh) || !ll.same_shape(bands.hl) || !ll.same_shape(bands.hh)) {
    throw Error(ErrorCode::DimensionMismatch,
                "subbands " + shape_string(ll) + ", " + shape_string(bands.lh) + ", " +
                    shape_string(bands.hl) + ", " + shape_string(bands.hh));
  }
  const std::size_t hr = ll.rows();
  const std::size_t hc = ll.cols();
  Image out(hr * 2, hc * 2);
  for (std::size_t i = 0; i < hr; ++i) {
    auto top = out.row(2 * i);
    auto bottom = out.row(2 * i + 1);
    for (std::size_t j = 0; j < hc; ++j) {
      const double top_lo = ll(i, j) + bands.hl(i, j);
      const double bot_lo = ll(i, j) - bands.hl(i, j);
      const double top_hi = bands.lh(i, j) + bands.hh(i, j);
      const double bot_hi = bands.lh(i, j) - bands.hh(i, j);
      top[2 * j] = 0.5 * (top_lo + top_hi);
      top[2 * j + 1] = 0.5 * (top_lo - top_hi);
      bottom[2 * j] = 0.5 * (bot_lo + bot_hi);
      bottom[2 * j + 1] = 0.5 * (bot_lo - bot_hi);
    }
  }
  return out;
}

// Replicates the last row/column until both axes are multiples of `multiple`.
inline Image pad_replicate(const Image& image, std::size_t multiple) {
  auto round_up = [multiple](std::size_t n) { return (n + multiple - 1) / multiple * multiple; };
  const std::size_t rows = round_up(image.rows());
  const std::size_t cols = round_up(image.cols());
  if (rows == image.rows() && cols == image.cols()) return image;
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t sr = std::min(r, image.rows() - 1);
    for (std::size_t c = 0; c < cols; ++c) {
      out(r, c) = image(sr, std::min(c, image.cols() - 1));
    }
  }
  return out;
}

inline Image crop(const Image& image, std::size_t rows, std::size_t cols) {
  if (rows > image.rows() || cols > image.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "crop " + detail::dims(rows, cols) + " from " + shape_string(image));
  }
  if (rows == image.rows() && cols == image.cols()) return image;
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = image(r, c);
  }
  return out;
}

inline Pyramid decompose(const Image& image, std::uint32_t levels,
                         Padding padding = Padding::Reject) {
  if (levels < 1) {
    throw Error(ErrorCode::InvalidArgument, "levels must be >= 1");
  }
  if (levels >= 32) {
    throw Error(ErrorCode::NotDivisible, detail::dims(image.rows(), image.cols()) +
                                             " cannot be halved " + std::to_string(levels) +
                                             " times");
  }
  const std::size_t block = detail::pow2(levels);
  const bool divisible = image.rows() % block == 0 && image.cols() % block == 0;
  if (!divisible && padding == Padding::Reject) {
    throw Error(ErrorCode::NotDivisible, detail::dims(image.rows(), image.cols()) +
                                             " cannot be halved " + std::to_string(levels) +
                                             " times");
  }

  Pyramid p;
  p.levels = levels;
  p.source_rows = image.rows();
  p.source_cols = image.cols();
  p.details.reserve(levels);

  Image current = divisible ? image : pad_replicate(image, block);
  for (std::uint32_t level = 0; level < levels; ++level) {
    SubbandSet bands = dwt2(current);
    p.details.push_back({std::move(bands.lh), std::move(bands.hl), std::move(bands.hh)});
    current = std::move(bands.ll);
  }
  p.approximation = std::move(current);
  return p;
}

// Throws CorruptPyramid unless the stored dimensions are mutually consistent.
inline void validate(const Pyramid& p) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::CorruptPyramid, what); };
  if (p.levels < 1 || p.levels >= 32) fail("levels " + std::to_string(p.levels));
  if (p.details.size() != p.levels) {
    fail("expected " + std::to_string(p.levels) + " detail levels, found " +
         std::to_string(p.details.size()));
  }
  if (p.approximation.empty()) fail("missing approximation");
  const std::size_t block = detail::pow2(p.levels);
  const std::size_t padded_rows = p.approximation.rows() * block;
  const std::size_t padded_cols = p.approximation.cols() * block;
  if (p.source_rows == 0 || p.source_cols == 0 || p.source_rows > padded_rows ||
      p.source_cols > padded_cols || padded_rows - p.source_rows >= block ||
      padded_cols - p.source_cols >= block) {
    fail("source " + detail::dims(p.source_rows, p.source_cols) + " inconsistent with LL " +
         shape_string(p.approximation) + " at level " + std::to_string(p.levels));
  }
  for (std::size_t j = 0; j < p.details.size(); ++j) {
    const std::size_t r = padded_rows >> (j + 1);
    const std::size_t c = padded_cols >> (j + 1);
    const DetailSet& d = p.details[j];
    for (const Image* m : {&d.lh, &d.hl, &d.hh}) {
      if (m->rows() != r || m->cols() != c) {
        fail("level " + std::to_string(j + 1) + " detail is " + shape_string(*m) +
             ", expected " + detail::dims(r, c));
      }
    }
  }
}

inline Image reconstruct(const Pyramid& p) {
  validate(p);
  Image current = p.approximation;
  for (std::size_t j = p.details.size(); j-- > 0;) {
    const DetailSet& d = p.details[j];
    current = idwt2(SubbandSet{std::move(current), d.lh, d.hl, d.hh});
  }
  return crop(current, p.source_rows, p.source_cols);
}

inline double detail_energy(const Pyramid& p) {
  double e = 0.0;
  for (const DetailSet& d : p.details) {
    e += sum_of_squares(d.lh) + sum_of_squares(d.hl) + sum_of_squares(d.hh);
  }
  return e;
}

// Sum of squared coefficients over all 3k+1 matrices.
inline double total_energy(const Pyramid& p) {
  return sum_of_squares(p.approximation) + detail_energy(p);
}

}  // namespace tiledwt
