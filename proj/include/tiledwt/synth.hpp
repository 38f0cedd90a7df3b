#pragma once

// Deterministic synthetic tile corpora.
//
// Every random draw comes from SplitMix64 streams derived from the corpus
// seed, so a CorpusSpec fully determines every pixel regardless of platform
// or of the order in which images are generated:
//
//   mix64(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//              return z ^ (z >> 31)
//   next():    state += 0x9E3779B97F4A7C15; return mix64(state)
//   stream(seed, tag, index) seeds a generator with
//              mix64(mix64(seed ^ tag) + index * 0xD1B54A32D192ED03)
//
// Uniforms take the top 53 bits; normals use Box-Muller (cosine branch only,
// one normal per two uniforms).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tiledwt/error.hpp"
#include "tiledwt/fileio.hpp"
#include "tiledwt/image.hpp"
#include "tiledwt/imageio.hpp"
#include "tiledwt/inspect.hpp"

namespace tiledwt {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // [0, 1)
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0, 1)
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // [0, n); n > 0
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  // [lo, hi]
  std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double gaussian() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

enum class StreamTag : std::uint64_t {
  Texture = 0x7465787475726500ULL,
  Noise = 0x6E6F697365000000ULL,
  Defect = 0x6465666563740000ULL,
  Labels = 0x6C6162656C730000ULL,
};

inline SplitMix64 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept {
  const auto base = mix64(seed ^ static_cast<std::uint64_t>(tag));
  return SplitMix64(mix64(base + index * 0xD1B54A32D192ED03ULL));
}

// ---------------------------------------------------------------------------
// Defects

enum class DefectKind { Spot, Crack, EdgeChip, Blob };

inline constexpr std::array<DefectKind, 4> kAllDefectKinds = {
    DefectKind::Spot, DefectKind::Crack, DefectKind::EdgeChip, DefectKind::Blob};

constexpr std::string_view to_string(DefectKind k) noexcept {
  switch (k) {
    case DefectKind::Spot: return "spot";
    case DefectKind::Crack: return "crack";
    case DefectKind::EdgeChip: return "edge_chip";
    case DefectKind::Blob: return "blob";
  }
  return "unknown";
}

struct DefectSpec {
  DefectKind kind = DefectKind::Spot;
  double amplitude = 0.0;   // intensity delta, nonzero
  std::size_t extent = 1;   // radius (spot, blob, edge_chip) or walk length (crack)
  std::uint64_t seed = 0;

  friend bool operator==(const DefectSpec&, const DefectSpec&) = default;
};

namespace synth_detail {

using Mask = std::vector<std::uint8_t>;

// Centre coordinate so that a radius-r shape fits when it can.
inline std::int64_t seeded_centre(SplitMix64& rng, std::size_t dim, std::size_t r) {
  const auto d = static_cast<std::int64_t>(dim);
  const auto rr = static_cast<std::int64_t>(r);
  if (2 * rr + 1 <= d) return rng.between(rr, d - 1 - rr);
  return d / 2;
}

inline void mark(Mask& m, const Image& img, std::int64_t r, std::int64_t c) {
  if (r < 0 || c < 0 || r >= static_cast<std::int64_t>(img.rows()) ||
      c >= static_cast<std::int64_t>(img.cols())) {
    return;
  }
  m[static_cast<std::size_t>(r) * img.cols() + static_cast<std::size_t>(c)] = 1;
}

inline void mark_disc(Mask& m, const Image& img, double cr, double cc, double radius) {
  const auto lo_r = static_cast<std::int64_t>(std::floor(cr - radius));
  const auto hi_r = static_cast<std::int64_t>(std::ceil(cr + radius));
  const auto lo_c = static_cast<std::int64_t>(std::floor(cc - radius));
  const auto hi_c = static_cast<std::int64_t>(std::ceil(cc + radius));
  for (auto r = lo_r; r <= hi_r; ++r) {
    for (auto c = lo_c; c <= hi_c; ++c) {
      const double dr = static_cast<double>(r) - cr;
      const double dc = static_cast<double>(c) - cc;
      if (dr * dr + dc * dc <= radius * radius) mark(m, img, r, c);
    }
  }
}

inline void spot(Mask& m, const Image& img, SplitMix64& rng, std::size_t extent) {
  const auto cr = seeded_centre(rng, img.rows(), extent);
  const auto cc = seeded_centre(rng, img.cols(), extent);
  mark_disc(m, img, static_cast<double>(cr), static_cast<double>(cc),
            static_cast<double>(extent));
}

// 8-connected random walk with a persistent heading; reflects off borders.
inline void crack(Mask& m, const Image& img, SplitMix64& rng, std::size_t extent) {
  static constexpr std::array<std::array<int, 2>, 8> kDirs = {
      {{0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}}};
  const auto rows = static_cast<std::int64_t>(img.rows());
  const auto cols = static_cast<std::int64_t>(img.cols());
  std::int64_t r = rng.between(rows / 4, rows - 1 - rows / 4);
  std::int64_t c = rng.between(cols / 4, cols - 1 - cols / 4);
  auto heading = static_cast<int>(rng.below(8));
  const bool thick = rng.below(2) == 1;
  for (std::size_t step = 0; step < extent; ++step) {
    mark(m, img, r, c);
    if (thick) {
      // Second pixel perpendicular-ish to the heading.
      const auto& side = kDirs[static_cast<std::size_t>((heading + 2) % 8)];
      mark(m, img, r + side[0], c + side[1]);
    }
    const double turn = rng.uniform();
    if (turn < 0.2) heading = (heading + 7) % 8;
    else if (turn < 0.4) heading = (heading + 1) % 8;
    auto nr = r + kDirs[static_cast<std::size_t>(heading)][0];
    auto nc = c + kDirs[static_cast<std::size_t>(heading)][1];
    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) {
      heading = (heading + 4) % 8;
      nr = std::clamp<std::int64_t>(r + kDirs[static_cast<std::size_t>(heading)][0], 0, rows - 1);
      nc = std::clamp<std::int64_t>(c + kDirs[static_cast<std::size_t>(heading)][1], 0, cols - 1);
    }
    r = nr;
    c = nc;
  }
}

// Quarter disc centred on one of the four image corners.
inline void edge_chip(Mask& m, const Image& img, SplitMix64& rng, std::size_t extent) {
  const auto corner = rng.below(4);
  const double cr = (corner & 1) ? static_cast<double>(img.rows() - 1) : 0.0;
  const double cc = (corner & 2) ? static_cast<double>(img.cols() - 1) : 0.0;
  mark_disc(m, img, cr, cc, static_cast<double>(extent));
}

// Disc whose radius is modulated by a few low harmonics.
inline void blob(Mask& m, const Image& img, SplitMix64& rng, std::size_t extent) {
  const auto cr = seeded_centre(rng, img.rows(), extent);
  const auto cc = seeded_centre(rng, img.cols(), extent);
  std::array<double, 3> amp{};
  std::array<double, 3> phase{};
  for (std::size_t h = 0; h < amp.size(); ++h) {
    amp[h] = 0.1 * rng.uniform();
    phase[h] = 2.0 * std::numbers::pi * rng.uniform();
  }
  const auto r0 = static_cast<double>(extent);
  const auto reach = static_cast<std::int64_t>(std::ceil(r0 * 1.3));
  for (auto dr = -reach; dr <= reach; ++dr) {
    for (auto dc = -reach; dc <= reach; ++dc) {
      const double theta = std::atan2(static_cast<double>(dr), static_cast<double>(dc));
      double radius = r0;
      for (std::size_t h = 0; h < amp.size(); ++h) {
        radius += r0 * amp[h] * std::cos(static_cast<double>(h + 2) * theta + phase[h]);
      }
      if (static_cast<double>(dr * dr + dc * dc) <= radius * radius) {
        mark(m, img, cr + dr, cc + dc);
      }
    }
  }
}

}  // namespace synth_detail

inline Image inject_defect(const Image& image, const DefectSpec& spec) {
  if (spec.amplitude == 0.0 || !std::isfinite(spec.amplitude)) {
    throw Error(ErrorCode::InvalidArgument, "defect amplitude must be finite and nonzero");
  }
  if (spec.extent < 1 || spec.extent > std::min(image.rows(), image.cols())) {
    throw Error(ErrorCode::ExtentTooLarge,
                "extent " + std::to_string(spec.extent) + " on " + shape_string(image));
  }
  SplitMix64 rng(spec.seed);
  synth_detail::Mask mask(image.size(), 0);
  switch (spec.kind) {
    case DefectKind::Spot: synth_detail::spot(mask, image, rng, spec.extent); break;
    case DefectKind::Crack: synth_detail::crack(mask, image, rng, spec.extent); break;
    case DefectKind::EdgeChip: synth_detail::edge_chip(mask, image, rng, spec.extent); break;
    case DefectKind::Blob: synth_detail::blob(mask, image, rng, spec.extent); break;
  }
  Image out = image;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out.data()[i] = std::clamp(out.data()[i] + spec.amplitude, 0.0, 255.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tiles and corpora

// Frozen defaults; tools/calibrate_synth.cpp reproduces the sweep behind them.
inline constexpr double kDefaultNoiseSigma = 1.0;
inline constexpr double kDefaultDefectAmplitude = 60.0;

struct CorpusSpec {
  std::size_t size = 256;
  std::size_t count = 85;
  double defect_ratio = 0.5;
  double noise_sigma = kDefaultNoiseSigma;
  std::uint64_t seed = 1;
  // Texture: base_level + sum of `gratings` cosines whose amplitudes add up
  // to texture_amplitude. texture_amplitude 0 gives a flat tile.
  double base_level = 128.0;
  double texture_amplitude = 24.0;
  std::size_t gratings = 3;
  double defect_amplitude = kDefaultDefectAmplitude;

  void validate() const {
    if (size < 2 || (size & (size - 1)) != 0) {
      throw Error(ErrorCode::BadSize, "size " + std::to_string(size) + " is not a power of two");
    }
    if (!(defect_ratio >= 0.0 && defect_ratio <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "defect ratio must lie in [0, 1]");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
      throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
    }
    if (!(texture_amplitude >= 0.0) || !std::isfinite(base_level)) {
      throw Error(ErrorCode::InvalidArgument, "bad texture parameters");
    }
    if (defect_amplitude <= 0.0 || !std::isfinite(defect_amplitude)) {
      throw Error(ErrorCode::InvalidArgument, "defect amplitude must be > 0");
    }
  }
};

// Noise-free texture, rounded to integer intensities and clamped.
inline Image render_texture(const CorpusSpec& spec) {
  spec.validate();
  const std::size_t n = spec.size;
  SplitMix64 rng = make_stream(spec.seed, StreamTag::Texture, 0);
  struct Grating {
    double fx, fy, phase;
  };
  std::vector<Grating> gratings;
  for (std::size_t g = 0; g < spec.gratings; ++g) {
    auto fx = static_cast<double>(rng.between(0, 3));
    auto fy = static_cast<double>(rng.between(0, 3));
    if (fx == 0.0 && fy == 0.0) fx = 1.0;
    gratings.push_back({fx, fy, 2.0 * std::numbers::pi * rng.uniform()});
  }
  const double per = spec.gratings ? spec.texture_amplitude / static_cast<double>(spec.gratings)
                                   : 0.0;
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  Image img(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double v = spec.base_level;
      for (const Grating& g : gratings) {
        v += per * std::cos(w * (g.fx * static_cast<double>(c) + g.fy * static_cast<double>(r)) +
                            g.phase);
      }
      img(r, c) = to_pixel(v);
    }
  }
  return img;
}

// Adds integer-rounded Gaussian noise drawn from stream `index`.
inline Image add_noise(const Image& img, double sigma, std::uint64_t seed, std::uint64_t index) {
  if (sigma == 0.0) return img;
  SplitMix64 rng = make_stream(seed, StreamTag::Noise, index);
  Image out = img;
  for (double& v : out.data()) {
    v = std::clamp(v + std::nearbyint(sigma * rng.gaussian()), 0.0, 255.0);
  }
  return out;
}

// The clean reference tile: texture plus noise stream 0.
inline Image generate_base_tile(const CorpusSpec& spec) {
  return add_noise(render_texture(spec), spec.noise_sigma, spec.seed, 0);
}

// Draws kind, extent, polarity and placement seed for test image `index`.
inline DefectSpec corpus_defect(const CorpusSpec& spec, std::uint64_t index) {
  SplitMix64 rng = make_stream(spec.seed, StreamTag::Defect, index);
  DefectSpec d;
  d.kind = kAllDefectKinds[rng.below(kAllDefectKinds.size())];
  const std::size_t n = spec.size;
  const auto cap = [](std::int64_t v, std::size_t limit) {
    return static_cast<std::size_t>(
        std::clamp<std::int64_t>(v, 1, static_cast<std::int64_t>(std::max<std::size_t>(limit, 1))));
  };
  switch (d.kind) {
    case DefectKind::Spot: d.extent = cap(rng.between(4, 10), n / 4); break;
    case DefectKind::Crack: d.extent = cap(rng.between(40, 96), n); break;
    case DefectKind::EdgeChip: d.extent = cap(rng.between(8, 20), n / 4); break;
    case DefectKind::Blob: d.extent = cap(rng.between(5, 12), n / 4); break;
  }
  d.amplitude = rng.below(2) ? spec.defect_amplitude : -spec.defect_amplitude;
  d.seed = rng.next();
  return d;
}

struct CorpusImage {
  std::string file_name;
  Image image;
  std::optional<DefectSpec> defect;
};

struct Corpus {
  Image reference;
  std::vector<CorpusImage> tests;
  Manifest manifest;  // paths relative to the corpus directory
};

inline std::string test_file_name(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "test_" + digits + ".pgm";
}

inline std::size_t defective_count(const CorpusSpec& spec) {
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.count) * spec.defect_ratio));
}

// Builds the corpus in memory. Test i uses noise stream i+1 and defect
// stream i; the defective subset is a seeded Fisher-Yates selection.
inline Corpus build_corpus(const CorpusSpec& spec) {
  spec.validate();
  const Image texture = render_texture(spec);
  Corpus corpus;
  corpus.reference = add_noise(texture, spec.noise_sigma, spec.seed, 0);
  corpus.manifest.reference_path = "ref.pgm";

  std::vector<std::size_t> order(spec.count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 pick = make_stream(spec.seed, StreamTag::Labels, 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[pick.below(i)]);
  }
  std::vector<bool> defective(spec.count, false);
  for (std::size_t i = 0; i < defective_count(spec); ++i) defective[order[i]] = true;

  corpus.tests.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    CorpusImage t;
    t.file_name = test_file_name(i);
    t.image = add_noise(texture, spec.noise_sigma, spec.seed, i + 1);
    if (defective[i]) {
      t.defect = corpus_defect(spec, i);
      t.image = inject_defect(t.image, *t.defect);
    }
    corpus.manifest.entries.push_back(
        {t.file_name, defective[i] ? Verdict::Defective : Verdict::Ok});
    corpus.tests.push_back(std::move(t));
  }
  return corpus;
}

// Writes ref.pgm, test_NNNN.pgm and manifest.csv (binary PGM) into out_dir.
inline Manifest generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir) {
  Corpus corpus = build_corpus(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / corpus.manifest.reference_path, save_pgm(corpus.reference));
  for (const CorpusImage& t : corpus.tests) write_file(out_dir / t.file_name, save_pgm(t.image));
  write_file(out_dir / "manifest.csv", save_manifest(corpus.manifest));
  return corpus.manifest;
}

}  // namespace tiledwt
