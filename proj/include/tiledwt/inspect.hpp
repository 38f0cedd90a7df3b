#pragma once

// Reference/test comparison on level-k Haar approximations.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "tiledwt/error.hpp"
#include "tiledwt/image.hpp"
#include "tiledwt/wavelet.hpp"

namespace tiledwt {

enum class Verdict { Ok, Defective };

constexpr std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::Ok ? "OK" : "DEFECTIVE";
}

struct InspectConfig {
  std::uint32_t levels = 3;
  // OK iff distance <= distance_threshold + epsilon.
  double distance_threshold = 0.0;
  double epsilon = 1e-9;
  // When set, per-coefficient |r - t| above this marks a defect-map cell.
  std::optional<double> map_coeff_threshold;
  bool pad_enabled = false;

  void validate() const {
    if (levels < 1) throw Error(ErrorCode::InvalidArgument, "levels must be >= 1");
    if (!(distance_threshold >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "distance threshold must be >= 0");
    }
    if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
    if (map_coeff_threshold && !(*map_coeff_threshold >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "map threshold must be >= 0");
    }
  }

  Padding padding() const noexcept { return pad_enabled ? Padding::Replicate : Padding::Reject; }
};

struct DefectMaps {
  Image map_ll;    // 0/1 at LL_k resolution
  Image map_full;  // nearest-neighbour upsampled
};

struct InspectionResult {
  double distance = 0.0;
  Verdict verdict = Verdict::Ok;
  std::optional<Image> defect_map;
  std::optional<Image> defect_map_fullres;
};

inline double euclidean_distance(const Image& ref_ll, const Image& test_ll) {
  if (!ref_ll.same_shape(test_ll)) {
    throw Error(ErrorCode::DimensionMismatch,
                shape_string(ref_ll) + " vs " + shape_string(test_ll));
  }
  const auto r = ref_ll.data();
  const auto t = test_ll.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - t[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

inline Verdict classify(double distance, const InspectConfig& config) {
  if (!(distance >= 0.0)) {
    throw Error(ErrorCode::NegativeDistance, std::to_string(distance));
  }
  return distance <= config.distance_threshold + config.epsilon ? Verdict::Ok
                                                                : Verdict::Defective;
}

// Nearest-neighbour block replication by `factor` on both axes.
inline Image upsample_nearest(const Image& src, std::size_t factor) {
  if (factor == 0) throw Error(ErrorCode::InvalidArgument, "upscale factor must be >= 1");
  Image out(src.rows() * factor, src.cols() * factor);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = src(r / factor, c / factor);
  }
  return out;
}

inline DefectMaps defect_map(const Image& ref_ll, const Image& test_ll, double coeff_threshold,
                             std::size_t upscale) {
  if (!ref_ll.same_shape(test_ll)) {
    throw Error(ErrorCode::DimensionMismatch,
                shape_string(ref_ll) + " vs " + shape_string(test_ll));
  }
  if (!(coeff_threshold >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "coefficient threshold must be >= 0");
  }
  if (upscale == 0 || (upscale & (upscale - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "upscale " + std::to_string(upscale) + " is not a power of two");
  }
  Image map(ref_ll.rows(), ref_ll.cols());
  for (std::size_t i = 0; i < map.size(); ++i) {
    map.data()[i] = std::abs(ref_ll.data()[i] - test_ll.data()[i]) > coeff_threshold ? 1.0 : 0.0;
  }
  Image full = upsample_nearest(map, upscale);
  return {std::move(map), std::move(full)};
}

// Decomposes a reference once so that many test images can be compared
// against it. Immutable after construction; share freely across threads.
class ReferenceModel {
 public:
  ReferenceModel(const Image& reference, InspectConfig config) : config_(std::move(config)) {
    config_.validate();
    rows_ = reference.rows();
    cols_ = reference.cols();
    approximation_ = decompose(reference, config_.levels, config_.padding()).approximation;
  }

  const InspectConfig& config() const noexcept { return config_; }
  const Image& approximation() const noexcept { return approximation_; }

  InspectionResult inspect(const Image& test) const {
    if (test.rows() != rows_ || test.cols() != cols_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "reference " + detail::dims(rows_, cols_) + " vs test " + shape_string(test));
    }
    const Image test_ll = decompose(test, config_.levels, config_.padding()).approximation;
    InspectionResult result;
    result.distance = euclidean_distance(approximation_, test_ll);
    result.verdict = classify(result.distance, config_);
    if (config_.map_coeff_threshold) {
      DefectMaps maps = defect_map(approximation_, test_ll, *config_.map_coeff_threshold,
                                   detail::pow2(config_.levels));
      result.defect_map = std::move(maps.map_ll);
      result.defect_map_fullres = crop(maps.map_full, rows_, cols_);
    }
    return result;
  }

 private:
  InspectConfig config_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Image approximation_;
};

inline InspectionResult inspect_pair(const Image& reference, const Image& test,
                                     const InspectConfig& config) {
  if (!reference.same_shape(test)) {
    throw Error(ErrorCode::DimensionMismatch,
                "reference " + shape_string(reference) + " vs test " + shape_string(test));
  }
  return ReferenceModel(reference, config).inspect(test);
}

}  // namespace tiledwt
