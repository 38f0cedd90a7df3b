// Sweeps corpus seeds at the current synth defaults and reports how far the
// weakest defect sits above the calibrated clean threshold. Used to freeze
// kDefaultNoiseSigma / kDefaultDefectAmplitude.
//
//   calibrate_synth [first_seed] [seed_count] [amplitude] [sigma]

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "tiledwt/tiledwt.hpp"

int main(int argc, char** argv) {
  using namespace tiledwt;
  const std::uint64_t first = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const std::uint64_t seeds = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 20;
  CorpusSpec spec;
  if (argc > 3) spec.defect_amplitude = std::strtod(argv[3], nullptr);
  if (argc > 4) spec.noise_sigma = std::strtod(argv[4], nullptr);

  double worst_ratio = std::numeric_limits<double>::infinity();
  std::printf("amplitude=%g sigma=%g\n", spec.defect_amplitude, spec.noise_sigma);
  for (std::uint64_t s = first; s < first + seeds; ++s) {
    spec.seed = s;
    const Corpus corpus = build_corpus(spec);
    const ReferenceModel model(corpus.reference, InspectConfig{});
    std::vector<double> clean;
    double min_defect = std::numeric_limits<double>::infinity();
    const char* weakest = "";
    for (const CorpusImage& t : corpus.tests) {
      const double d = model.inspect(t.image).distance;
      if (t.defect) {
        if (d < min_defect) {
          min_defect = d;
          weakest = to_string(t.defect->kind).data();
        }
      } else {
        clean.push_back(d);
      }
    }
    const double threshold = calibrate_threshold(clean);
    const double ratio = min_defect / threshold;
    worst_ratio = std::min(worst_ratio, ratio);
    std::printf("seed=%llu clean_max=%.3f threshold=%.3f min_defect=%.3f (%s) ratio=%.3f\n",
                static_cast<unsigned long long>(s),
                *std::max_element(clean.begin(), clean.end()), threshold, min_defect, weakest,
                ratio);
  }
  std::printf("worst ratio %.3f\n", worst_ratio);
  return 0;
}
