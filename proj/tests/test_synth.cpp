#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "tiledwt/fileio.hpp"
#include "tiledwt/metrics.hpp"
#include "tiledwt/synth.hpp"

using namespace tiledwt;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected tiledwt::Error";
  return ErrorCode::InvalidArgument;
}

CorpusSpec small_spec(std::uint64_t seed = 1) {
  CorpusSpec s;
  s.size = 64;
  s.count = 12;
  s.seed = seed;
  return s;
}

std::size_t changed_pixels(const Image& a, const Image& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a.data()[i] != b.data()[i];
  return n;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tiledwt_synth_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(SplitMix64, MatchesPublishedSequence) {
  SplitMix64 g(1234567);
  EXPECT_EQ(g.next(), 6457827717110365317ULL);
  EXPECT_EQ(g.next(), 3203168211198807973ULL);
  EXPECT_EQ(g.next(), 9817491932198370423ULL);
  EXPECT_EQ(g.next(), 4593380528125082431ULL);
  EXPECT_EQ(g.next(), 16408922859458223821ULL);
}

TEST(SplitMix64, GaussianMoments) {
  SplitMix64 g(99);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = g.gaussian();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(SplitMix64, UniformRanges) {
  SplitMix64 g(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.uniform_open();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    const auto b = g.between(-3, 3);
    EXPECT_GE(b, -3);
    EXPECT_LE(b, 3);
  }
}

TEST(BaseTile, DeterministicPerSeed) {
  const CorpusSpec s = small_spec(7);
  EXPECT_EQ(generate_base_tile(s), generate_base_tile(s));
}

TEST(BaseTile, FlatAndNoiselessIsConstant) {
  CorpusSpec s = small_spec();
  s.noise_sigma = 0.0;
  s.texture_amplitude = 0.0;
  EXPECT_EQ(generate_base_tile(s), Image(64, 64, 128.0));
}

TEST(BaseTile, DifferentSeedsDiffer) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CorpusSpec a = small_spec(seed);
    CorpusSpec b = small_spec(seed + 1000);
    EXPECT_GT(changed_pixels(generate_base_tile(a), generate_base_tile(b)), 0u) << seed;
  }
}

TEST(BaseTile, IntegerValuedWithinRange) {
  const Image img = generate_base_tile(small_spec(3));
  for (double v : img.data()) {
    EXPECT_EQ(v, std::floor(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 255.0);
  }
}

TEST(BaseTile, RejectsBadSpec) {
  CorpusSpec s = small_spec();
  s.size = 100;
  EXPECT_EQ(code_of([&] { generate_base_tile(s); }), ErrorCode::BadSize);
  s = small_spec();
  s.defect_ratio = 1.5;
  EXPECT_EQ(code_of([&] { generate_base_tile(s); }), ErrorCode::InvalidArgument);
}

TEST(InjectDefect, EveryKindIsDeterministicAndVisible) {
  CorpusSpec spec = small_spec();
  const Image clean = generate_base_tile(spec);
  for (DefectKind kind : kAllDefectKinds) {
    const DefectSpec d{kind, -60.0, kind == DefectKind::Crack ? 40u : 6u, 1234};
    const Image a = inject_defect(clean, d);
    EXPECT_EQ(a, inject_defect(clean, d)) << to_string(kind);
    EXPECT_GT(changed_pixels(a, clean), 0u) << to_string(kind);
    EXPECT_GT(inspect_pair(clean, a, InspectConfig{}).distance, 0.0) << to_string(kind);
    EXPECT_EQ(inspect_pair(a, a, InspectConfig{}).distance, 0.0);
  }
}

TEST(InjectDefect, SpotIsADiscOfTheGivenRadius) {
  const Image flat(64, 64, 100.0);
  const Image out = inject_defect(flat, {DefectKind::Spot, 50.0, 5, 8});
  // Integer lattice points within radius 5 of a centre: 81.
  EXPECT_EQ(changed_pixels(out, flat), 81u);
  for (double v : out.data()) EXPECT_TRUE(v == 100.0 || v == 150.0);
}

TEST(InjectDefect, EdgeChipTouchesACorner) {
  const Image flat(32, 32, 100.0);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Image out = inject_defect(flat, {DefectKind::EdgeChip, 30.0, 6, seed});
    const bool corner = out(0, 0) != 100 || out(0, 31) != 100 || out(31, 0) != 100 ||
                        out(31, 31) != 100;
    EXPECT_TRUE(corner);
    EXPECT_EQ(out(16, 16), 100.0);
  }
}

TEST(InjectDefect, ClampsToPixelRange) {
  const Image out = inject_defect(Image(16, 16, 250.0), {DefectKind::Spot, 100.0, 3, 1});
  for (double v : out.data()) EXPECT_LE(v, 255.0);
}

TEST(InjectDefect, Errors) {
  const Image img(16, 16, 10.0);
  EXPECT_EQ(code_of([&] { inject_defect(img, {DefectKind::Spot, 5.0, 17, 1}); }),
            ErrorCode::ExtentTooLarge);
  EXPECT_EQ(code_of([&] { inject_defect(img, {DefectKind::Spot, 5.0, 0, 1}); }),
            ErrorCode::ExtentTooLarge);
  EXPECT_EQ(code_of([&] { inject_defect(img, {DefectKind::Spot, 0.0, 3, 1}); }),
            ErrorCode::InvalidArgument);
}

TEST(Corpus, CountsAndLabels) {
  CorpusSpec s;
  s.count = 85;
  s.defect_ratio = 0.5;
  const Corpus c = build_corpus(s);
  EXPECT_EQ(c.tests.size(), 85u);
  std::size_t defective = 0;
  for (std::size_t i = 0; i < c.tests.size(); ++i) {
    const bool labelled = c.manifest.entries[i].label == Verdict::Defective;
    EXPECT_EQ(labelled, c.tests[i].defect.has_value());
    EXPECT_EQ(c.manifest.entries[i].path, c.tests[i].file_name);
    defective += labelled;
  }
  EXPECT_EQ(defective, 43u);  // llround(42.5)
  EXPECT_EQ(c.tests[7].file_name, "test_0007.pgm");
}

TEST(Corpus, LabelSoundness) {
  const CorpusSpec s = small_spec(4);
  const Corpus c = build_corpus(s);
  const Image texture = render_texture(s);
  for (std::size_t i = 0; i < c.tests.size(); ++i) {
    const Image clean = add_noise(texture, s.noise_sigma, s.seed, i + 1);
    if (c.tests[i].defect) {
      EXPECT_EQ(c.tests[i].image, inject_defect(clean, *c.tests[i].defect));
      EXPECT_NE(c.tests[i].image, clean);
    } else {
      EXPECT_EQ(c.tests[i].image, clean);
    }
  }
}

TEST(Corpus, RatioZeroIsAllOk) {
  CorpusSpec s = small_spec();
  s.defect_ratio = 0.0;
  for (const auto& e : build_corpus(s).manifest.entries) EXPECT_EQ(e.label, Verdict::Ok);
}

TEST(Corpus, CleanTestsDifferFromReferenceByNoiseOnly) {
  CorpusSpec s = small_spec(9);
  s.defect_ratio = 0.0;
  const Corpus c = build_corpus(s);
  for (const CorpusImage& t : c.tests) {
    EXPECT_NE(t.image, c.reference);
    EXPECT_LT(max_abs_difference(t.image, c.reference), 12.0);
  }
}

TEST(Corpus, WritesIdenticalBytesTwice) {
  const fs::path a = scratch_dir("a");
  const fs::path b = scratch_dir("b");
  const Manifest ma = generate_corpus(small_spec(11), a);
  const Manifest mb = generate_corpus(small_spec(11), b);
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(read_file(a / "manifest.csv"), read_file(b / "manifest.csv"));
  EXPECT_EQ(read_file(a / "ref.pgm"), read_file(b / "ref.pgm"));
  for (const ManifestEntry& e : ma.entries) {
    EXPECT_EQ(read_file(a / e.path), read_file(b / e.path)) << e.path;
  }
  EXPECT_EQ(load_manifest(read_file(a / "manifest.csv")).entries, ma.entries);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Corpus, UnwritableDirectoryIsIoFailure) {
  const fs::path blocker = scratch_dir("blocker");
  write_file(blocker, as_bytes("not a directory"));
  EXPECT_EQ(code_of([&] { generate_corpus(small_spec(), blocker / "sub"); }),
            ErrorCode::IoFailure);
  fs::remove_all(blocker);
}

// Default parameters keep the weakest defect clearly above the clean band.
TEST(CorpusProperty, DefaultsSeparateDefectsFromClean) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CorpusSpec s;
    s.seed = seed;
    s.count = 40;
    const Corpus c = build_corpus(s);
    const ReferenceModel model(c.reference, InspectConfig{});
    std::vector<double> clean;
    double min_defect = 1e300;
    for (const CorpusImage& t : c.tests) {
      const double d = model.inspect(t.image).distance;
      if (t.defect) min_defect = std::min(min_defect, d);
      else clean.push_back(d);
    }
    EXPECT_GT(min_defect, 2.0 * calibrate_threshold(clean)) << "seed " << seed;
  }
}
