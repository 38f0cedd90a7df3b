#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "tiledwt/fileio.hpp"
#include "tiledwt/synth.hpp"

using namespace tiledwt;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tiledwt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tiledwt_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_pgm(const std::string& name, const Image& img) const {
    write_file(dir_ / name, save_pgm(img));
    return path(name);
  }

  fs::path dir_;
};

Image ramp(std::size_t n) {
  Image img(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) img(r, c) = static_cast<double>((r * 7 + c * 3) % 200);
  }
  return img;
}

}  // namespace

// ---------------------------------------------------------------------------
// dwt

TEST_F(CliTest, DwtSummaryFor256) {
  const std::string in = write_pgm("in.pgm", ramp(256));
  const RunResult r = run_cli({"dwt", in, "--levels", "3", "--out", path("p.hdwt")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("dims=256x256 levels=3 matrices=10 ll=32x32"), std::string::npos) << r.out;
  const Pyramid p = load_pyramid(read_file(path("p.hdwt")));
  EXPECT_EQ(p.matrix_count(), 10u);
  EXPECT_LT(max_abs_difference(reconstruct(p), ramp(256)), 1e-9);
}

TEST_F(CliTest, DwtConstantImageHasZeroDetailEnergy) {
  const std::string in = write_pgm("flat.pgm", Image(64, 64, 90.0));
  const RunResult r = run_cli({"dwt", in, "-k", "2", "-o", path("p.hdwt")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("detail_energy=0\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, DwtNotDivisibleAndPad) {
  const std::string in = write_pgm("odd.pgm", Image(20, 20, 5.0));
  const RunResult r = run_cli({"dwt", in, "--levels", "3", "--out", path("p.hdwt")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("NotDivisible"), std::string::npos) << r.err;

  const RunResult padded = run_cli({"dwt", in, "--levels", "3", "--pad", "--out", path("p.hdwt")});
  EXPECT_EQ(padded.code, 0) << padded.err;
  EXPECT_NE(padded.out.find("ll=3x3"), std::string::npos) << padded.out;
}

TEST_F(CliTest, DwtUsageAndDataErrors) {
  const std::string in = write_pgm("in.pgm", ramp(16));
  EXPECT_EQ(run_cli({"dwt", in, "--levels", "0", "--out", path("p")}).code, 2);
  EXPECT_EQ(run_cli({"dwt", in, "--levels", "x", "--out", path("p")}).code, 2);
  EXPECT_EQ(run_cli({"dwt", in}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  write_file(dir_ / "junk.pgm", as_bytes("P9 nonsense"));
  EXPECT_EQ(run_cli({"dwt", path("junk.pgm"), "--out", path("p")}).code, 3);
  EXPECT_EQ(run_cli({"dwt", path("missing.pgm"), "--out", path("p")}).code, 3);
}

TEST_F(CliTest, DwtJsonRecord) {
  const std::string in = write_pgm("in.pgm", ramp(32));
  const RunResult r = run_cli({"--json", "dwt", in, "--out", path("p.hdwt")});
  ASSERT_EQ(r.code, 0);
  const std::string last = r.out.substr(r.out.find('\n') + 1);
  const auto j = nlohmann::json::parse(last);
  EXPECT_EQ(j["matrices"], 10);
  EXPECT_EQ(j["ll_rows"], 4);
}

// ---------------------------------------------------------------------------
// inspect

TEST_F(CliTest, InspectIdenticalIsOk) {
  const std::string ref = write_pgm("ref.pgm", ramp(64));
  const RunResult r = run_cli({"inspect", "--reference", ref, "--test", ref, "--map",
                               path("map.pgm")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "distance=0 verdict=OK\n");
  const Image map = load_pgm(read_file(path("map.pgm")));
  EXPECT_EQ(map, Image(64, 64, 0.0));
}

TEST_F(CliTest, InspectDifferenceIsDefective) {
  const std::string ref = write_pgm("ref.pgm", ramp(64));
  Image t = ramp(64);
  for (std::size_t r = 10; r < 14; ++r) t(r, 30) += 40;
  const std::string test = write_pgm("test.pgm", t);
  const RunResult r =
      run_cli({"inspect", "-r", ref, "-t", test, "--map", path("map.pgm")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("verdict=DEFECTIVE"), std::string::npos);
  const Image map = load_pgm(read_file(path("map.pgm")));
  EXPECT_EQ(map(12, 30), 255.0);
  EXPECT_EQ(map(50, 50), 0.0);

  // A generous threshold accepts it.
  EXPECT_EQ(run_cli({"inspect", "-r", ref, "-t", test, "--threshold", "1000"}).code, 0);
}

TEST_F(CliTest, InspectSizeMismatchIsDataError) {
  const std::string a = write_pgm("a.pgm", ramp(64));
  const std::string b = write_pgm("b.pgm", ramp(32));
  const RunResult r = run_cli({"inspect", "-r", a, "-t", b});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("DimensionMismatch"), std::string::npos);
  EXPECT_EQ(run_cli({"inspect", "-r", a, "-t", a, "--threshold", "-1"}).code, 2);
}

// ---------------------------------------------------------------------------
// synth + batch

TEST_F(CliTest, SynthReportsCountsAndIsDeterministic) {
  const RunResult a = run_cli({"synth", "--size", "64", "--count", "10", "--defect-ratio", "0.3",
                               "--seed", "5", "--out", path("a")});
  const RunResult b = run_cli({"synth", "--size", "64", "--count", "10", "--defect-ratio", "0.3",
                               "--seed", "5", "--out", path("b")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("ok=7 defective=3"), std::string::npos) << a.out;
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    const fs::path other = dir_ / "b" / entry.path().filename();
    EXPECT_EQ(read_file(entry.path()), read_file(other)) << entry.path();
  }
}

TEST_F(CliTest, SynthRatioZero) {
  const RunResult r = run_cli({"synth", "--size", "32", "--count", "85", "--defect-ratio", "0",
                               "--out", path("c")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ok=85 defective=0"), std::string::npos) << r.out;
}

TEST_F(CliTest, SynthInvalidSpecIsUsageError) {
  EXPECT_EQ(run_cli({"synth", "--size", "100", "--out", path("c")}).code, 2);
  EXPECT_EQ(run_cli({"synth", "--defect-ratio", "2", "--out", path("c")}).code, 2);
  write_file(dir_ / "file", as_bytes("x"));
  EXPECT_EQ(run_cli({"synth", "--size", "32", "--count", "2", "--out", path("file")}).code, 3);
}

TEST_F(CliTest, BatchCalibratedOnSmallCorpus) {
  ASSERT_EQ(run_cli({"synth", "--size", "64", "--count", "20", "--seed", "3", "--out",
                     path("c")})
                .code,
            0);
  const std::string manifest = path("c/manifest.csv");
  const std::string ref = path("c/ref.pgm");
  const RunResult one = run_cli({"--json", "batch", "-m", manifest, "-r", ref, "--calibrate"});
  const RunResult four =
      run_cli({"--json", "batch", "-m", manifest, "-r", ref, "--calibrate", "--jobs", "4"});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, four.out);
  EXPECT_NE(one.out.find("(calibrated)"), std::string::npos);
  EXPECT_NE(one.out.find("CA=100.0%"), std::string::npos) << one.out;
  const std::string json_line = one.out.substr(one.out.rfind('{'));
  const auto j = nlohmann::json::parse(json_line);
  EXPECT_EQ(j["total"], 20);
  EXPECT_EQ(j["correct"], 20);
}

TEST_F(CliTest, BatchFixedZeroThresholdRejectsNoisyCleanTiles) {
  ASSERT_EQ(run_cli({"synth", "--size", "32", "--count", "6", "--defect-ratio", "0", "--out",
                     path("c")})
                .code,
            0);
  const RunResult r = run_cli({"batch", "-m", path("c/manifest.csv"), "-r", path("c/ref.pgm")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(fixed)"), std::string::npos);
  EXPECT_NE(r.out.find("CA=0.0%"), std::string::npos) << r.out;

  const RunResult cal =
      run_cli({"batch", "-m", path("c/manifest.csv"), "-r", path("c/ref.pgm"), "--calibrate"});
  EXPECT_NE(cal.out.find("CA=100.0%"), std::string::npos) << cal.out;
}

TEST_F(CliTest, BatchReportsEveryBadFile) {
  write_pgm("ref.pgm", ramp(32));
  write_pgm("good.pgm", ramp(32));
  write_pgm("small.pgm", ramp(16));
  write_file(dir_ / "m.csv",
             as_bytes("path,label\ngood.pgm,ok\nmissing.pgm,ok\nsmall.pgm,defective\n"));
  const RunResult r = run_cli({"batch", "-m", path("m.csv"), "-r", path("ref.pgm")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("missing.pgm"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("small.pgm"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("good.pgm"), std::string::npos) << r.err;
}

TEST_F(CliTest, BatchEmptyManifestAndBadFlags) {
  write_pgm("ref.pgm", ramp(32));
  write_file(dir_ / "m.csv", as_bytes("path,label\n"));
  const RunResult r = run_cli({"batch", "-m", path("m.csv"), "-r", path("ref.pgm")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("EmptyInput"), std::string::npos);
  EXPECT_EQ(run_cli({"batch", "-m", path("m.csv"), "-r", path("ref.pgm"), "--calibrate",
                     "--threshold", "1"})
                .code,
            2);
  EXPECT_EQ(run_cli({"batch", "-m", path("m.csv"), "-r", path("ref.pgm"), "--jobs", "0"}).code,
            2);
  write_file(dir_ / "bad.csv", as_bytes("path,label\na.pgm,maybe\n"));
  EXPECT_EQ(run_cli({"batch", "-m", path("bad.csv"), "-r", path("ref.pgm")}).code, 3);
}

TEST_F(CliTest, HelpExitsZero) {
  const RunResult r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("batch"), std::string::npos);
}
