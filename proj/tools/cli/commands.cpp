#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "tiledwt/tiledwt.hpp"

namespace tiledwt::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Bad flag values detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest representation that round-trips; stable across runs.
std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Image load_image(const fs::path& path) { return load_pgm(read_file(path)); }

// ---------------------------------------------------------------------------

struct DwtOptions {
  std::string input;
  std::string out;
  std::uint32_t levels = 3;
  bool pad = false;
};

int cmd_dwt(const DwtOptions& o, bool as_json, std::ostream& out, std::ostream& err) {
  if (o.levels < 1) throw UsageError("--levels must be >= 1");
  Stopwatch sw;
  const Image img = load_image(o.input);
  const Pyramid p = decompose(img, o.levels, o.pad ? Padding::Replicate : Padding::Reject);
  write_file(o.out, save_pyramid(p));

  const double energy = total_energy(p);
  const double det = detail_energy(p);
  out << "dims=" << shape_string(img) << " levels=" << p.levels
      << " matrices=" << p.matrix_count() << " ll=" << shape_string(p.approximation)
      << " energy=" << fmt_double(energy) << " detail_energy=" << fmt_double(det) << '\n';
  if (as_json) {
    json j = {{"command", "dwt"},
              {"rows", img.rows()},
              {"cols", img.cols()},
              {"levels", p.levels},
              {"matrices", p.matrix_count()},
              {"ll_rows", p.approximation.rows()},
              {"ll_cols", p.approximation.cols()},
              {"energy", energy},
              {"detail_energy", det},
              {"output", o.out}};
    out << j.dump() << '\n';
  }
  err << "elapsed_ms=" << fmt_fixed(sw.elapsed_ms(), 3) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct InspectOptions {
  std::string reference;
  std::string test;
  std::uint32_t levels = 3;
  double threshold = 0.0;
  std::string map;
  double map_threshold = 0.0;
  bool pad = false;
};

int cmd_inspect(const InspectOptions& o, bool as_json, std::ostream& out, std::ostream& err) {
  if (o.levels < 1) throw UsageError("--levels must be >= 1");
  if (!(o.threshold >= 0.0)) throw UsageError("--threshold must be >= 0");
  if (!(o.map_threshold >= 0.0)) throw UsageError("--map-threshold must be >= 0");
  Stopwatch sw;
  const Image ref = load_image(o.reference);
  const Image test = load_image(o.test);

  InspectConfig cfg;
  cfg.levels = o.levels;
  cfg.distance_threshold = o.threshold;
  cfg.pad_enabled = o.pad;
  if (!o.map.empty()) cfg.map_coeff_threshold = o.map_threshold;

  const InspectionResult r = inspect_pair(ref, test, cfg);
  if (r.defect_map_fullres) {
    Image scaled = *r.defect_map_fullres;
    for (double& v : scaled.data()) v *= 255.0;
    write_file(o.map, save_pgm(scaled));
  }
  out << "distance=" << fmt_double(r.distance) << " verdict=" << to_string(r.verdict) << '\n';
  if (as_json) {
    json j = {{"command", "inspect"},
              {"distance", r.distance},
              {"verdict", to_string(r.verdict)},
              {"levels", cfg.levels},
              {"threshold", cfg.distance_threshold}};
    if (!o.map.empty()) j["map"] = o.map;
    out << j.dump() << '\n';
  }
  err << "elapsed_ms=" << fmt_fixed(sw.elapsed_ms(), 3) << '\n';
  return r.verdict == Verdict::Ok ? kExitOk : kExitDefective;
}

// ---------------------------------------------------------------------------

struct BatchOptions {
  std::string manifest;
  std::string reference;
  std::uint32_t levels = 3;
  std::optional<double> threshold;
  bool calibrate = false;
  double margin = kDefaultCalibrationMargin;
  unsigned jobs = 1;
  bool pad = false;
};

int cmd_batch(const BatchOptions& o, bool as_json, std::ostream& out, std::ostream& err) {
  if (o.levels < 1) throw UsageError("--levels must be >= 1");
  if (o.jobs < 1) throw UsageError("--jobs must be >= 1");
  if (o.threshold && !(*o.threshold >= 0.0)) throw UsageError("--threshold must be >= 0");
  if (!(o.margin >= 0.0)) throw UsageError("--margin must be >= 0");
  Stopwatch sw;

  Manifest manifest = load_manifest(read_file(o.manifest));
  manifest.reference_path = o.reference;
  if (manifest.entries.empty()) throw Error(ErrorCode::EmptyInput, "manifest has no entries");

  InspectConfig cfg;
  cfg.levels = o.levels;
  cfg.pad_enabled = o.pad;
  const Image reference = load_image(manifest.reference_path);
  const ReferenceModel model(reference, cfg);

  // Load everything first so every bad file is reported before aborting.
  const fs::path base = fs::path(o.manifest).parent_path();
  std::vector<Image> images(manifest.entries.size());
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const fs::path p = fs::path(manifest.entries[i].path).is_absolute()
                           ? fs::path(manifest.entries[i].path)
                           : base / manifest.entries[i].path;
    try {
      images[i] = load_image(p);
      if (!images[i].same_shape(reference)) {
        failures.push_back(p.string() + ": DimensionMismatch: " + shape_string(images[i]) +
                           " vs reference " + shape_string(reference));
      }
    } catch (const Error& e) {
      failures.push_back(p.string() + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    for (const std::string& f : failures) err << "error: " << f << '\n';
    err << "error: " << failures.size() << " unusable file(s); aborting\n";
    return kExitData;
  }

  std::vector<double> distances(images.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      distances[i] = model.inspect(images[i]).distance;
    }
  };
  const auto threads = static_cast<unsigned>(std::min<std::size_t>(o.jobs, images.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (o.calibrate) {
    std::vector<double> clean;
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (manifest.entries[i].label == Verdict::Ok) clean.push_back(distances[i]);
    }
    if (clean.empty()) throw Error(ErrorCode::EmptyInput, "no OK-labelled entries to calibrate from");
    cfg.distance_threshold = calibrate_threshold(clean, o.margin);
  } else {
    cfg.distance_threshold = o.threshold.value_or(0.0);
  }

  std::vector<LabeledVerdict> verdicts;
  verdicts.reserve(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    verdicts.push_back({manifest.entries[i].path, manifest.entries[i].label,
                        classify(distances[i], cfg), distances[i]});
  }
  const AccuracyReport rep = confusion(verdicts);

  out << "threshold=" << fmt_double(cfg.distance_threshold)
      << (o.calibrate ? " (calibrated)" : " (fixed)") << '\n'
      << "                 pred OK  pred DEFECTIVE\n"
      << "truth OK         " << std::setw(7) << rep.true_ok << "  " << std::setw(14)
      << rep.false_defective << '\n'
      << "truth DEFECTIVE  " << std::setw(7) << rep.false_ok << "  " << std::setw(14)
      << rep.true_defective << '\n'
      << "total=" << rep.total << " correct=" << rep.correct << '\n'
      << "CA=" << fmt_fixed(rep.ca_percent, 1) << "%\n";
  if (as_json) {
    json j = {{"command", "batch"},
              {"levels", cfg.levels},
              {"threshold", cfg.distance_threshold},
              {"calibrated", o.calibrate},
              {"total", rep.total},
              {"correct", rep.correct},
              {"true_ok", rep.true_ok},
              {"true_defective", rep.true_defective},
              {"false_ok", rep.false_ok},
              {"false_defective", rep.false_defective},
              {"ca_percent", rep.ca_percent}};
    out << j.dump() << '\n';
  }
  err << "elapsed_ms=" << fmt_fixed(sw.elapsed_ms(), 3) << " jobs=" << threads << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  CorpusSpec spec;
  std::string out;
};

int cmd_synth(const SynthOptions& o, bool as_json, std::ostream& out, std::ostream& err) {
  try {
    o.spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  Stopwatch sw;
  const Manifest m = generate_corpus(o.spec, o.out);
  std::size_t ok = 0;
  for (const ManifestEntry& e : m.entries) ok += e.label == Verdict::Ok;
  const std::size_t defective = m.entries.size() - ok;
  const fs::path manifest_path = fs::path(o.out) / "manifest.csv";
  const fs::path ref_path = fs::path(o.out) / m.reference_path;
  out << "manifest=" << manifest_path.string() << " reference=" << ref_path.string() << '\n'
      << "ok=" << ok << " defective=" << defective << '\n';
  if (as_json) {
    json j = {{"command", "synth"},         {"manifest", manifest_path.string()},
              {"reference", ref_path.string()}, {"size", o.spec.size},
              {"count", o.spec.count},      {"seed", o.spec.seed},
              {"ok", ok},                   {"defective", defective}};
    out << j.dump() << '\n';
  }
  err << "elapsed_ms=" << fmt_fixed(sw.elapsed_ms(), 3) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Haar-wavelet tile inspection toolkit", "tiledwt"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Also emit one JSON record per command on stdout");

  DwtOptions dwt;
  auto* dwt_cmd = app.add_subcommand("dwt", "Decompose a PGM image into an HDWT pyramid file");
  dwt_cmd->add_option("input", dwt.input, "Input PGM")->required();
  dwt_cmd->add_option("--levels,-k", dwt.levels, "Decomposition levels")->capture_default_str();
  dwt_cmd->add_option("--out,-o", dwt.out, "Output HDWT file")->required();
  dwt_cmd->add_flag("--pad", dwt.pad, "Replicate last row/column up to a multiple of 2^k");

  InspectOptions ins;
  auto* ins_cmd = app.add_subcommand("inspect", "Compare one test image against a reference");
  ins_cmd->add_option("--reference,-r", ins.reference, "Defect-free reference PGM")->required();
  ins_cmd->add_option("--test,-t", ins.test, "Test PGM")->required();
  ins_cmd->add_option("--levels,-k", ins.levels, "Decomposition levels")->capture_default_str();
  ins_cmd->add_option("--threshold", ins.threshold, "Distance threshold")->capture_default_str();
  ins_cmd->add_option("--map", ins.map, "Write full-resolution defect map PGM here");
  ins_cmd->add_option("--map-threshold", ins.map_threshold, "Per-coefficient defect-map cutoff")
      ->capture_default_str();
  ins_cmd->add_flag("--pad", ins.pad, "Replicate last row/column up to a multiple of 2^k");

  BatchOptions bat;
  double batch_threshold = 0.0;
  auto* bat_cmd = app.add_subcommand("batch", "Classify a manifest of images and report accuracy");
  bat_cmd->add_option("--manifest,-m", bat.manifest, "Manifest CSV (path,label)")->required();
  bat_cmd->add_option("--reference,-r", bat.reference, "Defect-free reference PGM")->required();
  bat_cmd->add_option("--levels,-k", bat.levels, "Decomposition levels")->capture_default_str();
  auto* thr_opt = bat_cmd->add_option("--threshold", batch_threshold, "Fixed distance threshold");
  auto* cal_opt = bat_cmd->add_flag("--calibrate", bat.calibrate,
                                    "Derive the threshold from OK-labelled entries");
  thr_opt->excludes(cal_opt);
  bat_cmd->add_option("--margin", bat.margin, "Calibration margin")->capture_default_str();
  bat_cmd->add_option("--jobs,-j", bat.jobs, "Worker threads")->capture_default_str();
  bat_cmd->add_flag("--pad", bat.pad, "Replicate last row/column up to a multiple of 2^k");

  SynthOptions syn;
  auto* syn_cmd = app.add_subcommand("synth", "Generate a labelled synthetic tile corpus");
  syn_cmd->add_option("--size", syn.spec.size, "Tile side length (power of two)")
      ->capture_default_str();
  syn_cmd->add_option("--count", syn.spec.count, "Number of test images")->capture_default_str();
  syn_cmd->add_option("--defect-ratio", syn.spec.defect_ratio, "Fraction carrying a defect")
      ->capture_default_str();
  syn_cmd->add_option("--seed", syn.spec.seed, "Corpus seed")->capture_default_str();
  syn_cmd->add_option("--noise-sigma", syn.spec.noise_sigma, "Acquisition noise sigma")
      ->capture_default_str();
  syn_cmd->add_option("--amplitude", syn.spec.defect_amplitude, "Defect intensity magnitude")
      ->capture_default_str();
  syn_cmd->add_option("--out,-o", syn.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*dwt_cmd) return cmd_dwt(dwt, as_json, out, err);
    if (*ins_cmd) return cmd_inspect(ins, as_json, out, err);
    if (*bat_cmd) {
      if (*thr_opt) bat.threshold = batch_threshold;
      return cmd_batch(bat, as_json, out, err);
    }
    if (*syn_cmd) return cmd_synth(syn, as_json, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tiledwt::cli
