// badband: command-line front end.
//
//   badband detect      --input X.hdr --thres V [--targets M] [--seed S] ...
//   badband sensitivity --input X.hdr --thres-list V1,V2 [--grid default|SPEC] [--repeats R]
//   badband simulate    --spec FILE | --figure1 [--score [--thres V]]
//   badband inspect     --input X.hdr --bands 1,5,10-12
//
// Exit codes: 0 success, 2 input/config error, 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "badband/badband.hpp"

namespace fs = std::filesystem;
using namespace badband;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::string sha256_hex(std::initializer_list<std::span<const std::byte>> parts) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (auto part : parts) EVP_DigestUpdate(ctx, part.data(), part.size());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

std::string dataset_sha256(const EnviDataset& ds) {
  const std::span<const char> text(ds.header_text.data(), ds.header_text.size());
  return sha256_hex({std::as_bytes(text), std::span<const std::byte>(ds.payload)});
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!detail::trim(item).empty()) out.push_back(detail::trim(item));
  return out;
}

std::size_t parse_count(const std::string& s, std::string_view what) {
  const auto v = detail::parse_double(s);
  if (!v || *v < 0 || *v != std::floor(*v)) throw InputError("invalid " + std::string(what) + " '" + s + "'");
  return static_cast<std::size_t>(*v);
}

/// "1,4,7-9" -> {1,4,7,8,9}; "a-b:step" strides.
std::vector<std::size_t> parse_index_list(const std::string& text, std::string_view what) {
  std::vector<std::size_t> out;
  for (const std::string& item : split(text, ',')) {
    std::string range = item;
    std::size_t step = 1;
    if (const auto colon = item.find(':'); colon != std::string::npos) {
      range = item.substr(0, colon);
      step = parse_count(item.substr(colon + 1), what);
      if (step == 0) throw InputError("zero step in " + std::string(what) + " '" + item + "'");
    }
    if (const auto dash = range.find('-'); dash != std::string::npos && dash > 0) {
      const std::size_t a = parse_count(range.substr(0, dash), what);
      const std::size_t b = parse_count(range.substr(dash + 1), what);
      if (b < a) throw InputError("descending range in " + std::string(what) + " '" + item + "'");
      for (std::size_t v = a; v <= b; v += step) out.push_back(v);
    } else {
      out.push_back(parse_count(range, what));
    }
  }
  if (out.empty()) throw InputError(std::string(what) + " is empty");
  return out;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    const auto v = detail::parse_double(item);
    if (!v || !std::isfinite(*v) || *v < 0) throw InputError("invalid threshold '" + item + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw InputError("threshold list is empty");
  return out;
}

struct Formats {
  bool json = false, csv = false, svg = false;
};

Formats parse_formats(const std::string& text) {
  Formats f;
  for (const std::string& item : split(text, ',')) {
    if (item == "json") f.json = true;
    else if (item == "csv") f.csv = true;
    else if (item == "svg") f.svg = true;
    else throw InputError("unknown output format '" + item + "' (json, csv, svg)");
  }
  if (!f.json && !f.csv && !f.svg) throw InputError("--formats must name at least one format");
  return f;
}

std::string command_line;

void write_provenance(const fs::path& dir, const std::string& input_sha256, unsigned threads,
                      std::optional<std::uint64_t> seed) {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["command_line"] = command_line;
  j["input_sha256"] = input_sha256;
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
  j["threads"] = threads;
  write_text(dir / "provenance.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct DetectArgs {
  std::string input;
  double thres = -1.0;
  std::size_t targets = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::uint64_t> noise_seed;
  std::string convention = "norm-weighted";
  std::string formats = "json,csv,svg";
  std::string out = ".";
  unsigned threads = 0;
  bool log_y = false;
};

int run_detect(const DetectArgs& a) {
  const Formats formats = parse_formats(a.formats);
  DetectOptions opt;
  opt.targets = a.targets;
  opt.seed = a.seed;
  opt.noise_seed = a.noise_seed;
  opt.convention = parse_convention(a.convention);
  opt.threshold = a.thres;
  opt.exec.threads = a.threads;
  if (a.targets == 0) throw InputError("--targets must be at least 1");

  const EnviDataset ds = read_envi(a.input);
  const BadBandReport report = detect_bad_bands(ds.cube, opt);
  const std::string sha = dataset_sha256(ds);

  const fs::path dir(a.out);
  ensure_dir(dir);
  RunProvenance run{sha, a.seed, a.targets, opt.convention};
  if (formats.json) write_text(dir / "report.json", report_to_json(report, run, ds.header.bbl).dump(2) + "\n");
  if (formats.csv) write_text(dir / "report.csv", report_to_csv(report, ds.cube.wavelengths()));
  if (formats.svg) write_text(dir / "mav.svg", mav_svg(report.mav.values, a.thres, ds.header.bbl, a.log_y));
  write_provenance(dir, sha, opt.exec.resolved_threads(), a.seed);

  std::cout << "selected " << report.selected_bands.size() << " of " << ds.cube.bands() << " bands:";
  for (const std::string& r : report.ranges) std::cout << ' ' << r;
  std::cout << '\n';
  if (report.ridge_applied > 0.0) std::cerr << "note: covariance ridge " << report.ridge_applied << " applied\n";
  if (report.degenerate) std::cerr << "warning: every band is constant; the run is degenerate\n";
  return 0;
}

struct SensitivityArgs {
  std::string input;
  std::string thres_list;
  std::string grid = "default";
  std::size_t repeats = kDefaultSweepRepeats;
  std::uint64_t seed = kDefaultSeed;
  std::string convention = "norm-weighted";
  std::string out = ".";
  unsigned threads = 0;
};

int run_sensitivity(const SensitivityArgs& a) {
  const std::vector<double> thresholds = parse_thresholds(a.thres_list);
  const std::vector<std::size_t> grid =
      a.grid == "default" ? default_target_grid() : parse_index_list(a.grid, "target grid");
  const NmfConvention convention = parse_convention(a.convention);
  ExecutionOptions exec{a.threads};

  const EnviDataset ds = read_envi(a.input);
  const SweepResult sweep = sensitivity_sweep(ds.cube, grid, thresholds, a.repeats, a.seed, convention, exec);
  for (std::size_t m : grid)
    if (m == 0 || m > ds.cube.pixels())
      std::cerr << "warning: M = " << m << " exceeds the " << ds.cube.pixels() << " pixels; cells skipped\n";

  const fs::path dir(a.out);
  ensure_dir(dir);
  write_text(dir / "sweep.csv", sweep_to_csv(sweep));
  write_text(dir / "sweep_summary.csv", sweep_summary_to_csv(sweep));
  write_text(dir / "sweep.svg", sweep_svg(sweep));
  write_provenance(dir, dataset_sha256(ds), exec.resolved_threads(), a.seed);
  return 0;
}

struct SimulateArgs {
  std::string spec;
  bool figure1 = false;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string name;
  bool score = false;
  std::optional<double> thres;
  std::size_t targets = 1000;
  unsigned threads = 0;
};

int run_simulate(const SimulateArgs& a) {
  if (a.figure1 == !a.spec.empty()) throw InputError("simulate needs exactly one of --spec or --figure1");
  const fs::path dir(a.out);
  ensure_dir(dir);

  std::optional<HyperspectralCube> cube;
  std::vector<std::size_t> truth;
  nlohmann::ordered_json truth_json;
  std::string name = a.name;
  if (a.figure1) {
    const std::uint64_t seed = a.seed.value_or(kDefaultSeed);
    Figure1Scene scene = gen_figure1_cube(seed);
    truth = {2};
    truth_json["kind"] = "figure1";
    truth_json["seed"] = seed;
    truth_json["bad_bands"] = truth;
    truth_json["target_pixels"] = scene.targets;
    cube.emplace(std::move(scene.cube));
    if (name.empty()) name = "figure1";
  } else {
    std::ifstream in(a.spec);
    if (!in) throw InputError("cannot open spec '" + a.spec + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InputError("spec '" + a.spec + "' is not valid JSON: " + e.what());
    }
    SyntheticSpec spec = parse_synthetic_spec(j);
    if (a.seed) spec.seed = *a.seed;
    SyntheticCube synth = gen_injected_cube(spec);
    truth = synth.truth;
    truth_json["kind"] = "injected_faults";
    truth_json["note"] = "fault parameters are benchmark settings, not measured sensor properties";
    truth_json["spec"] = to_json(spec);
    truth_json["bad_bands"] = truth;
    truth_json["ranges"] = format_ranges(truth);
    cube.emplace(std::move(synth.cube));
    if (name.empty()) name = "synthetic";
  }

  const fs::path header = write_envi(dir / name, *cube);
  write_text(dir / "truth.json", truth_json.dump(2) + "\n");

  std::string sha;
  {
    const EnviDataset ds = read_envi(header);
    sha = dataset_sha256(ds);
  }
  write_provenance(dir, sha, ExecutionOptions{a.threads}.resolved_threads(), a.seed);

  if (a.score) {
    DetectOptions opt;
    opt.targets = a.targets;
    opt.seed = a.seed.value_or(kDefaultSeed);
    opt.exec.threads = a.threads;
    nlohmann::ordered_json score_json;
    if (a.thres) {
      opt.threshold = *a.thres;
      score_json["threshold_source"] = "user";
    } else {
      opt.threshold = 0.0;
      const BadBandReport probe = detect_bad_bands(*cube, opt);
      opt.threshold = gap_threshold(probe.mav.values);
      score_json["threshold_source"] = "gap-heuristic";
    }
    const BadBandReport report = detect_bad_bands(*cube, opt);
    const DetectionScore score = score_detection(report, truth);
    score_json["threshold"] = opt.threshold;
    score_json.update(score_to_json(score));
    score_json["selected_bands"] = report.selected_bands;
    score_json["truth"] = truth;
    write_text(dir / "score.json", score_json.dump(2) + "\n");
    RunProvenance run{sha, opt.seed, opt.targets, opt.convention};
    write_text(dir / "report.json", report_to_json(report, run).dump(2) + "\n");
    std::cout << "precision " << score.precision << " recall " << score.recall << '\n';
  }
  std::cout << "wrote " << header.string() << '\n';
  return 0;
}

struct InspectArgs {
  std::string input;
  std::string bands;
  std::string out = ".";
};

int run_inspect(const InspectArgs& a) {
  const EnviDataset ds = read_envi(a.input);
  const std::vector<std::size_t> bands = parse_index_list(a.bands, "band list");
  for (std::size_t b : bands)
    if (b < 1 || b > ds.cube.bands())
      throw InputError("band " + std::to_string(b) + " out of range [1, " + std::to_string(ds.cube.bands()) + "]");
  const fs::path dir(a.out);
  ensure_dir(dir);
  for (std::size_t b : bands)
    write_text(dir / ("band_" + std::to_string(b) + ".pgm"),
               band_to_pgm(ds.cube.band(b - 1), ds.cube.lines(), ds.cube.samples()));
  write_provenance(dir, dataset_sha256(ds), 1, std::nullopt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int k = 0; k < argc; ++k) {
    if (k) command_line += ' ';
    command_line += argv[k];
  }

  CLI::App app{"Matched-filter bad band detection for hyperspectral cubes"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Find bad bands in an ENVI cube");
  detect->add_option("--input", det.input, "ENVI header (.hdr) or payload path")->required();
  detect->add_option("--thres", det.thres, "MAV threshold; bands with MAV <= thres are bad")->required();
  detect->add_option("--targets", det.targets, "Number of sampled target pixels M")->capture_default_str();
  detect->add_option("--seed", det.seed, "Sampling seed")->capture_default_str();
  detect->add_option("--noise-seed", det.noise_seed, "Seed for constant-band noise (default: --seed)");
  detect->add_option("--convention", det.convention, "norm-weighted | paper-literal")->capture_default_str();
  detect->add_option("--formats", det.formats, "Comma list of json,csv,svg")->capture_default_str();
  detect->add_option("--out", det.out, "Output directory")->capture_default_str();
  detect->add_option("--threads", det.threads, "Worker threads (0 = all cores)")->capture_default_str();
  detect->add_flag("--log-y", det.log_y, "Log-scale y axis in mav.svg");

  SensitivityArgs sen;
  auto* sensitivity = app.add_subcommand("sensitivity", "Selected-band count as a function of M");
  sensitivity->add_option("--input", sen.input, "ENVI header (.hdr) or payload path")->required();
  sensitivity->add_option("--thres-list", sen.thres_list, "Comma list of thresholds")->required();
  sensitivity->add_option("--grid", sen.grid, "'default' or a list like 1-10,20-100:10")->capture_default_str();
  sensitivity->add_option("--repeats", sen.repeats, "Runs per (M, thres)")->capture_default_str();
  sensitivity->add_option("--seed", sen.seed, "Base seed")->capture_default_str();
  sensitivity->add_option("--convention", sen.convention, "norm-weighted | paper-literal")->capture_default_str();
  sensitivity->add_option("--out", sen.out, "Output directory")->capture_default_str();
  sensitivity->add_option("--threads", sen.threads, "Worker threads (0 = all cores)")->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic cube with known bad bands");
  auto* spec_opt = simulate->add_option("--spec", sim.spec, "SyntheticSpec JSON file");
  auto* fig_opt = simulate->add_flag("--figure1", sim.figure1, "51x51x3 cube with a 3x3 target in bands 1 and 3");
  spec_opt->excludes(fig_opt);
  simulate->add_option("--seed", sim.seed, "Override the generator seed");
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
  simulate->add_option("--name", sim.name, "Base name of the cube files");
  simulate->add_flag("--score", sim.score, "Run detection and write score.json");
  simulate->add_option("--thres", sim.thres, "Threshold for --score (default: largest-gap heuristic)");
  simulate->add_option("--targets", sim.targets, "Targets for --score")->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();

  InspectArgs ins;
  auto* inspect = app.add_subcommand("inspect", "Dump bands as greyscale PGM images");
  inspect->add_option("--input", ins.input, "ENVI header (.hdr) or payload path")->required();
  inspect->add_option("--bands", ins.bands, "1-based bands, e.g. 1,5,10-12")->required();
  inspect->add_option("--out", ins.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*detect) return run_detect(det);
    if (*sensitivity) return run_sensitivity(sen);
    if (*simulate) return run_simulate(sim);
    if (*inspect) return run_inspect(ins);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
