// ghzbell: command-line front end for the GHZ Bell-violation experiments.
//
// Every subcommand drives one experiment, writes plot-ready CSV (or JSON
// with --format json), and records the run in <stem>.manifest.json plus a
// <stem>.config key=value file whose keys equal the long flag names, so
//
//   ghzbell <subcommand> --config <stem>.config
//
// reproduces the run exactly.  Outputs land in --out-dir, which defaults to
// the GHZBELL_OUT_DIR environment variable and then to the working
// directory.  Exit status is 0 only when the run's checks pass and the
// number of indeterminate membership verdicts stays within
// --max-indeterminate.  All angles are radians.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ghzbell/correlations.hpp"
#include "ghzbell/errors.hpp"
#include "ghzbell/experiments.hpp"
#include "ghzbell/inequalities.hpp"
#include "ghzbell/measurement.hpp"
#include "ghzbell/polytope.hpp"
#include "ghzbell/records.hpp"
#include "ghzbell/sampling.hpp"
#include "ghzbell/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ghzbell;

// Every flag any subcommand accepts; each subcommand registers the subset
// it uses, under these exact names, so one config file maps one-to-one to
// one run.
struct RunConfig {
  int n = 3;
  std::string sampler = "rim";
  double alpha = 0.0;
  double lambda = 0.0;
  double lambda_std = 0.0;
  std::string noise = "none";
  double nu = 0.0;
  std::string cls = "mabk";
  long samples = 10000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = all available cores
  long max_indeterminate = 0;
  std::string out;      // output stem; defaults to the subcommand name
  std::string out_dir;  // empty = GHZBELL_OUT_DIR or "."
  std::string format = "csv";
  // table subcommands
  int n_min = 2;
  int n_max = 6;
  std::string samplers = "rim,rom";
  std::string classes = "s1s2,mabk,wwzb,complete";
  int alpha_nodes = 64;
  int lambda_nodes = 64;
  long samples_per_node = 10000;
  bool node_detail = false;
  // sweep subcommands
  std::string nu_grid = "0,0.02,0.04,0.06,0.08,0.1";
  std::string lambda_stds = "0,0.2,0.4,0.6,0.9,1.2,1.57";
};

// --config is applied before regular parsing: the file's key=value lines
// become --key=value tokens spliced in right after the subcommand name.
// Explicit command-line flags come later in the argument list and win
// because every option takes the last value it sees.  (The config option
// attached to a subcommand is otherwise processed only for the root
// command.)
std::vector<std::string> expand_config_args(
    int argc, char** argv, const std::vector<std::string>& subcommands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (std::find(subcommands.begin(), subcommands.end(), args[i]) !=
        subcommands.end()) {
      sub_pos = i;
      break;
    }
  }
  if (sub_pos == args.size()) return args;

  std::string config_path;
  for (std::size_t i = sub_pos + 1; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw resource_error("cannot read config file " + config_path);
  std::vector<std::string> expanded;
  std::string line;
  while (std::getline(in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    if (line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw usage_error("config line without '=': " + line);
    }
    std::string key = line.substr(0, eq);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(eq + 1);
    const auto vbegin = value.find_first_not_of(" \t");
    value = vbegin == std::string::npos ? std::string() : value.substr(vbegin);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    expanded.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1),
              expanded.begin(), expanded.end());
  return args;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "'" + item + "' is not a number");
    }
  }
  if (values.empty()) throw CLI::ValidationError(flag, "empty list");
  return values;
}

InequalityClass parse_class(const std::string& name) {
  if (name == "s1") return InequalityClass::kS1;
  if (name == "s1s2") return InequalityClass::kS1S2;
  if (name == "chsh4") return InequalityClass::kChsh4;
  if (name == "mabk") return InequalityClass::kMabk;
  if (name == "wwzb") return InequalityClass::kWwzb;
  if (name == "complete") return InequalityClass::kCompleteSet;
  throw CLI::ValidationError(
      "--class", "'" + name + "' is not one of s1, s1s2, chsh4, mabk, wwzb, complete");
}

NoiseSpec make_noise(const RunConfig& rc) {
  if (rc.noise == "none") {
    if (rc.nu != 0.0) {
      throw CLI::ValidationError("--nu", "nonzero nu needs --noise depolarizing|dephasing");
    }
    return NoiseSpec::none();
  }
  if (rc.noise == "depolarizing") return NoiseSpec::depolarizing(rc.nu);
  if (rc.noise == "dephasing") return NoiseSpec::dephasing(rc.nu);
  throw CLI::ValidationError(
      "--noise", "'" + rc.noise + "' is not one of none, depolarizing, dephasing");
}

SamplerSpec make_sampler(const RunConfig& rc) {
  if (rc.sampler != "prom-rotated" && (rc.alpha != 0.0 || rc.lambda != 0.0)) {
    throw CLI::ValidationError("--alpha/--lambda",
                               "only meaningful with --sampler prom-rotated");
  }
  if (rc.sampler != "prom-perturbed" && rc.lambda_std != 0.0) {
    throw CLI::ValidationError("--lambda-std",
                               "only meaningful with --sampler prom-perturbed");
  }
  if (rc.sampler == "rim") return SamplerSpec::rim(rc.n, rc.seed);
  if (rc.sampler == "rom") return SamplerSpec::rom(rc.n, rc.seed);
  if (rc.sampler == "prom-xy") return SamplerSpec::prom_xy(rc.n, rc.seed);
  if (rc.sampler == "prom-rotated") {
    return SamplerSpec::prom_rotated(rc.n, rc.seed, rc.alpha, rc.lambda);
  }
  if (rc.sampler == "prom-perturbed") {
    return SamplerSpec::prom_perturbed(rc.n, rc.seed, rc.lambda_std);
  }
  throw CLI::ValidationError(
      "--sampler",
      "'" + rc.sampler + "' is not one of rim, rom, prom-xy, prom-rotated, prom-perturbed");
}

// The LP-membership class needs the polytope solver, capped by default at 6
// parties; the CHSH forms are defined for exactly two.
void check_class_supported(InequalityClass cls, int n) {
  PolytopeOptions defaults;
  if (cls == InequalityClass::kCompleteSet && n > defaults.max_parties) {
    throw CLI::ValidationError(
        "--class", "complete-set membership supports at most " +
                       std::to_string(defaults.max_parties) + " parties (got n=" +
                       std::to_string(n) + ")");
  }
  if (cls == InequalityClass::kChsh4 && n != 2) {
    throw CLI::ValidationError("--class", "chsh4 is defined for n=2 only");
  }
}

// --- output plumbing ---------------------------------------------------------

// Collects the files one run writes, then emits the manifest and the
// reproduction config.
class RunWriter {
 public:
  RunWriter(const RunConfig& rc, const CLI::App* sub) : format_(rc.format) {
    if (format_ != "csv" && format_ != "json") {
      throw CLI::ValidationError("--format", "'" + format_ + "' is not csv or json");
    }
    std::string dir = rc.out_dir;
    if (dir.empty()) {
      const char* env = std::getenv("GHZBELL_OUT_DIR");
      dir = (env && *env) ? env : ".";
    }
    dir_ = dir;
    fs::create_directories(dir_);
    stem_ = rc.out.empty() ? sub->get_name() : rc.out;
    manifest_.seed = rc.seed;
    manifest_.build = build_version();
    canonical_config_ = sub->config_to_str(true, false);
    manifest_.config_hash = config_hash_hex(canonical_config_);
    for (const std::string& line : split_lines(canonical_config_)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos || line.empty() || line.front() == '[') continue;
      manifest_.config.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
  }

  const std::string& format() const { return format_; }

  fs::path data_path(const std::string& suffix = "") const {
    return dir_ / (stem_ + suffix + "." + format_);
  }

  // Writes one data file and records it in the manifest.
  void write_data(const std::string& suffix, long rows,
                  const std::function<void(std::ostream&)>& csv_body,
                  const nlohmann::json& json_body) {
    const fs::path path = data_path(suffix);
    std::ofstream out(path);
    if (!out) throw resource_error("cannot open " + path.string() + " for writing");
    if (format_ == "csv") {
      csv_body(out);
    } else {
      out << json_body.dump(2) << '\n';
    }
    if (!out.good()) throw resource_error("failed writing " + path.string());
    manifest_.outputs.push_back({path.string(), rows});
  }

  // Run bookkeeping: the manifest and the key=value reproduction config.
  void finalize() {
    const fs::path config_path = dir_ / (stem_ + ".config");
    std::ofstream config_out(config_path);
    if (!config_out) {
      throw resource_error("cannot open " + config_path.string() + " for writing");
    }
    config_out << canonical_config_;

    const fs::path manifest_path = dir_ / (stem_ + ".manifest.json");
    std::ofstream manifest_out(manifest_path);
    if (!manifest_out) {
      throw resource_error("cannot open " + manifest_path.string() + " for writing");
    }
    write_manifest(manifest_out, manifest_);
    std::cout << "wrote " << manifest_path.string() << '\n';
  }

 private:
  static std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
      if (!line.empty()) lines.push_back(line);
    }
    return lines;
  }

  std::string format_;
  fs::path dir_;
  std::string stem_;
  std::string canonical_config_;
  RunManifest manifest_;
};

// JSON mirrors of the CSV rows, same field names as the CSV headers.
nlohmann::json estimate_json(const EstimateRecord& rec) {
  return {{"n_parties", rec.n_parties},
          {"sampler", rec.sampler.variant_name()},
          {"inequality", to_string(rec.inequality)},
          {"noise", to_string(rec.noise.kind)},
          {"nu", rec.noise.nu},
          {"n_samples", rec.n_samples},
          {"n_violations", rec.n_violations},
          {"n_indeterminate", rec.n_indeterminate},
          {"p_hat", rec.p_hat},
          {"std_err", rec.std_err},
          {"seed", rec.seed},
          {"wall_seconds", rec.wall_seconds}};
}

nlohmann::json area_json(const AreaRecord& rec) {
  return {{"n_parties", rec.n_parties},
          {"inequality", to_string(rec.inequality)},
          {"alpha_nodes", rec.alpha_nodes},
          {"lambda_nodes", rec.lambda_nodes},
          {"samples_per_node", rec.samples_per_node},
          {"n_indeterminate", rec.n_indeterminate},
          {"a0_hat", rec.a0_hat},
          {"a1_hat", rec.a1_hat},
          {"seed", rec.seed},
          {"wall_seconds", rec.wall_seconds}};
}

nlohmann::json area_nodes_json(const AreaRecord& rec) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t node = 0; node < rec.node_p_hat.size(); ++node) {
    nodes.push_back({{"node", node},
                     {"alpha", rec.node_alpha[node]},
                     {"lambda", rec.node_lambda[node]},
                     {"weight", rec.node_weight[node]},
                     {"p_hat", rec.node_p_hat[node]},
                     {"indeterminate", rec.node_indeterminate[node]}});
  }
  return nodes;
}

nlohmann::json perturbed_json(const PerturbedPoint& pt) {
  return {{"n_parties", pt.s1s2.n_parties},
          {"lambda_std", pt.lambda_std},
          {"p_s1s2", pt.s1s2.p_hat},
          {"stderr_s1s2", pt.s1s2.std_err},
          {"p_mabk", pt.mabk.p_hat},
          {"stderr_mabk", pt.mabk.std_err},
          {"delta", pt.delta},
          {"n_samples", pt.s1s2.n_samples},
          {"seed", pt.s1s2.seed},
          {"wall_seconds", pt.s1s2.wall_seconds}};
}

nlohmann::json theorem1_json(const Theorem1Report& report) {
  return {{"n_parties", report.n_parties},
          {"n_samples", report.n_samples},
          {"n_failures", report.n_failures},
          {"worst_floor_margin", report.worst_floor_margin},
          {"worst_closed_form_error", report.worst_closed_form_error},
          {"min_ratio", report.min_ratio},
          {"seed", report.seed}};
}

// Indeterminate-count gate shared by the estimator subcommands.
int indeterminate_gate(long n_indeterminate, long max_indeterminate) {
  if (n_indeterminate > max_indeterminate) {
    std::cerr << "error: " << n_indeterminate
              << " indeterminate membership verdicts exceed --max-indeterminate "
              << max_indeterminate << '\n';
    return 1;
  }
  return 0;
}

// --- subcommands ---------------------------------------------------------------

int run_prob(const RunConfig& rc, const CLI::App* sub) {
  const InequalityClass cls = parse_class(rc.cls);
  check_class_supported(cls, rc.n);
  const SamplerSpec sampler = make_sampler(rc);
  const NoiseSpec noise = make_noise(rc);
  EstimateOptions options;
  options.workers = rc.workers;

  const EstimateRecord rec = estimate_p(sampler, noise, cls, rc.samples, options);

  RunWriter writer(rc, sub);
  writer.write_data(
      "", 1, [&](std::ostream& out) { write_estimate_csv(out, {rec}); },
      nlohmann::json::array({estimate_json(rec)}));
  writer.finalize();
  std::cout << "p_hat " << format_fixed(rec.p_hat, 6) << " +- "
            << format_fixed(rec.std_err, 6) << "  (" << rec.n_violations << "/"
            << rec.n_samples << " violations, " << rec.n_indeterminate
            << " indeterminate)\n";
  return indeterminate_gate(rec.n_indeterminate, rc.max_indeterminate);
}

int run_table1(const RunConfig& rc, const CLI::App* sub) {
  if (rc.n_min < 2 || rc.n_min > rc.n_max) {
    throw CLI::ValidationError("--n-min/--n-max", "need 2 <= n-min <= n-max");
  }
  std::vector<InequalityClass> classes;
  for (const std::string& name : split_list(rc.classes)) {
    classes.push_back(parse_class(name));
  }
  if (classes.empty()) throw CLI::ValidationError("--classes", "empty class list");
  for (InequalityClass cls : classes) check_class_supported(cls, rc.n_max);
  std::vector<std::string> sampler_names = split_list(rc.samplers);
  if (sampler_names.empty()) throw CLI::ValidationError("--samplers", "empty list");

  EstimateOptions options;
  options.workers = rc.workers;
  std::vector<EstimateRecord> rows;
  const NoiseSpec noise = make_noise(rc);
  for (const std::string& name : sampler_names) {
    for (int n = rc.n_min; n <= rc.n_max; ++n) {
      RunConfig point = rc;
      point.n = n;
      point.sampler = name;
      const SamplerSpec sampler = make_sampler(point);
      for (InequalityClass cls : classes) {
        rows.push_back(estimate_p(sampler, noise, cls, rc.samples, options));
      }
    }
  }

  RunWriter writer(rc, sub);
  nlohmann::json json_rows = nlohmann::json::array();
  for (const auto& rec : rows) json_rows.push_back(estimate_json(rec));
  writer.write_data(
      "", static_cast<long>(rows.size()),
      [&](std::ostream& out) { write_estimate_csv(out, rows); }, json_rows);
  writer.finalize();

  long indeterminate = 0;
  for (const auto& rec : rows) indeterminate += rec.n_indeterminate;
  std::cout << rows.size() << " estimates written\n";
  return indeterminate_gate(indeterminate, rc.max_indeterminate);
}

int run_table2(const RunConfig& rc, const CLI::App* sub) {
  if (rc.n_min < 2 || rc.n_min > rc.n_max) {
    throw CLI::ValidationError("--n-min/--n-max", "need 2 <= n-min <= n-max");
  }
  std::vector<InequalityClass> classes;
  for (const std::string& name : split_list(rc.classes)) {
    classes.push_back(parse_class(name));
  }
  if (classes.empty()) throw CLI::ValidationError("--classes", "empty class list");
  for (InequalityClass cls : classes) check_class_supported(cls, rc.n_max);

  EstimateOptions options;
  options.workers = rc.workers;
  AreaGrid grid;
  grid.alpha_nodes = rc.alpha_nodes;
  grid.lambda_nodes = rc.lambda_nodes;

  RunWriter writer(rc, sub);
  std::vector<AreaRecord> rows;
  for (InequalityClass cls : classes) {
    for (int n = rc.n_min; n <= rc.n_max; ++n) {
      AreaRecord rec =
          area_fractions(n, cls, grid, rc.samples_per_node, rc.seed, options);
      if (rc.node_detail) {
        const std::string suffix =
            std::string("-nodes-") + to_string(cls) + "-n" + std::to_string(n);
        writer.write_data(
            suffix, static_cast<long>(rec.node_p_hat.size()),
            [&](std::ostream& out) { write_area_node_csv(out, rec); },
            area_nodes_json(rec));
      }
      rows.push_back(std::move(rec));
    }
  }

  nlohmann::json json_rows = nlohmann::json::array();
  for (const auto& rec : rows) json_rows.push_back(area_json(rec));
  writer.write_data(
      "", static_cast<long>(rows.size()),
      [&](std::ostream& out) {
        out << area_csv_header() << '\n';
        for (const auto& rec : rows) out << area_csv_row(rec) << '\n';
      },
      json_rows);
  writer.finalize();

  long indeterminate = 0;
  for (const auto& rec : rows) indeterminate += rec.n_indeterminate;
  std::cout << rows.size() << " area records written\n";
  return indeterminate_gate(indeterminate, rc.max_indeterminate);
}

int run_noise_sweep(const RunConfig& rc, const CLI::App* sub) {
  const InequalityClass cls = parse_class(rc.cls);
  check_class_supported(cls, rc.n);
  const SamplerSpec sampler = make_sampler(rc);
  const std::vector<double> grid = parse_double_list(rc.nu_grid, "--nu-grid");
  EstimateOptions options;
  options.workers = rc.workers;

  const std::vector<EstimateRecord> rows =
      noise_sweep(sampler, cls, grid, rc.samples, options);

  // The closed form covers the shared-plane pair under depolarizing noise
  // (any kind is equivalent at nu = 0).
  const auto predicted = [&](const EstimateRecord& rec) {
    const bool covered = cls == InequalityClass::kS1S2 && rc.sampler == "prom-xy" &&
                         (rec.noise.kind == NoiseKind::kDepolarizing ||
                          rec.noise.nu == 0.0);
    return covered ? noisy_prom_probability(rc.n, rec.noise.nu) : -1.0;
  };

  RunWriter writer(rc, sub);
  nlohmann::json json_rows = nlohmann::json::array();
  for (const auto& rec : rows) {
    nlohmann::json row = estimate_json(rec);
    const double p = predicted(rec);
    if (p >= 0.0) row["predicted"] = p;
    json_rows.push_back(std::move(row));
  }
  writer.write_data(
      "", static_cast<long>(rows.size()),
      [&](std::ostream& out) {
        out << noise_sweep_csv_header() << '\n';
        for (const auto& rec : rows) {
          out << noise_sweep_csv_row(rec, predicted(rec)) << '\n';
        }
      },
      json_rows);
  writer.finalize();

  long indeterminate = 0;
  for (const auto& rec : rows) indeterminate += rec.n_indeterminate;
  std::cout << rows.size() << " sweep points written\n";
  return indeterminate_gate(indeterminate, rc.max_indeterminate);
}

int run_perturbed(const RunConfig& rc, const CLI::App* sub) {
  const std::vector<double> stds = parse_double_list(rc.lambda_stds, "--lambda-stds");
  EstimateOptions options;
  options.workers = rc.workers;

  const std::vector<PerturbedPoint> points =
      perturbed_sweep(rc.n, stds, rc.samples, rc.seed, options);

  RunWriter writer(rc, sub);
  nlohmann::json json_rows = nlohmann::json::array();
  for (const auto& pt : points) json_rows.push_back(perturbed_json(pt));
  writer.write_data(
      "", static_cast<long>(points.size()),
      [&](std::ostream& out) {
        out << perturbed_csv_header() << '\n';
        for (const auto& pt : points) out << perturbed_csv_row(pt) << '\n';
      },
      json_rows);
  writer.finalize();
  std::cout << points.size() << " sweep points written\n";
  return 0;
}

int run_theorem1(const RunConfig& rc, const CLI::App* sub) {
  const Theorem1Report report = theorem1_check(rc.n, rc.samples, rc.seed);

  RunWriter writer(rc, sub);
  writer.write_data(
      "", 1,
      [&](std::ostream& out) {
        out << theorem1_csv_header() << '\n' << theorem1_csv_row(report) << '\n';
      },
      nlohmann::json::array({theorem1_json(report)}));
  writer.finalize();
  std::cout << "theorem1: " << report.n_failures << " failures in "
            << report.n_samples << " samples (worst closed-form error "
            << format_scientific(report.worst_closed_form_error, 3) << ")\n";
  return report.n_failures == 0 ? 0 : 1;
}

// Cross-validates the membership solver against the closed forms:
// for n = 2 the four CHSH combinations decide membership exactly, so the
// verdicts must agree sample by sample; for larger n a full-correlation
// violation must always coincide with a nonlocal verdict.
int run_lp_check(const RunConfig& rc, const CLI::App* sub) {
  check_class_supported(InequalityClass::kCompleteSet, rc.n);
  const SamplerSpec sampler = make_sampler(rc);
  const NoiseSpec noise = make_noise(rc);

  LocalPolytopeChecker checker(rc.n, PolytopeOptions{});
  long agree = 0;
  long contradictions = 0;
  long indeterminate = 0;
  for (long i = 0; i < rc.samples; ++i) {
    const MeasurementConfig config =
        sample_config(sampler, static_cast<std::uint64_t>(i));
    const CorrelationTable table = build_correlation_table(
        config, noise, CorrelationTable::Scope::kWithRestricted);
    const PolytopeVerdict verdict = checker.check(table);
    if (verdict.outcome == PolytopeOutcome::kIndeterminate) {
      ++indeterminate;
      continue;
    }
    const bool nonlocal = verdict.outcome == PolytopeOutcome::kNonlocal;
    bool consistent = true;
    if (rc.n == 2) {
      consistent = evaluate_chsh4(table).violated == nonlocal;
    } else if (evaluate_wwzb(table).violated && !nonlocal) {
      consistent = false;
    }
    if (consistent) {
      ++agree;
    } else {
      ++contradictions;
    }
  }

  RunWriter writer(rc, sub);
  writer.write_data(
      "", 1,
      [&](std::ostream& out) {
        out << "n_parties,sampler,noise,nu,n_samples,n_agree,n_contradictions,"
               "n_indeterminate,seed\n"
            << rc.n << ',' << sampler.variant_name() << ',' << to_string(noise.kind)
            << ',' << format_fixed(noise.nu, 6) << ',' << rc.samples << ',' << agree
            << ',' << contradictions << ',' << indeterminate << ',' << rc.seed
            << '\n';
      },
      nlohmann::json::array({{{"n_parties", rc.n},
                              {"sampler", sampler.variant_name()},
                              {"noise", to_string(noise.kind)},
                              {"nu", noise.nu},
                              {"n_samples", rc.samples},
                              {"n_agree", agree},
                              {"n_contradictions", contradictions},
                              {"n_indeterminate", indeterminate},
                              {"seed", rc.seed}}}));
  writer.finalize();
  std::cout << "agreement " << (rc.n == 2 ? "CHSH" : "WWZB") << " vs LP: " << agree
            << "/" << rc.samples << " (" << contradictions << " contradictions, "
            << indeterminate << " indeterminate)\n";
  if (contradictions > 0) return 1;
  return indeterminate_gate(indeterminate, rc.max_indeterminate);
}

// --- flag registration -----------------------------------------------------------

void add_output_flags(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--out", rc.out, "Output file stem (default: subcommand name)");
  sub->add_option("--out-dir", rc.out_dir,
                  "Output directory (default: $GHZBELL_OUT_DIR, then '.')");
  sub->add_option("--format", rc.format, "Data file format: csv or json")
      ->capture_default_str();
  sub->add_option("--workers", rc.workers,
                  "Worker threads; 0 uses all cores (results never depend on this)")
      ->capture_default_str();
  sub->add_option("--config",
                  "Read flags from a key=value file; explicit flags override it")
      ->configurable(false);
}

void add_seed_samples(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--samples", rc.samples, "Monte Carlo sample count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", rc.seed, "Base RNG seed")->capture_default_str();
}

void add_sampler_flags(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--sampler", rc.sampler,
                  "Measurement ensemble: rim, rom, prom-xy, prom-rotated, "
                  "prom-perturbed")
      ->capture_default_str();
  sub->add_option("--alpha", rc.alpha,
                  "Reference-direction azimuth in radians (prom-rotated)")
      ->capture_default_str();
  sub->add_option("--lambda", rc.lambda,
                  "Reference-direction polar angle in radians (prom-rotated)")
      ->capture_default_str();
  sub->add_option("--lambda-std", rc.lambda_std,
                  "Polar spread of perturbed reference directions in radians "
                  "(prom-perturbed)")
      ->capture_default_str();
}

void add_noise_flags(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--noise", rc.noise, "Noise kind: none, depolarizing, dephasing")
      ->capture_default_str();
  sub->add_option("--nu", rc.nu, "Noise strength in [0, 1]")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
}

void add_max_indeterminate(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--max-indeterminate", rc.max_indeterminate,
                  "Largest tolerated number of indeterminate membership verdicts")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments on Bell-inequality violations of noisy "
               "GHZ states under randomly chosen local measurements"};
  app.require_subcommand(1);
  app.set_version_flag("--version", build_version());

  RunConfig rc;
  int exit_code = 0;

  // Repeated flags take the last value; config-file values are spliced in
  // ahead of explicit flags, so explicit flags override the file.
  const auto take_last = [](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return sub;
  };

  CLI::App* prob = take_last(app.add_subcommand(
      "prob", "Estimate the violation probability of one inequality class"));
  prob->add_option("--n", rc.n, "Number of parties")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  prob->add_option("--class", rc.cls,
                   "Inequality class: s1, s1s2, chsh4, mabk, wwzb, complete")
      ->capture_default_str();
  add_sampler_flags(prob, rc);
  add_noise_flags(prob, rc);
  add_seed_samples(prob, rc);
  add_max_indeterminate(prob, rc);
  add_output_flags(prob, rc);
  prob->callback([&] { exit_code = run_prob(rc, prob); });

  CLI::App* table1 = take_last(app.add_subcommand(
      "table1",
      "Violation probabilities per sampler, party count, and inequality class"));
  table1->add_option("--n-min", rc.n_min, "Smallest party count")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  table1->add_option("--n-max", rc.n_max, "Largest party count")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  table1->add_option("--samplers", rc.samplers, "Comma-separated sampler list")
      ->capture_default_str();
  table1->add_option("--classes", rc.classes, "Comma-separated inequality classes")
      ->capture_default_str();
  add_noise_flags(table1, rc);
  add_seed_samples(table1, rc);
  add_max_indeterminate(table1, rc);
  add_output_flags(table1, rc);
  table1->callback([&] { exit_code = run_table1(rc, table1); });

  CLI::App* table2 = take_last(app.add_subcommand(
      "table2",
      "Hemisphere fractions with nonzero / certain violation probability per "
      "shared reference direction (PROM sampling)"));
  table2->add_option("--n-min", rc.n_min, "Smallest party count")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  table2->add_option("--n-max", rc.n_max, "Largest party count")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  table2->add_option("--classes", rc.classes, "Comma-separated inequality classes")
      ->capture_default_str();
  table2->add_option("--alpha-nodes", rc.alpha_nodes, "Azimuth grid nodes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  table2->add_option("--lambda-nodes", rc.lambda_nodes, "Polar grid nodes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  table2->add_option("--samples-per-node", rc.samples_per_node,
                     "Configurations sampled per grid node")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  table2->add_flag("--node-detail", rc.node_detail,
                   "Also write one per-node CSV per (class, n) pair");
  table2->add_option("--seed", rc.seed, "Base RNG seed")->capture_default_str();
  add_max_indeterminate(table2, rc);
  add_output_flags(table2, rc);
  table2->callback([&] { exit_code = run_table2(rc, table2); });

  CLI::App* sweep = take_last(app.add_subcommand(
      "noise-sweep",
      "Violation probability vs noise strength for both noise kinds on one "
      "shared sample stream"));
  sweep->add_option("--n", rc.n, "Number of parties")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  sweep->add_option("--class", rc.cls,
                    "Inequality class: s1, s1s2, chsh4, mabk, wwzb, complete")
      ->capture_default_str();
  sweep->add_option("--nu-grid", rc.nu_grid, "Comma-separated noise strengths")
      ->capture_default_str();
  add_sampler_flags(sweep, rc);
  add_seed_samples(sweep, rc);
  add_max_indeterminate(sweep, rc);
  add_output_flags(sweep, rc);
  sweep->callback([&] { exit_code = run_noise_sweep(rc, sweep); });

  CLI::App* perturbed = take_last(app.add_subcommand(
      "perturbed",
      "Violation probability of the shared-plane pair and the MABK family vs "
      "reference-direction spread"));
  perturbed->add_option("--n", rc.n, "Number of parties")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  perturbed->add_option("--lambda-stds", rc.lambda_stds,
                        "Comma-separated polar spreads in radians")
      ->capture_default_str();
  add_seed_samples(perturbed, rc);
  add_output_flags(perturbed, rc);
  perturbed->callback([&] { exit_code = run_perturbed(rc, perturbed); });

  CLI::App* theorem1 = take_last(app.add_subcommand(
      "theorem1",
      "Check the shared-plane floor bound and closed forms on random draws"));
  theorem1->add_option("--n", rc.n, "Number of parties")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  add_seed_samples(theorem1, rc);
  add_output_flags(theorem1, rc);
  theorem1->callback([&] { exit_code = run_theorem1(rc, theorem1); });

  CLI::App* lp_check = take_last(app.add_subcommand(
      "lp-check",
      "Cross-validate membership verdicts against the closed-form tests"));
  lp_check->add_option("--n", rc.n, "Number of parties")
      ->capture_default_str()
      ->check(CLI::Range(2, 6));
  add_sampler_flags(lp_check, rc);
  add_noise_flags(lp_check, rc);
  add_seed_samples(lp_check, rc);
  add_max_indeterminate(lp_check, rc);
  add_output_flags(lp_check, rc);
  lp_check->callback([&] { exit_code = run_lp_check(rc, lp_check); });

  try {
    std::vector<std::string> args = expand_config_args(
        argc, argv,
        {"prob", "table1", "table2", "noise-sweep", "perturbed", "theorem1",
         "lp-check"});
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ghzbell::usage_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ghzbell::resource_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ghzbell::consistency_error& e) {
    std::cerr << "internal consistency failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}
