#include "ghzbell/records.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"

#include "ghzbell/errors.hpp"

namespace ghzbell {

namespace {

std::string format_double(double value, std::chars_format fmt, int precision) {
  if (!std::isfinite(value)) {
    throw usage_error("record fields must be finite");
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, fmt, precision);
  return std::string(buf, res.ptr);
}

std::string join(std::initializer_list<std::string> fields) {
  std::string row;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) row += ',';
    row += f;
    first = false;
  }
  return row;
}

std::string i64(long long v) { return std::to_string(v); }
std::string u64(std::uint64_t v) { return std::to_string(v); }

}  // namespace

std::string format_fixed(double value, int precision) {
  return format_double(value, std::chars_format::fixed, precision);
}

std::string format_scientific(double value, int precision) {
  return format_double(value, std::chars_format::scientific, precision);
}

// --- estimate records --------------------------------------------------------

std::string estimate_csv_header() {
  return "n_parties,sampler,inequality,noise,nu,n_samples,n_violations,"
         "n_indeterminate,p_hat,std_err,seed,wall_seconds";
}

std::string estimate_csv_row(const EstimateRecord& rec) {
  return join({i64(rec.n_parties), rec.sampler.variant_name(),
               to_string(rec.inequality), to_string(rec.noise.kind),
               format_fixed(rec.noise.nu, 6), i64(rec.n_samples),
               i64(rec.n_violations), i64(rec.n_indeterminate),
               format_fixed(rec.p_hat, 6), format_fixed(rec.std_err, 6),
               u64(rec.seed), format_fixed(rec.wall_seconds, 3)});
}

void write_estimate_csv(std::ostream& out, const std::vector<EstimateRecord>& recs) {
  out << estimate_csv_header() << '\n';
  for (const auto& rec : recs) out << estimate_csv_row(rec) << '\n';
}

// --- noise sweeps --------------------------------------------------------------

std::string noise_sweep_csv_header() {
  return estimate_csv_header() + ",predicted";
}

std::string noise_sweep_csv_row(const EstimateRecord& rec, double predicted) {
  std::string row = estimate_csv_row(rec);
  row += ',';
  if (predicted >= 0.0) row += format_fixed(predicted, 6);
  return row;
}

// --- threshold curves -----------------------------------------------------------

std::string threshold_csv_header() {
  return "n_parties,epsilon,p_hat,std_err,predicted,n_samples,seed";
}

std::string threshold_csv_row(int n_parties, const ThresholdCurvePoint& point,
                              long n_samples, std::uint64_t seed) {
  return join({i64(n_parties), format_fixed(point.epsilon, 6),
               format_fixed(point.p_hat, 6), format_fixed(point.std_err, 6),
               format_fixed(point.predicted, 6), i64(n_samples), u64(seed)});
}

// --- area records ----------------------------------------------------------------

std::string area_csv_header() {
  return "n_parties,inequality,alpha_nodes,lambda_nodes,samples_per_node,"
         "n_indeterminate,a0_hat,a1_hat,seed,wall_seconds";
}

std::string area_csv_row(const AreaRecord& rec) {
  return join({i64(rec.n_parties), to_string(rec.inequality),
               i64(rec.alpha_nodes), i64(rec.lambda_nodes),
               i64(rec.samples_per_node), i64(rec.n_indeterminate),
               format_fixed(rec.a0_hat, 6), format_fixed(rec.a1_hat, 6),
               u64(rec.seed), format_fixed(rec.wall_seconds, 3)});
}

std::string area_node_csv_header() {
  return "node,alpha,lambda,weight,p_hat,indeterminate";
}

void write_area_node_csv(std::ostream& out, const AreaRecord& rec) {
  out << area_node_csv_header() << '\n';
  for (std::size_t node = 0; node < rec.node_p_hat.size(); ++node) {
    out << join({i64(static_cast<long long>(node)),
                 format_fixed(rec.node_alpha[node], 9),
                 format_fixed(rec.node_lambda[node], 9),
                 format_scientific(rec.node_weight[node], 9),
                 format_fixed(rec.node_p_hat[node], 6),
                 i64(rec.node_indeterminate[node])})
        << '\n';
  }
}

// --- perturbed sweeps --------------------------------------------------------------

std::string perturbed_csv_header() {
  return "n_parties,lambda_std,p_s1s2,stderr_s1s2,p_mabk,stderr_mabk,delta,"
         "n_samples,seed,wall_seconds";
}

std::string perturbed_csv_row(const PerturbedPoint& point) {
  return join({i64(point.s1s2.n_parties), format_fixed(point.lambda_std, 9),
               format_fixed(point.s1s2.p_hat, 6), format_fixed(point.s1s2.std_err, 6),
               format_fixed(point.mabk.p_hat, 6), format_fixed(point.mabk.std_err, 6),
               format_fixed(point.delta, 6), i64(point.s1s2.n_samples),
               u64(point.s1s2.seed), format_fixed(point.s1s2.wall_seconds, 3)});
}

// --- shared-plane property reports ----------------------------------------------------

std::string theorem1_csv_header() {
  return "n_parties,n_samples,n_failures,worst_floor_margin,"
         "worst_closed_form_error,min_ratio,seed";
}

std::string theorem1_csv_row(const Theorem1Report& report) {
  return join({i64(report.n_parties), i64(report.n_samples),
               i64(report.n_failures),
               format_scientific(report.worst_floor_margin, 12),
               format_scientific(report.worst_closed_form_error, 12),
               format_scientific(report.min_ratio, 12), u64(report.seed)});
}

// --- run manifest -----------------------------------------------------------------------

std::string config_hash_hex(const std::string& canonical_config) {
  std::uint64_t hash = 0xCBF29CE484222325ull;
  for (const unsigned char c : canonical_config) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  char buf[17];
  static const char digits[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

std::string manifest_json(const RunManifest& manifest) {
  nlohmann::json doc;
  doc["seed"] = manifest.seed;
  doc["build"] = manifest.build;
  doc["config_hash"] = manifest.config_hash;
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [key, value] : manifest.config) config[key] = value;
  doc["config"] = std::move(config);
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& output : manifest.outputs) {
    outputs.push_back({{"path", output.path}, {"rows", output.rows}});
  }
  doc["records"] = std::move(outputs);
  return doc.dump(2);
}

void write_manifest(std::ostream& out, const RunManifest& manifest) {
  out << manifest_json(manifest) << '\n';
}

}  // namespace ghzbell
