#ifndef GHZBELL_RECORDS_HPP
#define GHZBELL_RECORDS_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ghzbell/experiments.hpp"

namespace ghzbell {

// Locale-independent serialization of experiment results: CSV with a fixed
// column order per record type (probabilities as fixed-point with 6 digits,
// inequality-scale values as scientific with 12 digits) and a JSON run
// manifest tying outputs to the seed, build, and configuration that
// produced them.

// Fixed-point / scientific formatting via std::to_chars; never consults the
// global locale.
std::string format_fixed(double value, int precision);
std::string format_scientific(double value, int precision);

// --- estimate records -------------------------------------------------------
// n_parties,sampler,inequality,noise,nu,n_samples,n_violations,
// n_indeterminate,p_hat,std_err,seed,wall_seconds
std::string estimate_csv_header();
std::string estimate_csv_row(const EstimateRecord& rec);
void write_estimate_csv(std::ostream& out, const std::vector<EstimateRecord>& recs);

// --- noise sweeps ------------------------------------------------------------
// estimate columns plus a trailing `predicted` column (closed-form value
// where one applies, blank otherwise; negative predictions mean "none").
std::string noise_sweep_csv_header();
std::string noise_sweep_csv_row(const EstimateRecord& rec, double predicted);

// --- threshold curves --------------------------------------------------------
// n_parties,epsilon,p_hat,std_err,predicted,n_samples,seed
std::string threshold_csv_header();
std::string threshold_csv_row(int n_parties, const ThresholdCurvePoint& point,
                              long n_samples, std::uint64_t seed);

// --- area records ------------------------------------------------------------
// Summary: n_parties,inequality,alpha_nodes,lambda_nodes,samples_per_node,
//          n_indeterminate,a0_hat,a1_hat,seed,wall_seconds
std::string area_csv_header();
std::string area_csv_row(const AreaRecord& rec);
// Per-node table: node,alpha,lambda,weight,p_hat,indeterminate
std::string area_node_csv_header();
void write_area_node_csv(std::ostream& out, const AreaRecord& rec);

// --- perturbed sweeps --------------------------------------------------------
// n_parties,lambda_std,p_s1s2,stderr_s1s2,p_mabk,stderr_mabk,delta,
// n_samples,seed,wall_seconds
std::string perturbed_csv_header();
std::string perturbed_csv_row(const PerturbedPoint& point);

// --- shared-plane property reports --------------------------------------------
// n_parties,n_samples,n_failures,worst_floor_margin,worst_closed_form_error,
// min_ratio,seed
std::string theorem1_csv_header();
std::string theorem1_csv_row(const Theorem1Report& report);

// --- run manifest -------------------------------------------------------------

struct ManifestOutput {
  std::string path;
  long rows = 0;
};

// One JSON document per CLI run: the seed, the library build string, a hash
// of the canonical configuration text, the configuration itself, and the
// list of files written.
struct RunManifest {
  std::uint64_t seed = 0;
  std::string build;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ManifestOutput> outputs;
};

// 64-bit FNV-1a of the canonical configuration text, hex-encoded; the same
// flags always hash to the same value.
std::string config_hash_hex(const std::string& canonical_config);

std::string manifest_json(const RunManifest& manifest);
void write_manifest(std::ostream& out, const RunManifest& manifest);

}  // namespace ghzbell

#endif  // GHZBELL_RECORDS_HPP
