#pragma once

// Factor bundles: a directory of DTF1 files plus manifest.json
// {type, K, ranks, lambda, fit_history, seed, sweeps, ...}.
//
//   ll1:   term<k>_A.dtf1, term<k>_B.dtf1, term<k>_c.dtf1
//   cpd:   factor<n>.dtf1
//   hosvd: core.dtf1, factor<n>.dtf1

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tdcif/decomp.hpp"

namespace tdcif {

void save_bundle(const std::filesystem::path& dir, const LL1Factors& f);
void save_bundle(const std::filesystem::path& dir, const KruskalFactors& f);
void save_bundle(const std::filesystem::path& dir, const TuckerFactors& f, double fit);

/// Bundle type recorded in dir/manifest.json ("ll1", "cpd" or "hosvd").
std::string bundle_type(const std::filesystem::path& dir);
nlohmann::json read_manifest(const std::filesystem::path& dir);

LL1Factors load_ll1_bundle(const std::filesystem::path& dir);
KruskalFactors load_cpd_bundle(const std::filesystem::path& dir);
TuckerFactors load_hosvd_bundle(const std::filesystem::path& dir);

}  // namespace tdcif
