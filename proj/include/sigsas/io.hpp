#pragma once

// File formats and report serialization. Formats are documented in the README
// and pinned by golden-file tests:
//  - Volterra kernel sets: line-oriented text with a (p, l, m_out) header and
//    one `g <degree> <lags...> <coeffs...>` record per stored tuple.
//  - JL maps: JSON header (N, k, seed, epsilon) only; the matrix is
//    regenerated from the seed and cross-checked by hash.
//  - Reservoirs: JSON with all parameters and the matrices.
//  - Inputs/trajectories: CSV with a mandatory header row.
// JSON reports carry a schema_version field; wall-clock data lives in a
// separate "timing" subtree so reports are byte-identical modulo timing.

#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "sigsas/experiment.hpp"
#include "sigsas/jl.hpp"
#include "sigsas/random_sas.hpp"
#include "sigsas/readout.hpp"
#include "sigsas/sigsas.hpp"
#include "sigsas/volterra.hpp"

namespace sigsas::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

// ---- Volterra kernel sets (structured text) ----
void write_kernels(const std::string& path, const VolterraKernelSet& kernels);
VolterraKernelSet read_kernels(const std::string& path);

// ---- JL maps (JSON header, matrix reproducible from the seed) ----
void write_jl_map(const std::string& path, const JlMap& map);
JlMap read_jl_map(const std::string& path);

// ---- reservoirs (JSON with matrices) ----
void write_reservoir(const std::string& path, const RandomSasReservoir& r);
RandomSasReservoir read_reservoir(const std::string& path);

// ---- readouts (JSON) ----
void write_readout(const std::string& path, const Readout& r);
Readout read_readout(const std::string& path);

// ---- CSV ----
struct InputTable {
    std::vector<double> z;
    Matrix targets;  // 0 x 0 when the file carries no y columns
};

/// Reads a CSV with header `z[,y_1,...,y_m]`. Throws with the offending row
/// number on malformed input.
InputTable read_input_csv(const std::string& path);

/// Validates |z_t| <= M; throws with the 1-based data row number otherwise.
void validate_inputs(const std::vector<double>& z, double m_bound);

void write_states_csv(const std::string& path, const Matrix& states);
Matrix read_states_csv(const std::string& path);

void write_series_csv(const std::string& path, const std::vector<std::string>& columns,
                      const Matrix& rows);

// ---- JSON report payloads ----
json to_json(const EspReport& r);
json to_json(const DistanceReport& r);
json to_json(const QuasiProjectionReport& r);
json to_json(const LawAuditReport& r);
json to_json(const EspCertificate& r);
json to_json(const ExperimentReport& r);
json to_json(const UniversalityReport& r);
json to_json(const ExperimentConfig& c);

/// Wraps a payload with schema_version and a separate timing subtree.
json make_report(const std::string& kind, json payload, double runtime_ms);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

/// Hex FNV-1a of a double buffer; stable across runs on one platform.
std::string hash_doubles(const std::vector<double>& v);

}  // namespace sigsas::io
