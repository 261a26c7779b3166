#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smg/audit.hpp"
#include "smg/logistic.hpp"
#include "smg/optimizers.hpp"

namespace smg {

// ---------------------------------------------------------------------------
// LIBSVM text format

struct ParsedDataset {
  std::vector<SparseSample> samples;
  std::size_t d = 0;  // largest feature index seen
};

/// Parses `label idx:val idx:val ...` lines. Labels 0/-1 map to -1 and 1/+1 to +1;
/// blank lines and `#` comments are skipped. Throws ParseError with the 1-based line.
ParsedDataset parse_libsvm(std::istream& in);
ParsedDataset load_libsvm_file(const std::filesystem::path& path);

struct DatasetMeta {
  std::string name;
  std::size_t n = 0;
  std::size_t d = 0;
  std::string source;
  std::optional<std::string> checksum;  // FNV-1a 64 of the file bytes, hex
};

DatasetMeta describe_dataset(const std::filesystem::path& path, const ParsedDataset& data);
nlohmann::json to_json(const DatasetMeta& meta);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic data

/// n seeded Gaussian samples labelled by a planted hyperplane. Each label is
/// flipped with probability (1 - separability) / 2, so separability = 1 keeps the
/// data linearly separable by the planted normal and 0 makes labels pure noise.
std::vector<SparseSample> synth_binary_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                                               double separability);

/// The planted normal used by synth_binary_dataset for (d, seed).
Vector planted_normal(std::size_t d, std::uint64_t seed);

/// Divides every feature column by its largest absolute value.
void scale_features(std::vector<SparseSample>& samples, std::size_t d);

// ---------------------------------------------------------------------------
// Traces

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

/// Writes `<stem>.csv` (header epoch,eta,loss,grad_norm_sq) and `<stem>.json`
/// (config hash, seed, selected output index, optional config and bound report).
void write_trace(const RunRecord& record, const std::filesystem::path& stem,
                 const nlohmann::json& config = nullptr, const BoundReport* report = nullptr);

std::string trace_csv(const RunRecord& record);
std::vector<TraceRow> parse_trace_csv(std::istream& in);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const IdentityReport& report);
nlohmann::json to_json(const RateFit& fit);

/// Writes text to a file, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace smg
