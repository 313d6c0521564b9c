#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pweight/testing.hpp"

namespace pweight::tsv {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EffectRow {
  std::string id;
  double mu = 0.0;
};

/// Effects file: header line, then `id<TAB>mu`.  For the filter scheme the
/// second column is read as a prior p-value instead; same layout.
std::vector<EffectRow> read_effects(const std::filesystem::path& path);

/// Summary-statistics file: header, then `id<TAB>p[<TAB>n[<TAB>sign]]`.
/// A missing n column requires broadcast_n > 0; a present column wins.
std::vector<testing::SummaryStatRecord> read_summary_stats(const std::filesystem::path& path, double broadcast_n);

/// Grouping file: header, then `id<TAB>locus` (for collapsing hits to loci).
std::unordered_map<std::string, std::string> read_id_map(const std::filesystem::path& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_real(double x);

/// Writes `content` atomically: to a temp file in the target directory,
/// then rename.  A failed run never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit digest of a file's bytes, hex-encoded (input fingerprint
/// for run manifests).
std::string fnv1a_hex(const std::filesystem::path& path);

}  // namespace pweight::tsv
