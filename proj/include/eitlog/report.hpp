#ifndef EITLOG_REPORT_HPP
#define EITLOG_REPORT_HPP

#include "eitlog/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace eitlog {

/// Deterministic JSON rendering of a report. The runtime field is
/// deliberately absent so that artifacts hash identically across runs.
std::string report_to_json(const ExperimentReport& report);

/// Writes report_<name>.json and returns its path.
std::filesystem::path write_report_json(const ExperimentReport& report,
                                        const std::string& name,
                                        const std::filesystem::path& dir);

/// One CSV per curve (x,y columns with headers) plus a fit-line CSV for
/// every slope bound to a curve; returns the written paths.
std::vector<std::filesystem::path> emit_plotdata(
    const ExperimentReport& report, const std::string& name,
    const std::filesystem::path& dir);

std::uint64_t fnv1a64_bytes(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

/// manifest.txt: `<fnv1a64 hex>  <filename>` per artifact, sorted by name.
std::filesystem::path write_manifest(
    const std::filesystem::path& dir,
    const std::vector<std::filesystem::path>& files);

/// Console summary including pass/fail gates and the runtime.
std::string format_summary(const ExperimentReport& report);

} // namespace eitlog

#endif
