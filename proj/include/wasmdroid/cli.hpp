// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "report.hpp"
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wasmdroid
{
enum class OutputFormat
{
    Json,
    Text,
};

struct CliConfig
{
    std::vector<std::filesystem::path> inputs;
    OutputFormat format = OutputFormat::Json;
    bool deep = false;
    size_t min_string_len = 6;
    std::optional<std::filesystem::path> extract_out;
    std::optional<std::filesystem::path> catalog;
    std::optional<std::filesystem::path> weights;
    unsigned jobs = 1;
};

inline constexpr int kExitOperationalError = 1;

/// 0 Clean, 2 WasmPresent, 3 SuspiciousHiding, 4 LikelyMaliciousHiding.
int exit_code_for(Verdict v) noexcept;

/// Expands directories to the *.apk and *.wasm files below them, sorted.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs);

/// Suffix of the per-file report written next to each input when more than
/// one input is scanned.
std::string report_suffix(OutputFormat f);

/// Scans every input. A single input's report goes to `out`; with several,
/// each report is written next to its input. Returns the exit code for the
/// highest verdict, or 1 when every input failed.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);
}  // namespace wasmdroid
