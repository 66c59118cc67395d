// Copyright 2026 The covlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COVLAB_REPORT_HPP
#define COVLAB_REPORT_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "covlab/causal.hpp"
#include "covlab/harness.hpp"

namespace covlab {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "COVLAB_OUT_DIR";

/// --out beats COVLAB_OUT_DIR, which beats run.out_dir.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli, const RunConfig& config);

/// Creates parent directories; throws std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Space-time heatmap of log10 |u| (time upwards) with region outlines.
/// Large lattices are block-averaged to at most `max_cells` per side.
std::string svg_heatmap(const Lattice& lattice, const Eigen::VectorXd& values,
                        const std::vector<std::pair<std::string, Region>>& overlays,
                        const std::string& title, int max_cells = 200);

/// One bar per margin with length log10(threshold / value) for "<" margins
/// and log10(value / threshold) for ">" margins; failing bars are red.
std::string svg_margin_bars(const std::vector<Margin>& margins, const std::string& title);

/// name,j,i rows for every site of every region.
std::string regions_csv(const Lattice& lattice, const std::map<std::string, Region>& regions);

/// Real and imaginary parts, one row per matrix row.
std::string matrix_csv(const Eigen::MatrixXcd& m);

/// report.json, report.txt, margins.svg, propagator.svg and regions.csv.
std::vector<std::filesystem::path> write_spinstat(const std::filesystem::path& dir, const SpinStatReport& report);

/// <name>.json and <name>.txt.
std::vector<std::filesystem::path> write_check(const std::filesystem::path& dir, const CheckReport& report);

std::string check_text(const CheckReport& report);

/// Rebuilds stages and verdicts from report.json (no artifacts). Throws
/// ConfigError on malformed documents.
SpinStatReport spinstat_from_json(const nlohmann::ordered_json& doc);

}  // namespace covlab

#endif  // COVLAB_REPORT_HPP
