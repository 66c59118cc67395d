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

#include "covlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "covlab/errors.hpp"

namespace covlab {

std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli, const RunConfig& config) {
  if (cli && !cli->empty()) return *cli;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return config.out_dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Perceptually ordered ramp from dark blue to yellow.
std::string ramp(double s) {
  s = std::clamp(s, 0.0, 1.0);
  const double r = 255.0 * std::clamp(1.8 * s - 0.5, 0.0, 1.0);
  const double g = 255.0 * std::clamp(1.2 * s - 0.1, 0.0, 1.0);
  const double b = 255.0 * std::clamp(0.6 - 0.8 * s + 0.4 * (1.0 - s), 0.0, 1.0);
  return fmt::format("#{:02x}{:02x}{:02x}", static_cast<int>(r), static_cast<int>(g), static_cast<int>(b));
}

const char* kPalette[] = {"#e41a1c", "#4daf4a", "#ff7f00", "#984ea3", "#a65628", "#f781bf", "#999999", "#377eb8",
                          "#ffff33"};

}  // namespace

std::string svg_heatmap(const Lattice& lat, const Eigen::VectorXd& values,
                        const std::vector<std::pair<std::string, Region>>& overlays, const std::string& title,
                        int max_cells) {
  if (values.size() != lat.size()) throw DomainError("svg_heatmap: value vector does not match the lattice");
  const int bj = std::max(1, (lat.nt + max_cells - 1) / max_cells);
  const int bi = std::max(1, (lat.nx + max_cells - 1) / max_cells);
  const int rows = (lat.nt + bj - 1) / bj, cols = (lat.nx + bi - 1) / bi;
  Eigen::MatrixXd cell = Eigen::MatrixXd::Zero(rows, cols);
  for (int j = 0; j < lat.nt; ++j)
    for (int i = 0; i < lat.nx; ++i) cell(j / bj, i / bi) = std::max(cell(j / bj, i / bi), std::abs(values(lat.index(j, i))));
  const double top = cell.maxCoeff();
  const double floor_log = top > 0.0 ? std::log10(top) - 8.0 : -8.0;
  const int px = 3, margin = 40;
  const int w = cols * px + 2 * margin + 140, h = rows * px + 2 * margin;
  std::ostringstream svg;
  svg << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", w, h,
                     w, h);
  svg << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", w, h);
  svg << fmt::format("<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", margin,
                     escape(title));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = cell(r, c);
      if (v <= 0.0) continue;
      const double s = (std::log10(v) - floor_log) / 8.0;
      if (s <= 0.0) continue;
      svg << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", margin + c * px,
                         margin + (rows - 1 - r) * px, px, px, ramp(s));
    }
  }
  svg << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", margin,
                     margin, cols * px, rows * px);
  std::size_t color = 0;
  for (const auto& [name, region] : overlays) {
    const char* col = kPalette[color++ % std::size(kPalette)];
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(rows * cols), 0);
    for (int k : region.indices()) {
      const Site s = lat.site(k);
      seen[static_cast<std::size_t>((s.j / bj) * cols + s.i / bi)] = 1;
    }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (seen[static_cast<std::size_t>(r * cols + c)])
          svg << fmt::format(
              "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.35\"/>\n",
              margin + c * px, margin + (rows - 1 - r) * px, px, px, col);
    const int ly = margin + 16 * static_cast<int>(color);
    svg << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", margin + cols * px + 15,
                       ly - 9, col);
    svg << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                       margin + cols * px + 30, ly, escape(name));
  }
  svg << fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">x (columns), t upwards; log10 scale over 8 "
      "decades</text>\n",
      margin, h - 12);
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_margin_bars(const std::vector<Margin>& margins, const std::string& title) {
  const int row = 18, label_w = 460, bar_w = 300, top = 40;
  const int w = label_w + bar_w + 120, h = top + row * static_cast<int>(margins.size()) + 30;
  std::ostringstream svg;
  svg << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", w, h,
                     w, h);
  svg << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", w, h);
  svg << fmt::format("<text x=\"10\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", escape(title));
  const double full = 16.0;  // decades across the bar area
  for (std::size_t k = 0; k < margins.size(); ++k) {
    const Margin& m = margins[k];
    double decades = 0.0;
    if (m.relation == "<") {
      decades = m.value > 0.0 ? std::log10(m.threshold / m.value) : full;
    } else {
      decades = m.threshold > 0.0 && m.value > 0.0 ? std::log10(m.value / m.threshold) : (m.value > m.threshold ? full : 0.0);
    }
    if (!std::isfinite(decades)) decades = m.pass ? full : 0.0;
    const double len = std::clamp(std::abs(decades) / full, 0.02, 1.0) * bar_w;
    const int y = top + row * static_cast<int>(k);
    svg << fmt::format("<text x=\"10\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{}</text>\n", y + 12,
                       escape(m.name.substr(0, 70)));
    svg << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{:.1f}\" height=\"{}\" fill=\"{}\"/>\n", label_w, y + 3, len,
                       row - 6, m.pass ? "#4daf4a" : "#e41a1c");
    svg << fmt::format("<text x=\"{:.1f}\" y=\"{}\" font-family=\"monospace\" font-size=\"10\">{:.2f}</text>\n",
                       label_w + len + 6, y + 12, decades);
  }
  svg << fmt::format("<text x=\"10\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">bar length: decades of "
                     "headroom to the threshold</text>\n",
                     h - 10);
  svg << "</svg>\n";
  return svg.str();
}

std::string regions_csv(const Lattice& lat, const std::map<std::string, Region>& regions) {
  std::ostringstream csv;
  csv << "region,j,i,t,x\n";
  for (const auto& [name, region] : regions)
    for (int k : region.indices()) {
      const Site s = lat.site(k);
      csv << fmt::format("{},{},{},{:.6f},{:.6f}\n", name, s.j, s.i, lat.t(s.j), lat.x(s.i));
    }
  return csv.str();
}

std::string matrix_csv(const Eigen::MatrixXcd& m) {
  std::ostringstream csv;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) csv << ',';
      csv << fmt::format("{:.17g}{:+.17g}i", m(r, c).real(), m(r, c).imag());
    }
    csv << '\n';
  }
  return csv.str();
}

std::vector<std::filesystem::path> write_spinstat(const std::filesystem::path& dir, const SpinStatReport& report) {
  std::vector<std::filesystem::path> out;
  auto put = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    out.push_back(dir / name);
  };
  put("report.json", report.to_json().dump(2) + "\n");
  put("report.txt", report.to_text());
  std::vector<Margin> all;
  for (const auto& s : report.stages)
    for (const auto& m : s.margins) {
      Margin copy = m;
      copy.name = fmt::format("[{}] {}", s.id, m.name);
      all.push_back(copy);
    }
  put("margins.svg", svg_margin_bars(all, "spin-statistics margins"));
  if (report.artifacts.lattice) {
    const Lattice& lat = *report.artifacts.lattice;
    if (report.artifacts.propagator.size() == lat.size()) {
      std::vector<std::pair<std::string, Region>> overlays;
      for (const char* name : {"U1", "U2", "U1_tilde", "U2_tilde"}) {
        const auto it = report.artifacts.regions.find(name);
        if (it != report.artifacts.regions.end()) overlays.emplace_back(name, it->second);
      }
      put("propagator.svg", svg_heatmap(lat, report.artifacts.propagator, overlays, "|E f1| on the deformed spacetime"));
    }
    if (!report.artifacts.regions.empty()) put("regions.csv", regions_csv(lat, report.artifacts.regions));
  }
  return out;
}

std::string check_text(const CheckReport& r) {
  std::ostringstream out;
  out << r.name << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& m : r.margins)
    out << fmt::format("    {:<52} {:>12.4e} {} {:<10.3e} {}\n", m.name, m.value, m.relation, m.threshold,
                       m.pass ? "ok" : "VIOLATED");
  if (!r.detail.empty()) out << "    " << r.detail << "\n";
  return out.str();
}

std::vector<std::filesystem::path> write_check(const std::filesystem::path& dir, const CheckReport& report) {
  const auto json = dir / (report.name + ".json");
  const auto txt = dir / (report.name + ".txt");
  write_file(json, report.to_json().dump(2) + "\n");
  write_file(txt, check_text(report));
  return {json, txt};
}

SpinStatReport spinstat_from_json(const nlohmann::ordered_json& doc) {
  try {
    SpinStatReport r;
    r.config = doc.at("config");
    for (const auto& sj : doc.at("stages")) {
      StageResult s;
      s.id = sj.at("id").get<int>();
      s.name = sj.at("name").get<std::string>();
      s.branch = sj.at("branch").get<std::string>();
      s.pass = sj.at("pass").get<bool>();
      s.skipped = sj.at("skipped").get<bool>();
      s.detail = sj.at("detail").get<std::string>();
      for (const auto& mj : sj.at("margins")) {
        Margin m;
        m.name = mj.at("name").get<std::string>();
        m.value = mj.at("value").is_number() ? mj.at("value").get<double>() : std::nan("");
        m.threshold = mj.at("threshold").get<double>();
        m.relation = mj.at("relation").get<std::string>();
        m.pass = mj.at("pass").get<bool>();
        s.margins.push_back(m);
      }
      r.stages.push_back(std::move(s));
    }
    r.verdict_integer = doc.at("verdict").at("integer").get<std::string>();
    r.verdict_half_integer = doc.at("verdict").at("half-integer").get<std::string>();
    r.verdict = doc.at("verdict").at("overall").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed report: {}", e.what()));
  }
}

}  // namespace covlab
