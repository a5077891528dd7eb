#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "collapse/functionals.hpp"
#include "collapse/radial.hpp"

namespace collapse {

/// Round-trip-exact double formatting; every number the lab emits goes
/// through here so that identical runs give byte-identical artifacts.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_profile_csv(const std::filesystem::path& path, const RadialProfile& p) {
  std::string s = "r,Q\n";
  for (size_t i = 0; i < p.r_nodes.size(); ++i)
    s += fmt17(p.r_nodes[i]) + "," + fmt17(p.values[i]) + "\n";
  write_text(path, s);
}

inline nlohmann::json constants_json(const GNConstants& gn) {
  nlohmann::json j;
  j["a_star"] = gn.a_star;
  j["grad_sq"] = gn.grad_sq;
  j["quartic"] = gn.quartic;
  nlohmann::json m;
  for (const auto& [p, v] : gn.moments) m[fmt17(p)] = v;
  j["moments"] = m;
  return j;
}

inline nlohmann::json breakdown_json(const EnergyBreakdown& b) {
  return nlohmann::json{{"kin1", b.kin1},     {"trap1", b.trap1}, {"intra1", b.intra1},
                        {"kin2", b.kin2},     {"trap2", b.trap2}, {"intra2", b.intra2},
                        {"inter", b.inter},   {"total", b.total}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

/// Field export: `x,y,value` rows in row-major order plus a compact JSON
/// header carrying the grid geometry.
inline void write_field_csv(const std::filesystem::path& csv_path,
                            const std::filesystem::path& header_path, const Field2D& f) {
  std::string s = "x,y,value\n";
  s.reserve(f.values.size() * 40);
  for (int ix = 0; ix < f.grid.n; ++ix)
    for (int iy = 0; iy < f.grid.n; ++iy)
      s += fmt17(f.grid.coord(ix)) + "," + fmt17(f.grid.coord(iy)) + "," +
           fmt17(f.at(ix, iy)) + "\n";
  write_text(csv_path, s);
  write_json(header_path, nlohmann::json{{"L", f.grid.half_width}, {"n", f.grid.n}});
}

inline Field2D read_field_csv(const std::filesystem::path& csv_path,
                              const std::filesystem::path& header_path) {
  const auto header = nlohmann::json::parse(read_text(header_path));
  const Grid2D g = build_grid(header.at("L").get<double>(), header.at("n").get<int>());
  Field2D f(g);
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open for reading: " + csv_path.string());
  std::string line;
  std::getline(in, line);  // header row
  long idx = 0;
  while (std::getline(in, line) && idx < g.size()) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("malformed field csv row");
    f.values[idx++] = std::stod(line.substr(c2 + 1));
  }
  if (idx != g.size()) throw std::runtime_error("field csv truncated");
  return f;
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<std::array<double, 3>>& trace) {
  std::string s = "step,energy,residual\n";
  for (const auto& row : trace)
    s += fmt17(row[0]) + "," + fmt17(row[1]) + "," + fmt17(row[2]) + "\n";
  write_text(path, s);
}

}  // namespace collapse
