#include "wkam/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace wkam {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw InternalError("cannot open output file \"" + path + "\"");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InternalError("cannot open output file \"" + path + "\"");
  out << j.dump(2) << "\n";
}

void write_sidecar(const std::string& path, const nlohmann::json& config_echo,
                   const std::string& command) {
  nlohmann::json meta;
  meta["config"] = config_echo;
  meta["version"] = kVersion;
  meta["command"] = command;
  write_json_file(path + ".meta.json", meta);
}

std::vector<std::vector<std::string>> kernel_csv_rows(const ActionKernel& kernel) {
  std::vector<std::vector<std::string>> rows;
  int n = kernel.grid().num_nodes();
  rows.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      rows.push_back({std::to_string(y), std::to_string(x), format_double(kernel.value(y, x))});
  return rows;
}

std::vector<std::string> curve_csv_header(int dim) {
  if (dim == 1) return {"t", "x1", "v1"};
  return {"t", "x1", "x2", "v1", "v2"};
}

std::vector<std::vector<std::string>> curve_csv_rows(const Curve& curve) {
  std::vector<std::vector<std::string>> rows;
  int n = static_cast<int>(curve.points.size());
  int d = curve.points.front().dim();
  for (int j = 0; j < n; ++j) {
    std::vector<std::string> row;
    row.push_back(format_double(curve.t_start + curve.dt * j));
    for (int i = 0; i < d; ++i)
      row.push_back(format_double(curve.points[static_cast<std::size_t>(j)][i]));
    // Last node repeats the final segment velocity.
    const Vec& v = curve.velocities[static_cast<std::size_t>(std::min(j, n - 2))];
    for (int i = 0; i < d; ++i) row.push_back(format_double(v[i]));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> field_csv_header(int dim) {
  if (dim == 1) return {"t_index", "x_index", "u"};
  return {"t_index", "x_index", "x2_index", "u"};
}

std::vector<std::vector<std::string>> field_csv_rows(const GridField& field) {
  std::vector<std::vector<std::string>> rows;
  int n = field.grid.n_per_dim();
  for (int k = 0; k < field.n_t; ++k) {
    for (int node = 0; node < field.grid.num_nodes(); ++node) {
      std::vector<std::string> row;
      row.push_back(std::to_string(k));
      if (field.grid.dim() == 1) {
        row.push_back(std::to_string(node));
      } else {
        row.push_back(std::to_string(node % n));
        row.push_back(std::to_string(node / n));
      }
      row.push_back(format_double(field.at(k, node)));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace wkam
