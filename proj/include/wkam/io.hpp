#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "wkam/action.hpp"

namespace wkam {

/// Shortest round-trippable decimal representation.
std::string format_double(double v);

/// Comma-separated, '.' decimal, header row, LF endings.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_json_file(const std::string& path, const nlohmann::json& j);

/// "<path>.meta.json" echoing the exact config and the code version.
void write_sidecar(const std::string& path, const nlohmann::json& config_echo,
                   const std::string& command);

std::vector<std::vector<std::string>> kernel_csv_rows(const ActionKernel& kernel);
std::vector<std::vector<std::string>> curve_csv_rows(const Curve& curve);
std::vector<std::vector<std::string>> field_csv_rows(const GridField& field);

std::vector<std::string> curve_csv_header(int dim);
std::vector<std::string> field_csv_header(int dim);

}  // namespace wkam
