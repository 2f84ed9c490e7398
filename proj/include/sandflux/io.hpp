#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sandflux/analysis.hpp"
#include "sandflux/grid.hpp"
#include "sandflux/solver.hpp"

namespace sandflux {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Row 1: nx,ny,h,x0,y0. Then one row per j (bottom first), one value per i.
void write_cell_field(const std::filesystem::path& path, const CellField& field, const Grid& grid);
/// qx.csv has ny rows of nx+1 values, qy.csv ny+1 rows of nx values.
void write_flux_fields(const std::filesystem::path& qx_path, const std::filesystem::path& qy_path,
                       const FluxField& q, const Grid& grid);

struct CellFieldFile {
  Grid grid;
  CellField field;
};
CellFieldFile read_cell_field(const std::filesystem::path& path);

/// Columns step,t,objective,max_du_dt,total_cost.
void write_history(const std::filesystem::path& path, const std::vector<StepRecord>& history);

/// Flat `key = value` lines in the given order.
void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace sandflux
