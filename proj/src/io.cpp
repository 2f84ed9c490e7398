#include "sandflux/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace sandflux {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string grid_header(const Grid& grid) {
  return std::to_string(grid.nx) + "," + std::to_string(grid.ny) + "," + format_number(grid.h) +
         "," + format_number(grid.x0) + "," + format_number(grid.y0) + "\n";
}

void write_rows(std::ofstream& out, const std::vector<double>& values, int width, int rows) {
  std::string line;
  for (int j = 0; j < rows; ++j) {
    line.clear();
    for (int i = 0; i < width; ++i) {
      if (i > 0) line += ',';
      line += format_number(values[static_cast<std::size_t>(j) * width + i]);
    }
    line += '\n';
    out << line;
  }
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(line);
  while (std::getline(in, token, ',')) out.push_back(token);
  return out;
}

double to_double(const std::string& token, const std::filesystem::path& path, int line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error("bad number '" + token + "' in '" + path.string() + "' line " + std::to_string(line));
  }
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

void write_cell_field(const std::filesystem::path& path, const CellField& field, const Grid& grid) {
  if (!field.matches(grid)) throw Error("field does not match grid for '" + path.string() + "'");
  std::ofstream out = open_out(path);
  out << grid_header(grid);
  write_rows(out, field.values(), grid.nx, grid.ny);
  finish(out, path);
}

void write_flux_fields(const std::filesystem::path& qx_path, const std::filesystem::path& qy_path,
                       const FluxField& q, const Grid& grid) {
  {
    std::ofstream out = open_out(qx_path);
    out << grid_header(grid);
    write_rows(out, q.qx_values(), grid.nx + 1, grid.ny);
    finish(out, qx_path);
  }
  std::ofstream out = open_out(qy_path);
  out << grid_header(grid);
  write_rows(out, q.qy_values(), grid.nx, grid.ny + 1);
  finish(out, qy_path);
}

CellFieldFile read_cell_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("empty field file '" + path.string() + "'");
  const std::vector<std::string> head = split_commas(line);
  if (head.size() != 5) throw Error("bad header in '" + path.string() + "'");
  const int nx = static_cast<int>(to_double(head[0], path, 1));
  const int ny = static_cast<int>(to_double(head[1], path, 1));
  Grid grid(nx, ny, to_double(head[2], path, 1), to_double(head[3], path, 1),
            to_double(head[4], path, 1));
  CellField field(grid);
  for (int j = 0; j < ny; ++j) {
    if (!std::getline(in, line)) {
      throw Error("'" + path.string() + "' has fewer than " + std::to_string(ny) + " rows");
    }
    const std::vector<std::string> cells = split_commas(line);
    if (static_cast<int>(cells.size()) != nx) {
      throw Error("'" + path.string() + "' line " + std::to_string(j + 2) + " has " +
                  std::to_string(cells.size()) + " values, expected " + std::to_string(nx));
    }
    for (int i = 0; i < nx; ++i) field(i, j) = to_double(cells[i], path, j + 2);
  }
  if (!field.all_finite()) throw Error("non-finite value in '" + path.string() + "'");
  return {grid, std::move(field)};
}

void write_history(const std::filesystem::path& path, const std::vector<StepRecord>& history) {
  std::ofstream out = open_out(path);
  out << "step,t,objective,max_du_dt,total_cost\n";
  for (const StepRecord& r : history) {
    out << r.step << ',' << format_number(r.t) << ',' << format_number(r.objective) << ','
        << format_number(r.max_du_dt) << ',' << format_number(r.total_cost) << '\n';
  }
  finish(out, path);
}

void write_key_values(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  finish(out, path);
}

}  // namespace sandflux
