#include "gclab/io.hpp"

#include "gclab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace gclab {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

void append_row(std::string& out, const Eigen::Vector2d& x, double value) {
  out += format_double(x(0));
  out += ',';
  out += format_double(x(1));
  out += ',';
  out += format_double(value);
  out += '\n';
}

}  // namespace

std::string field_csv(const ScalarField& field) {
  const Grid2D& grid = field.grid();
  std::string out = "x1,x2,value\n";
  const int n = grid.nodes_per_axis();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) append_row(out, grid.point(i, j), field(i, j));
  return out;
}

std::string masked_field_csv(const Grid2D& grid, const std::vector<double>& values, const std::vector<char>& present) {
  if (values.size() != grid.node_count() || present.size() != grid.node_count())
    throw InputError("masked field does not match its grid");
  std::string out = "x1,x2,value\n";
  const int n = grid.nodes_per_axis();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const std::size_t k = grid.index(i, j);
      if (present[k]) append_row(out, grid.point(i, j), values[k]);
    }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream stream(temp, std::ios::binary | std::ios::trunc);
    if (!stream) throw Error("cannot open " + temp.string() + " for writing");
    stream.write(content.data(), static_cast<std::streamsize>(content.size()));
    stream.flush();
    if (!stream) throw Error("failed writing " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error("cannot move " + temp.string() + " into place");
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw InputError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

}  // namespace gclab
