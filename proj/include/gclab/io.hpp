#pragma once

// Plain-text serialization: CSV tables with a header row and atomic file
// writes. Numbers are printed with 17 significant digits so that values
// round-trip exactly and identical inputs give identical bytes.

#include "gclab/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gclab {

std::string format_double(double value);

/// Rows "x1,x2,value" for every node, x1 varying fastest.
std::string field_csv(const ScalarField& field);

/// Same layout restricted to nodes where `present` is non-zero.
std::string masked_field_csv(const Grid2D& grid, const std::vector<double>& values, const std::vector<char>& present);

/// Writes through a temporary file in the same directory and renames it into
/// place. Throws Error on failure.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace gclab
