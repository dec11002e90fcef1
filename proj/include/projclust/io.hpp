#pragma once

// Plain-text dataset format: first line "n d", then n lines of d
// whitespace-separated decimals. Lines starting with '#' are skipped.
// The same layout stores any real matrix (e.g. a sampled JL map).

#include <iosfwd>
#include <string>

#include "projclust/geometry.hpp"

namespace projclust {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);

Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& x);
void write_dataset_file(const std::string& path, const Dataset& x);

}  // namespace projclust
