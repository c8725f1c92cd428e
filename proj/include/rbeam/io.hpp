#pragma once

#include <string>
#include <vector>

#include "rbeam/types.hpp"

namespace rbeam::io {

/// 8-bit portable graymap (P5 or P2), values scaled to [0, 1].
RMatrix load_pgm(const std::string& path);
/// Writes P5 after min-max normalization (constant images map to 0).
void save_pgm(const RMatrix& image, const std::string& path);

/// CSV grid of doubles, no header.
RMatrix load_csv(const std::string& path);
void save_csv(const RMatrix& values, const std::string& path);
void save_csv(const RVector& values, const std::string& path);

/// Complex vectors as two columns (re, im).
void save_csv(const CVector& values, const std::string& path);
CVector load_complex_csv(const std::string& path);

/// Shortest decimal round-trip formatting for doubles; keeps persisted
/// metrics bit-exact across runs.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rbeam::io
