#pragma once

#include <string>

namespace heatlab {

/// Writes to "<path>.tmp" and renames over path.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Locale-independent "%.17g".
std::string format_real(double v);

}  // namespace heatlab
