#pragma once

#include <string>
#include <string_view>

namespace limrsf {

/// Whole file as bytes. Throws IoError naming the path.
std::string read_file(const std::string& path);
/// Replaces the file with `bytes`. Throws IoError naming the path.
void write_file(const std::string& path, std::string_view bytes);

} // namespace limrsf
