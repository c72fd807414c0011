#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace geograph {

/// Opens a file or throws IoError naming the path.
std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in);
std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace geograph
