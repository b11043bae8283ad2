#pragma once

#include <filesystem>
#include <string>

namespace cmcq::detail {

// Whole file as bytes; throws IoError.
std::string read_file(const std::filesystem::path& path);

}  // namespace cmcq::detail
