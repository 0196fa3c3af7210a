#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace idr {

inline constexpr const char* kToolVersion = "idrkit 0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Writes <out_dir>/manifest.json recording the command, a hash of its
// configuration, digests of every input file, the tool version and a
// timestamp. Only the manifest carries the timestamp; every other output
// of a command is a pure function of its inputs.
void write_manifest(const std::filesystem::path& out_dir,
                    const std::string& command,
                    const std::string& config_string,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::pair<std::string, std::int64_t>>&
                        stats = {});

}  // namespace idr
