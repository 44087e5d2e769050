#pragma once

#include "omitlab/config.hpp"

#include <string>
#include <string_view>
#include <vector>

// Persistence of a completed run: the effective config, toolkit version,
// UTC timestamp and SHA-256 digests of every output file. The record is
// itself a valid --config input, which replays the run.
namespace omitlab::run_record {

std::string toolkit_version();

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path); // DomainError if unreadable

nlohmann::json make(const config::RunConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs);

// Writes make(...) to <primary_output>.run.json and returns that path.
std::string write(const config::RunConfig& config, const std::string& command,
                  const std::vector<std::string>& outputs);

} // namespace omitlab::run_record
