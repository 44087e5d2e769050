#include "omitlab/run_record.hpp"

#include "omitlab/errors.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#ifndef OMITLAB_VERSION
#define OMITLAB_VERSION "0.0.0"
#endif

namespace omitlab::run_record {

std::string toolkit_version() { return OMITLAB_VERSION; }

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 computation failed");
    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < length; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
    return hex.str();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("output", "cannot read " + path);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return sha256_hex(bytes.str());
}

nlohmann::json make(const config::RunConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
    nlohmann::json record;
    record["toolkit_version"] = toolkit_version();
    record["timestamp_utc"] = stamp;
    record["command"] = command;
    record["config"] = config::to_json(config);
    auto files = nlohmann::json::array();
    for (const auto& path : outputs) {
        files.push_back({{"path", path},
                         {"sha256", sha256_file(path)},
                         {"bytes", std::filesystem::file_size(path)}});
    }
    record["outputs"] = files;
    return record;
}

std::string write(const config::RunConfig& config, const std::string& command,
                  const std::vector<std::string>& outputs) {
    if (outputs.empty()) throw DomainError("output", "no outputs to record");
    const std::string path = outputs.front() + ".run.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("output", "cannot write " + path);
    out << make(config, command, outputs).dump(2) << '\n';
    return path;
}

} // namespace omitlab::run_record
