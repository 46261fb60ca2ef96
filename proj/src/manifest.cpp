#include "polaris/manifest.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "polaris/error.hpp"

namespace polaris {

std::string hash_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("hash_file: cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(out);
}

RunManifest::RunManifest(std::string command,
                         std::vector<std::string> command_line)
    : command_(std::move(command)), command_line_(std::move(command_line)) {}

void RunManifest::add_parameter(const std::string& key,
                                const std::string& value) {
    parameters_.emplace_back(key, value);
}

void RunManifest::add_parameter(const std::string& key, double value) {
    parameters_.emplace_back(key, nlohmann::json(value).dump());
}

void RunManifest::add_parameter(const std::string& key, std::uint64_t value) {
    parameters_.emplace_back(key, std::to_string(value));
}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs_.emplace_back(path.string(), hash_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs_.emplace_back(path.string(), hash_file(path));
}

void RunManifest::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["command"] = command_;
    j["command_line"] = command_line_;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : parameters_) params[k] = v;
    j["parameters"] = params;
    j["inputs"] = nlohmann::json::array();
    for (const auto& [p, h] : inputs_)
        j["inputs"].push_back({{"path", p}, {"hash", h}});
    j["outputs"] = nlohmann::json::array();
    for (const auto& [p, h] : outputs_)
        j["outputs"].push_back({{"path", p}, {"hash", h}});
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace polaris
