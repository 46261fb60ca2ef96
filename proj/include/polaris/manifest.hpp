#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace polaris {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kFormatVersion = 1;

// 64-bit FNV-1a of a file's bytes, hex encoded. An identity/integrity hash
// for manifests, not a cryptographic one.
std::string hash_file(const std::filesystem::path& path);
std::string hash_bytes(const void* data, std::size_t size);

// Record of one CLI run: resolved parameters and hashes of every input and
// output artifact. The timestamp is a separate field so byte-identical
// artifacts of two runs can be compared manifest-aside.
class RunManifest {
  public:
    RunManifest(std::string command, std::vector<std::string> command_line);

    void add_parameter(const std::string& key, const std::string& value);
    void add_parameter(const std::string& key, double value);
    void add_parameter(const std::string& key, std::uint64_t value);
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);

    void save(const std::filesystem::path& path) const;

  private:
    std::string command_;
    std::vector<std::string> command_line_;
    std::vector<std::pair<std::string, std::string>> parameters_;
    std::vector<std::pair<std::string, std::string>> inputs_;   // path, hash
    std::vector<std::pair<std::string, std::string>> outputs_;  // path, hash
};

}  // namespace polaris
