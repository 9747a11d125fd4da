#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gsde {

std::uint64_t fnv1a64(const std::string& bytes);

/// Reads a whole file; throws ConfigError when missing.
std::string read_file_bytes(const std::string& path);

struct ManifestArtifact {
    std::string name; // file name relative to the output directory
    std::uint64_t checksum = 0;
};

/// Run manifest: subcommand, the fully resolved config echo, and checksums of
/// every artifact written. Sufficient to reproduce the run byte-for-byte.
struct Manifest {
    std::string subcommand;
    std::string config_echo;
    std::vector<ManifestArtifact> artifacts;

    void write(const std::string& path) const;
    static Manifest read(const std::string& path);
};

} // namespace gsde
