#include "gsde/manifest.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gsde/errors.hpp"

namespace gsde {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void Manifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest '" + path + "'");
    out << "gsde-manifest v1\n";
    out << "subcommand: " << subcommand << "\n";
    out << "[config]\n";
    out << config_echo;
    out << "[artifacts]\n";
    char buf[64];
    for (const ManifestArtifact& a : artifacts) {
        std::snprintf(buf, sizeof(buf), "%016" PRIx64, a.checksum);
        out << a.name << ": fnv1a:" << buf << "\n";
    }
}

Manifest Manifest::read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest '" + path + "'");
    Manifest m;
    std::string line;
    if (!std::getline(in, line) || line != "gsde-manifest v1") {
        throw ConfigError("'" + path + "' is not a gsde manifest");
    }
    if (!std::getline(in, line) || line.rfind("subcommand: ", 0) != 0) {
        throw ConfigError("manifest missing subcommand line");
    }
    m.subcommand = line.substr(12);
    if (!std::getline(in, line) || line != "[config]") {
        throw ConfigError("manifest missing [config] section");
    }
    std::ostringstream echo;
    bool in_artifacts = false;
    while (std::getline(in, line)) {
        if (line == "[artifacts]") {
            in_artifacts = true;
            continue;
        }
        if (!in_artifacts) {
            echo << line << "\n";
            continue;
        }
        const std::size_t colon = line.find(": fnv1a:");
        if (colon == std::string::npos) {
            throw ConfigError("bad artifact line in manifest: '" + line + "'");
        }
        ManifestArtifact a;
        a.name = line.substr(0, colon);
        a.checksum = std::stoull(line.substr(colon + 8), nullptr, 16);
        m.artifacts.push_back(std::move(a));
    }
    m.config_echo = echo.str();
    return m;
}

} // namespace gsde
