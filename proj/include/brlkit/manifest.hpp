#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace brlkit {

// FNV-1a of a file's bytes, hex-encoded. Throws if the file is unreadable.
std::string file_checksum(const std::string& path);

// Reproducibility record written next to every CLI output: command, fully
// resolved configuration, seeds, input/output checksums, timestamp.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> input_checksums;
    std::map<std::string, std::string> output_checksums;

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    void write(const std::string& path) const;
};

}  // namespace brlkit
