#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace newsrank::run {

// Records what a stage consumed and produced so a rerun can be checked
// byte-for-byte: config snapshot, seed, and SHA-256 digests of every input
// and output file. Entries are stored under their file names, so the record
// does not depend on where the run directory lives.
class ManifestBuilder {
public:
    ManifestBuilder(std::string stage, std::string config_json, std::uint64_t seed);

    void add_input(const std::string& path);
    void add_output(const std::string& path);

    // Writes <out_dir>/manifest.json. The timestamp field is null unless
    // SOURCE_DATE_EPOCH is set (reproducible-build convention); wall-clock
    // time would make otherwise identical reruns differ.
    std::string write(const std::string& out_dir) const;

private:
    struct Entry {
        std::string name;
        std::string digest;
    };

    std::string stage_;
    std::string config_json_;
    std::uint64_t seed_;
    std::vector<Entry> inputs_;
    std::vector<Entry> outputs_;
};

}  // namespace newsrank::run
