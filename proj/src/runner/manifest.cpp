#include "runner/manifest.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <utility>

#include "common/error.hpp"
#include "common/sha256.hpp"
#include "json.hpp"

namespace newsrank::run {

using nlohmann::json;

ManifestBuilder::ManifestBuilder(std::string stage, std::string config_json, std::uint64_t seed)
    : stage_(std::move(stage)), config_json_(std::move(config_json)), seed_(seed) {}

void ManifestBuilder::add_input(const std::string& path) {
    inputs_.push_back({std::filesystem::path(path).filename().string(), sha256_file_hex(path)});
}

void ManifestBuilder::add_output(const std::string& path) {
    outputs_.push_back({std::filesystem::path(path).filename().string(), sha256_file_hex(path)});
}

std::string ManifestBuilder::write(const std::string& out_dir) const {
    json j;
    j["stage"] = stage_;
    j["seed"] = seed_;
    try {
        j["config"] = json::parse(config_json_);
    } catch (const json::exception& e) {
        throw InputError(std::string("manifest config snapshot is not valid JSON: ") + e.what());
    }
    auto entries = [](const std::vector<Entry>& list) {
        json out = json::object();
        for (const auto& e : list) out[e.name] = e.digest;
        return out;
    };
    j["inputs"] = entries(inputs_);
    j["outputs"] = entries(outputs_);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr) {
        j["timestamp"] = std::strtoull(epoch, nullptr, 10);
    } else {
        j["timestamp"] = nullptr;
    }

    const std::string path = (std::filesystem::path(out_dir) / "manifest.json").string();
    std::ofstream out(path);
    if (!out) throw InputError("cannot write manifest to " + path);
    out << j.dump(2) << "\n";
    return path;
}

}  // namespace newsrank::run
