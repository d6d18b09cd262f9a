#include "shockstab/config.hpp"
#include "shockstab/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace shockstab {

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string run_manifest(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& files) {
    nlohmann::json j;
    j["tool"] = "shockstab";
    j["version"] = "0.1.0";
    j["command"] = command;
    j["model"] = cfg.model_name;
    j["config"] = nlohmann::json::parse(cfg.source);
    j["files"] = files;
    j["random_seed"] = nullptr;  // every sample set is deterministic
    return j.dump(2);
}

}  // namespace shockstab
