#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace crosscam {

using json = nlohmann::json;

json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

/// JSON Lines: one compact document per line.
std::vector<json> load_jsonl(const std::filesystem::path& path);
void save_jsonl(const std::filesystem::path& path, const std::vector<json>& lines);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace crosscam
