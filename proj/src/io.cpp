#include "crosscam/io.hpp"

#include <fstream>
#include <sstream>

#include "crosscam/errors.hpp"

namespace crosscam {

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return j;
}

void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<json> load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<json> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw IoError(path.string() + " line " + std::to_string(lines.size() + 1) + ": " +
                          e.what());
        }
    }
    return lines;
}

void save_jsonl(const std::filesystem::path& path, const std::vector<json>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& j : lines) out << j.dump() << '\n';
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

}  // namespace crosscam
