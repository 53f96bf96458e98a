#include "lexcascade/manifest.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <unordered_set>

#include "lexcascade/binary_io.hpp"
#include "lexcascade/error.hpp"

namespace lexcascade {

std::vector<WordSample> load_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<WordSample> words;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedFile(where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("transcript") ||
        !record["id"].is_string() || !record["transcript"].is_string()) {
      throw MalformedFile(where + ": expected {\"id\": string, \"transcript\": string}");
    }
    WordSample w{record["id"].get<std::string>(), record["transcript"].get<std::string>()};
    if (w.id.empty()) throw MalformedFile(where + ": empty id");
    if (!seen.insert(w.id).second) throw MalformedFile(where + ": duplicate id '" + w.id + "'");
    words.push_back(std::move(w));
  }
  return words;
}

std::string encode_manifest(const std::vector<WordSample>& words) {
  std::string out;
  for (const auto& w : words) {
    nlohmann::json record = {{"id", w.id}, {"transcript", w.transcript}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

ClassifierList load_classifier_list(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  ClassifierList list;
  const auto base = path.parent_path();
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') continue;
    std::filesystem::path dir(line);
    list.directories.push_back(dir.is_absolute() ? dir : base / dir);
    list.entries.push_back(line);
  }
  if (list.entries.empty()) throw MalformedFile(path.string() + ": no classifier directories");
  return list;
}

std::filesystem::path posteriorgram_path(const std::filesystem::path& classifier_dir,
                                         const std::string& word_id) {
  return classifier_dir / (word_id + ".pgm1");
}

}  // namespace lexcascade
