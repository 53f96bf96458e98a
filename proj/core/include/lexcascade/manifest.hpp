#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lexcascade {

/// One word image of a dataset: identifier and ground-truth transcript.
struct WordSample {
  std::string id;
  std::string transcript;

  friend bool operator==(const WordSample&, const WordSample&) = default;
};

/// Reads a JSON Lines manifest of {"id": ..., "transcript": ...} records.
/// Blank lines are skipped. Throws IoError, or MalformedFile on bad JSON,
/// missing fields, empty ids or duplicate ids.
std::vector<WordSample> load_manifest(const std::filesystem::path& path);

/// Serialized manifest, one compact JSON object per line.
std::string encode_manifest(const std::vector<WordSample>& words);

/// Classifier directories listed one per line in a text file. Relative
/// entries are resolved against the list file's directory; `entries` keeps
/// the spelling used in the file.
struct ClassifierList {
  std::vector<std::string> entries;
  std::vector<std::filesystem::path> directories;
};

/// Throws IoError or MalformedFile (empty list).
ClassifierList load_classifier_list(const std::filesystem::path& path);

/// "<dir>/<id>.pgm1"
std::filesystem::path posteriorgram_path(const std::filesystem::path& classifier_dir,
                                         const std::string& word_id);

}  // namespace lexcascade
