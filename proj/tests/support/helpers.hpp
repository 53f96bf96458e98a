#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "lexcascade/postgram.hpp"
#include "lexcascade/rng.hpp"
#include "oracles.hpp"

namespace testutil {

using lexcascade::Alphabet;
using lexcascade::Posteriorgram;

std::shared_ptr<const Alphabet> alphabet(std::vector<std::string> labels);
/// Labels "a", "b", ... for classes 1..classes-1.
std::shared_ptr<const Alphabet> letters(std::size_t classes);

Posteriorgram from_rows(std::shared_ptr<const Alphabet> a, const std::vector<std::vector<double>>& rows);

/// Each character is one frame dominated by its class followed by one blank
/// frame; padded with blank frames up to `frames` (0 means no padding).
Posteriorgram spelled(std::shared_ptr<const Alphabet> a, const std::string& text, std::size_t frames = 0,
                      double dominant = 0.9);

/// Random stochastic rows. With `coarse`, entries come from a handful of
/// levels so that argmax ties are common.
Posteriorgram random_posteriorgram(lexcascade::RandomStream& rng, std::shared_ptr<const Alphabet> a,
                                   std::size_t frames, bool coarse = false);

oracle::Matrix matrix(const Posteriorgram& p);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, interleaved
};

/// Runs a shell command line.
CommandResult run_command(const std::string& command);

/// Single-quotes for /bin/sh.
std::string shell_quote(const std::string& s);

}  // namespace testutil
