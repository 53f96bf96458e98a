#include "helpers.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>

namespace testutil {

std::shared_ptr<const Alphabet> alphabet(std::vector<std::string> labels) {
  return std::make_shared<const Alphabet>(std::move(labels));
}

std::shared_ptr<const Alphabet> letters(std::size_t classes) {
  std::vector<std::string> labels;
  for (std::size_t c = 1; c < classes; ++c) labels.push_back(std::string(1, static_cast<char>('a' + c - 1)));
  return alphabet(std::move(labels));
}

Posteriorgram from_rows(std::shared_ptr<const Alphabet> a, const std::vector<std::vector<double>>& rows) {
  std::vector<double> probs;
  for (const auto& r : rows) probs.insert(probs.end(), r.begin(), r.end());
  return Posteriorgram(std::move(a), rows.size(), std::move(probs));
}

Posteriorgram spelled(std::shared_ptr<const Alphabet> a, const std::string& text, std::size_t frames,
                      double dominant) {
  const auto classes = a->tokenize(text);
  if (!classes) throw std::invalid_argument("cannot spell " + text);
  std::vector<lexcascade::ClassIndex> path;
  for (auto c : *classes) {
    path.push_back(c);
    path.push_back(lexcascade::kBlank);
  }
  if (path.empty()) path.push_back(lexcascade::kBlank);
  while (path.size() < frames) path.push_back(lexcascade::kBlank);
  const std::size_t n = a->size();
  const double other = (1.0 - dominant) / static_cast<double>(n - 1);
  std::vector<double> probs;
  for (auto d : path) {
    for (std::size_t c = 0; c < n; ++c) probs.push_back(c == d ? dominant : other);
  }
  return Posteriorgram(a, path.size(), std::move(probs));
}

Posteriorgram random_posteriorgram(lexcascade::RandomStream& rng, std::shared_ptr<const Alphabet> a,
                                   std::size_t frames, bool coarse) {
  const std::size_t n = a->size();
  std::vector<double> probs;
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<double> w(n);
    double sum = 0;
    for (auto& x : w) {
      x = coarse ? static_cast<double>(1 + rng.index(3)) : rng.uniform() + 1e-3;
      sum += x;
    }
    for (auto x : w) probs.push_back(x / sum);
  }
  return Posteriorgram(a, frames, std::move(probs));
}

oracle::Matrix matrix(const Posteriorgram& p) {
  return oracle::Matrix{p.frames(), p.classes(), std::vector<double>(p.data().begin(), p.data().end())};
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("lexcascade-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed: " + command);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  return q + "'";
}

}  // namespace testutil
