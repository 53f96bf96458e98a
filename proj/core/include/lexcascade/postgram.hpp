#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexcascade {

using ClassIndex = std::uint32_t;

/// Class 0 is the CTC blank ("joker") and has no label.
inline constexpr ClassIndex kBlank = 0;

/// Row sums of a posteriorgram must be within this distance of 1.
inline constexpr double kRowSumTolerance = 1e-4;

/// Ordered class labels of a sequence classifier. Immutable.
class Alphabet {
 public:
  /// `labels` are the labels of classes 1..C-1; the blank is implicit.
  /// Throws InvariantViolation on empty, duplicate or missing labels.
  explicit Alphabet(std::vector<std::string> labels);

  /// Alphabet whose labels are the distinct scalar values of `words`, sorted.
  static Alphabet from_words(std::span<const std::string> words);

  /// Class count C, blank included.
  std::size_t size() const { return labels_.size(); }
  const std::string& label(ClassIndex c) const { return labels_.at(c); }
  std::span<const std::string> labels() const { return std::span(labels_).subspan(1); }

  std::optional<ClassIndex> find(std::string_view label) const;

  /// Splits `word` into class indices by greedy longest label match. Returns
  /// nullopt when some part of the word matches no label.
  std::optional<std::vector<ClassIndex>> tokenize(std::string_view word) const;

  /// Concatenated labels of `classes` (blank contributes nothing).
  std::string spell(std::span<const ClassIndex> classes) const;

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;  // labels_[0] == "" (blank)
  std::unordered_map<std::string, ClassIndex> index_;
  std::size_t max_label_bytes_ = 0;
};

/// T x C matrix of per-frame class posteriors, row-major and time-major.
/// Immutable after construction; every row is a probability distribution.
class Posteriorgram {
 public:
  /// Throws InvariantViolation if T == 0, the size is not T*C, an entry is
  /// outside [0, 1] or a row sum is further than kRowSumTolerance from 1.
  Posteriorgram(std::shared_ptr<const Alphabet> alphabet, std::size_t frames, std::vector<double> probs);

  std::size_t frames() const { return frames_; }
  std::size_t classes() const { return alphabet_->size(); }
  const Alphabet& alphabet() const { return *alphabet_; }
  const std::shared_ptr<const Alphabet>& shared_alphabet() const { return alphabet_; }

  std::span<const double> row(std::size_t t) const {
    return std::span(probs_).subspan(t * classes(), classes());
  }
  double at(std::size_t t, ClassIndex c) const { return probs_[t * classes() + c]; }
  std::span<const double> data() const { return probs_; }

  friend bool operator==(const Posteriorgram& a, const Posteriorgram& b) {
    return a.frames_ == b.frames_ && *a.alphabet_ == *b.alphabet_ && a.probs_ == b.probs_;
  }

 private:
  std::shared_ptr<const Alphabet> alphabet_;
  std::size_t frames_;
  std::vector<double> probs_;
};

/// POSTGRAM v1 encoding. Probabilities are narrowed to float32, so a round
/// trip is exact for posteriorgrams whose entries are float32 values (which
/// includes everything produced by decode_posteriorgram).
std::string encode_posteriorgram(const Posteriorgram& p);
Posteriorgram decode_posteriorgram(std::string_view bytes, const std::string& source = "<memory>");

/// Throws IoError, MalformedFile or InvariantViolation.
Posteriorgram load_posteriorgram(const std::filesystem::path& path);
/// Throws IoError.
void save_posteriorgram(const Posteriorgram& p, const std::filesystem::path& path);

/// Element-wise mean. Throws ShapeMismatch when inputs disagree on alphabet
/// or frame count, InvariantViolation when `inputs` is empty.
Posteriorgram average_posteriors(std::span<const Posteriorgram> inputs);

}  // namespace lexcascade
