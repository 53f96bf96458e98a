#include "lexcascade/postgram.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lexcascade/binary_io.hpp"
#include "lexcascade/error.hpp"
#include "lexcascade/normalize.hpp"

namespace lexcascade {
namespace {

constexpr std::string_view kMagic = "PGRM";
constexpr std::uint32_t kVersion = 1;

}  // namespace

Alphabet::Alphabet(std::vector<std::string> labels) {
  labels_.reserve(labels.size() + 1);
  labels_.emplace_back();
  for (auto& label : labels) {
    if (label.empty()) throw InvariantViolation("alphabet labels must be non-empty");
    auto [it, inserted] = index_.emplace(label, static_cast<ClassIndex>(labels_.size()));
    if (!inserted) throw InvariantViolation("duplicate alphabet label '" + label + "'");
    max_label_bytes_ = std::max(max_label_bytes_, label.size());
    labels_.push_back(std::move(label));
  }
  if (labels_.size() < 2) throw InvariantViolation("alphabet needs at least one non-blank class");
}

Alphabet Alphabet::from_words(std::span<const std::string> words) {
  std::set<char32_t> scalars;
  for (const auto& w : words) {
    for (char32_t cp : utf8_to_u32(w)) scalars.insert(cp);
  }
  std::vector<std::string> labels;
  labels.reserve(scalars.size());
  for (char32_t cp : scalars) labels.push_back(u32_to_utf8(std::u32string_view(&cp, 1)));
  return Alphabet(std::move(labels));
}

std::optional<ClassIndex> Alphabet::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<ClassIndex>> Alphabet::tokenize(std::string_view word) const {
  std::vector<ClassIndex> out;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t longest = std::min(max_label_bytes_, word.size() - pos);
    bool matched = false;
    for (std::size_t len = longest; len > 0; --len) {
      if (auto c = find(word.substr(pos, len))) {
        out.push_back(*c);
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) return std::nullopt;
  }
  return out;
}

std::string Alphabet::spell(std::span<const ClassIndex> classes) const {
  std::string out;
  for (ClassIndex c : classes) out += labels_.at(c);
  return out;
}

Posteriorgram::Posteriorgram(std::shared_ptr<const Alphabet> alphabet, std::size_t frames,
                             std::vector<double> probs)
    : alphabet_(std::move(alphabet)), frames_(frames), probs_(std::move(probs)) {
  if (!alphabet_) throw InvariantViolation("posteriorgram without alphabet");
  if (frames_ == 0) throw InvariantViolation("posteriorgram needs at least one frame");
  const std::size_t c = alphabet_->size();
  if (probs_.size() != frames_ * c) throw InvariantViolation("posteriorgram size is not T*C");
  for (std::size_t t = 0; t < frames_; ++t) {
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      double v = probs_[t * c + k];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvariantViolation("posterior outside [0,1] at frame " + std::to_string(t));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw InvariantViolation("row " + std::to_string(t) + " sums to " + std::to_string(sum));
    }
  }
}

std::string encode_posteriorgram(const Posteriorgram& p) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(p.classes()));
  w.u32(static_cast<std::uint32_t>(p.frames()));
  for (const auto& label : p.alphabet().labels()) {
    w.u16(static_cast<std::uint16_t>(label.size()));
    w.bytes(label);
  }
  for (double v : p.data()) w.f32(static_cast<float>(v));
  return w.buffer();
}

Posteriorgram decode_posteriorgram(std::string_view bytes, const std::string& source) {
  ByteReader r(bytes, source);
  if (r.bytes(4) != kMagic) throw MalformedFile(source + ": bad magic");
  if (r.u32() != kVersion) throw MalformedFile(source + ": unsupported version");
  const std::uint32_t classes = r.u32();
  const std::uint32_t frames = r.u32();
  if (classes < 2) throw MalformedFile(source + ": class count below 2");
  if (frames == 0) throw MalformedFile(source + ": zero frames");

  std::vector<std::string> labels;
  labels.reserve(classes - 1);
  for (std::uint32_t c = 1; c < classes; ++c) {
    std::uint16_t len = r.u16();
    labels.emplace_back(r.bytes(len));
  }
  std::shared_ptr<const Alphabet> alphabet;
  try {
    alphabet = std::make_shared<const Alphabet>(std::move(labels));
  } catch (const InvariantViolation& e) {
    throw MalformedFile(source + ": " + e.what());
  }

  const std::uint64_t count = std::uint64_t{frames} * classes;
  if (r.remaining() != count * 4) throw MalformedFile(source + ": probability block size mismatch");
  std::vector<double> probs(count);
  for (auto& v : probs) v = r.f32();
  try {
    return Posteriorgram(std::move(alphabet), frames, std::move(probs));
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(source + ": " + e.what());
  }
}

Posteriorgram load_posteriorgram(const std::filesystem::path& path) {
  return decode_posteriorgram(read_file(path), path.string());
}

void save_posteriorgram(const Posteriorgram& p, const std::filesystem::path& path) {
  write_file_atomic(path, encode_posteriorgram(p));
}

Posteriorgram average_posteriors(std::span<const Posteriorgram> inputs) {
  if (inputs.empty()) throw InvariantViolation("average of zero posteriorgrams");
  const auto& first = inputs.front();
  for (const auto& p : inputs) {
    if (p.frames() != first.frames() || !(p.alphabet() == first.alphabet())) {
      throw ShapeMismatch("posteriorgrams differ in frame count or alphabet");
    }
  }
  // Each element is summed in ascending order so the mean does not depend on
  // the order of `inputs`.
  const std::size_t size = first.data().size();
  const double n = static_cast<double>(inputs.size());
  std::vector<double> mean(size);
  std::vector<double> column(inputs.size());
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t k = 0; k < inputs.size(); ++k) column[k] = inputs[k].data()[i];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    mean[i] = sum / n;
  }
  return Posteriorgram(first.shared_alphabet(), first.frames(), std::move(mean));
}

}  // namespace lexcascade
