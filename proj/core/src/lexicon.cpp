#include "lexcascade/lexicon.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <functional>

#include "lexcascade/binary_io.hpp"
#include "lexcascade/error.hpp"

namespace lexcascade {
namespace {

constexpr std::string_view kMagic = "LEXV";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kMinCapacity = 16;

std::uint64_t hash_key(std::string_view key) { return std::hash<std::string_view>{}(key); }

std::uint64_t fingerprint(std::uint64_t hash) { return hash >> 32; }

bool is_blank(std::string_view word) {
  return word.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace

Lexicon::Lexicon(NormalizationMode mode) : mode_(mode) { rehash(kMinCapacity); }

bool Lexicon::contains(std::string_view word) const {
  if (word.empty()) return false;
  if (mode_ == NormalizationMode::kNone) return contains_normalized(word);
  return contains_normalized(normalize(word, mode_));
}

bool Lexicon::contains_normalized(std::string_view key) const {
  if (key.empty()) return false;
  return slots_[find_slot(key, hash_key(key))] != 0;
}

std::size_t Lexicon::find_slot(std::string_view key, std::uint64_t hash) const {
  const std::uint64_t fp = fingerprint(hash);
  std::uint64_t i = hash & mask_;
  while (true) {
    const std::uint64_t slot = slots_[i];
    if (slot == 0) return i;
    if ((slot >> 32) == fp && entry((slot & 0xFFFFFFFFu) - 1) == key) return i;
    i = (i + 1) & mask_;
  }
}

bool Lexicon::insert_normalized(std::string_view key) {
  if ((size() + 1) * 2 > slots_.size()) rehash(slots_.size() * 2);
  const std::uint64_t hash = hash_key(key);
  const std::size_t i = find_slot(key, hash);
  if (slots_[i] != 0) return false;
  const std::uint64_t index = size();
  if (index >= 0xFFFFFFFFu) throw InvariantViolation("lexicon exceeds 2^32 - 1 entries");
  arena_.append(key);
  offsets_.push_back(arena_.size());
  slots_[i] = (fingerprint(hash) << 32) | (index + 1);
  return true;
}

void Lexicon::rehash(std::size_t capacity) {
  capacity = std::bit_ceil(std::max(capacity, kMinCapacity));
  slots_.assign(capacity, 0);
  mask_ = capacity - 1;
  for (std::size_t index = 0; index < size(); ++index) {
    const std::string_view key = entry(index);
    const std::uint64_t hash = hash_key(key);
    std::uint64_t i = hash & mask_;
    while (slots_[i] != 0) i = (i + 1) & mask_;
    slots_[i] = (fingerprint(hash) << 32) | (index + 1);
  }
}

std::vector<std::string_view> Lexicon::sorted_entries() const {
  std::vector<std::string_view> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(entry(i));
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Lexicon::memory_bytes() const {
  return arena_.capacity() + offsets_.capacity() * sizeof(std::uint64_t) +
         slots_.capacity() * sizeof(std::uint64_t);
}

LexiconBuilder::LexiconBuilder(NormalizationMode mode, std::size_t expected_size) : lexicon_(mode) {
  if (expected_size > 0) {
    lexicon_.rehash(expected_size * 2);
    lexicon_.offsets_.reserve(expected_size + 1);
  }
}

bool LexiconBuilder::add(std::string_view word) {
  if (word.empty() || is_blank(word)) return false;
  if (lexicon_.mode() == NormalizationMode::kNone) return lexicon_.insert_normalized(word);
  const std::string key = normalize(word, lexicon_.mode());
  if (key.empty()) return false;
  return lexicon_.insert_normalized(key);
}

bool LexiconBuilder::add_normalized(std::string_view key) {
  if (key.empty()) return false;
  return lexicon_.insert_normalized(key);
}

Lexicon LexiconBuilder::build() && {
  lexicon_.arena_.shrink_to_fit();
  lexicon_.offsets_.shrink_to_fit();
  return std::move(lexicon_);
}

Lexicon build_lexicon(std::span<const std::string> words, NormalizationMode mode) {
  LexiconBuilder builder(mode, words.size());
  for (const auto& w : words) builder.add(w);
  return std::move(builder).build();
}

Lexicon read_word_lists(std::span<const std::filesystem::path> paths, NormalizationMode mode) {
  LexiconBuilder builder(mode);
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open word list " + path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      builder.add(line);
    }
    if (in.bad()) throw IoError("cannot read word list " + path.string());
  }
  return std::move(builder).build();
}

std::string encode_lexicon(const Lexicon& lexicon) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(lexicon.mode()));
  w.u64(lexicon.size());
  for (std::string_view e : lexicon.sorted_entries()) {
    w.u32(static_cast<std::uint32_t>(e.size()));
    w.bytes(e);
  }
  return w.buffer();
}

Lexicon decode_lexicon(std::string_view bytes, const std::string& source) {
  ByteReader r(bytes, source);
  if (r.bytes(4) != kMagic) throw MalformedFile(source + ": bad magic");
  if (r.u32() != kVersion) throw MalformedFile(source + ": unsupported lexicon version");
  const std::uint8_t raw_mode = r.u8();
  if (raw_mode > static_cast<std::uint8_t>(NormalizationMode::kLowercaseStripAccents)) {
    throw MalformedFile(source + ": unknown normalization mode");
  }
  const auto mode = static_cast<NormalizationMode>(raw_mode);
  const std::uint64_t count = r.u64();
  // Every entry takes at least five bytes.
  if (count > r.remaining() / 5) throw MalformedFile(source + ": entry count exceeds file size");

  LexiconBuilder builder(mode, count);
  std::string_view previous;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string_view e = r.bytes(r.u32());
    if (e.empty()) throw MalformedFile(source + ": empty entry");
    if (i > 0 && !(previous < e)) throw MalformedFile(source + ": entries not strictly ascending");
    if (mode != NormalizationMode::kNone && normalize(e, mode) != e) {
      throw MalformedFile(source + ": entry is not normalized");
    }
    builder.add_normalized(e);
    previous = e;
  }
  if (r.remaining() != 0) throw MalformedFile(source + ": trailing bytes");
  return std::move(builder).build();
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  write_file_atomic(path, encode_lexicon(lexicon));
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  return decode_lexicon(read_file(path), path.string());
}

}  // namespace lexcascade
