#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexcascade/normalize.hpp"

namespace lexcascade {

/// Immutable set of normalized, non-empty words with O(1) membership.
///
/// Entries live back to back in one arena; an open-addressing table (linear
/// probing, load factor <= 1/2) holds a 32-bit hash fingerprint and the entry
/// index per slot, so a negative lookup usually touches a single cache line.
/// Safe to query from any number of threads.
class Lexicon {
 public:
  explicit Lexicon(NormalizationMode mode = NormalizationMode::kNone);

  /// True iff normalize(word) is an entry. The empty string is never a member.
  bool contains(std::string_view word) const;
  /// Membership of an already normalized key.
  bool contains_normalized(std::string_view key) const;

  std::size_t size() const { return offsets_.size() - 1; }
  bool empty() const { return size() == 0; }
  NormalizationMode mode() const { return mode_; }

  /// Entries in insertion order.
  std::string_view entry(std::size_t i) const {
    return std::string_view(arena_).substr(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }
  std::vector<std::string_view> sorted_entries() const;

  /// Heap bytes held by the arena, offsets and table.
  std::size_t memory_bytes() const;

 private:
  friend class LexiconBuilder;

  std::size_t find_slot(std::string_view key, std::uint64_t hash) const;
  bool insert_normalized(std::string_view key);
  void rehash(std::size_t capacity);

  NormalizationMode mode_;
  std::string arena_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint64_t> slots_;
  std::uint64_t mask_ = 0;
};

/// Accumulates raw words; normalizes, drops empty/whitespace-only words and
/// duplicates.
class LexiconBuilder {
 public:
  explicit LexiconBuilder(NormalizationMode mode, std::size_t expected_size = 0);

  /// Returns true if the word added a new entry.
  bool add(std::string_view word);
  /// Adds a key that is already in normal form (e.g. read back from a file).
  bool add_normalized(std::string_view key);
  std::size_t size() const { return lexicon_.size(); }
  Lexicon build() &&;

 private:
  Lexicon lexicon_;
};

Lexicon build_lexicon(std::span<const std::string> words, NormalizationMode mode);

/// Builds from UTF-8 word lists, one word per line. Throws IoError.
Lexicon read_word_lists(std::span<const std::filesystem::path> paths, NormalizationMode mode);

/// LEXV v1: "LEXV", u32 version = 1, u8 mode, u64 count, then `count`
/// entries in ascending byte order, each a u32 byte length and the UTF-8
/// bytes. All integers little-endian.
std::string encode_lexicon(const Lexicon& lexicon);
/// Throws MalformedFile on bad magic/version/mode, truncation, trailing
/// bytes, unsorted/duplicate/empty or non-normalized entries.
Lexicon decode_lexicon(std::string_view bytes, const std::string& source = "<memory>");

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);
Lexicon load_lexicon(const std::filesystem::path& path);

}  // namespace lexcascade
