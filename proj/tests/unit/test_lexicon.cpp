#include <doctest.h>

#include <unordered_set>

#include "helpers.hpp"
#include "lexcascade/error.hpp"
#include "lexcascade/lexicon.hpp"
#include "lexcascade/normalize.hpp"

using namespace lexcascade;

namespace {

std::string random_word(RandomStream& rng, std::size_t max_len, const std::string& chars = "abcdefgh") {
  std::string s;
  for (std::size_t i = 0, n = 1 + rng.index(max_len); i < n; ++i) s += chars[rng.index(chars.size())];
  return s;
}

std::string le32(std::uint32_t v) {
  std::string s;
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  return s;
}

std::string lexv(std::uint8_t mode, const std::vector<std::string>& entries, std::uint32_t version = 1) {
  std::string s = "LEXV" + le32(version);
  s.push_back(static_cast<char>(mode));
  s += le32(static_cast<std::uint32_t>(entries.size())) + le32(0);
  for (const auto& e : entries) s += le32(static_cast<std::uint32_t>(e.size())) + e;
  return s;
}

}  // namespace

TEST_CASE("normalization modes") {
  CHECK(normalize("Été", NormalizationMode::kNone) == "Été");
  CHECK(normalize("Je", NormalizationMode::kLowercase) == "je");
  CHECK(normalize("ÉTÉ", NormalizationMode::kLowercase) == "été");
  CHECK(normalize("Été", NormalizationMode::kLowercaseStripAccents) == "ete");
  CHECK(normalize("garçon", NormalizationMode::kLowercaseStripAccents) == "garcon");
  CHECK(normalize("L'AÎNÉ-Œuvre", NormalizationMode::kLowercaseStripAccents) == "l'aine-œuvre");
  // folding alone does not compose; accent stripping sees both spellings alike
  CHECK(normalize("E\xcc\x81", NormalizationMode::kLowercase) == "e\xcc\x81");
  CHECK(normalize("E\xcc\x81", NormalizationMode::kLowercaseStripAccents) == "e");
  CHECK(normalize("\xc4\xb0le", NormalizationMode::kLowercaseStripAccents) == "ile");
  CHECK(normalize("a\xff", NormalizationMode::kLowercase) == "a\xef\xbf\xbd");
  CHECK(to_string(NormalizationMode::kLowercaseStripAccents) == "lower-noaccents");
  CHECK(parse_normalization("lower") == NormalizationMode::kLowercase);
  CHECK_FALSE(parse_normalization("upper"));
}

TEST_CASE("normalization is idempotent") {
  RandomStream rng(4);
  const std::string chars[] = {"a", "Z", "é", "É", "ç", "Œ", "ß", "'", "-", "\xcc\x81", "İ", "ﬁ"};
  for (int i = 0; i < 500; ++i) {
    std::string w;
    for (std::size_t k = 0, n = rng.index(8); k < n; ++k) w += chars[rng.index(std::size(chars))];
    for (auto mode : {NormalizationMode::kNone, NormalizationMode::kLowercase,
                      NormalizationMode::kLowercaseStripAccents}) {
      const auto once = normalize(w, mode);
      CHECK(normalize(once, mode) == once);
    }
  }
}

TEST_CASE("build deduplicates under normalization") {
  std::vector<std::string> words{"Je", "je", "demander"};
  auto lex = build_lexicon(words, NormalizationMode::kLowercase);
  CHECK(lex.size() == 2);
  CHECK(lex.contains("JE"));
  CHECK(lex.contains("demander"));
  CHECK_FALSE(lex.contains(""));
  CHECK_FALSE(lex.contains("demande"));

  auto raw = build_lexicon(words, NormalizationMode::kNone);
  CHECK(raw.size() == 3);
  CHECK_FALSE(raw.contains("JE"));

  auto empty = build_lexicon(std::vector<std::string>{}, NormalizationMode::kNone);
  CHECK(empty.size() == 0);
  CHECK_FALSE(empty.contains("a"));
  CHECK_FALSE(empty.contains(""));

  auto blanks = build_lexicon(std::vector<std::string>{"", "  ", "\t", "a"}, NormalizationMode::kNone);
  CHECK(blanks.size() == 1);
}

TEST_CASE("membership agrees with a standard set") {
  RandomStream rng(6);
  std::vector<std::string> words;
  std::unordered_set<std::string> reference;
  for (int i = 0; i < 20000; ++i) {
    words.push_back(random_word(rng, 7));
    reference.insert(words.back());
  }
  auto lex = build_lexicon(words, NormalizationMode::kNone);
  CHECK(lex.size() == reference.size());
  for (int i = 0; i < 20000; ++i) {
    const auto q = random_word(rng, 8);
    CHECK(lex.contains(q) == (reference.count(q) == 1));
  }
}

TEST_CASE("a larger lexicon contains everything a smaller one does") {
  RandomStream rng(7);
  std::vector<std::string> small, large;
  for (int i = 0; i < 3000; ++i) {
    small.push_back(random_word(rng, 6));
    large.push_back(small.back());
    large.push_back(random_word(rng, 6));
  }
  auto l1 = build_lexicon(small, NormalizationMode::kLowercase);
  auto l2 = build_lexicon(large, NormalizationMode::kLowercase);
  for (int i = 0; i < 20000; ++i) {
    const auto q = random_word(rng, 6, "abcdefghAB");
    if (l1.contains(q)) CHECK(l2.contains(q));
  }
}

TEST_CASE("LEXV layout") {
  auto lex = build_lexicon(std::vector<std::string>{"b", "A", "ab"}, NormalizationMode::kLowercase);
  CHECK(encode_lexicon(lex) == lexv(1, {"a", "ab", "b"}));
  auto back = decode_lexicon(encode_lexicon(lex));
  CHECK(back.mode() == NormalizationMode::kLowercase);
  CHECK(back.size() == 3);
  for (const char* w : {"a", "ab", "b", "B"}) CHECK(back.contains(w));
  for (const char* w : {"c", "ba", ""}) CHECK_FALSE(back.contains(w));
}

TEST_CASE("LEXV decoding rejects malformed input") {
  CHECK_NOTHROW(decode_lexicon(lexv(0, {"a", "b"})));
  CHECK_THROWS_AS(decode_lexicon(lexv(0, {"a"}, 2)), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon(lexv(7, {"a"})), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon("LEXX" + lexv(0, {}).substr(4)), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon(lexv(0, {"b", "a"})), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon(lexv(0, {"a", "a"})), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon(lexv(0, {""})), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon(lexv(1, {"A"})), MalformedFile);
  CHECK_THROWS_AS(decode_lexicon(lexv(0, {"a"}) + "x"), MalformedFile);
  const auto good = lexv(0, {"abc"});
  CHECK_THROWS_AS(decode_lexicon(good.substr(0, good.size() - 1)), MalformedFile);
  std::string huge = lexv(0, {});
  huge[9] = '\xff';  // count far beyond the bytes present
  CHECK_THROWS_AS(decode_lexicon(huge), MalformedFile);
}

TEST_CASE("files round trip") {
  testutil::TempDir dir("lex");
  RandomStream rng(8);
  std::vector<std::string> words;
  for (int i = 0; i < 1'000'000; ++i) words.push_back(random_word(rng, 12, "abcdefghijklmnopqrstuvwxyz"));
  auto lex = build_lexicon(words, NormalizationMode::kNone);
  save_lexicon(lex, dir / "big.lexv");
  auto back = load_lexicon(dir / "big.lexv");
  CHECK(back.size() == lex.size());
  CHECK(back.sorted_entries() == lex.sorted_entries());

  CHECK_THROWS_AS(load_lexicon(dir / "missing.lexv"), IoError);
  CHECK_THROWS_AS(save_lexicon(lex, dir.path() / "no" / "such" / "dir" / "x.lexv"), IoError);
}

TEST_CASE("word lists") {
  testutil::TempDir dir("words");
  testutil::write_text(dir / "a.txt", "Chat\r\nchien\n\n  \nÉté\n");
  testutil::write_text(dir / "b.txt", "chat\nnuit");
  std::vector<std::filesystem::path> paths{dir / "a.txt", dir / "b.txt"};
  auto lex = read_word_lists(paths, NormalizationMode::kLowercaseStripAccents);
  CHECK(lex.size() == 4);
  CHECK(lex.contains("ETE"));
  CHECK(lex.contains("chat"));
  std::vector<std::filesystem::path> missing{dir / "nope.txt"};
  CHECK_THROWS_AS(read_word_lists(missing, NormalizationMode::kNone), IoError);
}
