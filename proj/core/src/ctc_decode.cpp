#include "lexcascade/ctc_decode.hpp"

#include <algorithm>
#include <cmath>

#include "lexcascade/error.hpp"

namespace lexcascade {
namespace {

std::vector<double> log_table(const Posteriorgram& p) {
  std::vector<double> out(p.data().size());
  std::transform(p.data().begin(), p.data().end(), out.begin(), clamped_log);
  return out;
}

// One step of the state-major max-product CTC recurrence. Given the rows of
// the previous blank state and previous label state over all frames, fills
// the rows of the next label state and the blank state that follows it.
// `prev_label` is null for the first label of a word.
bool extend(std::span<const double> lp, std::size_t frames, std::size_t classes,
            const double* prev_blank, const double* prev_label, ClassIndex label, bool allow_skip,
            double* out_label, double* out_blank) {
  out_label[0] = prev_label == nullptr ? lp[label] : kNegInf;
  out_blank[0] = kNegInf;
  for (std::size_t t = 1; t < frames; ++t) {
    double best = std::max(out_label[t - 1], prev_blank[t - 1]);
    if (allow_skip && prev_label != nullptr) best = std::max(best, prev_label[t - 1]);
    out_label[t] = lp[t * classes + label] + best;
    out_blank[t] = lp[t * classes + kBlank] + std::max(out_blank[t - 1], out_label[t - 1]);
  }
  // The blank row is reachable only through the label row.
  return std::any_of(out_label, out_label + frames, [](double v) { return v != kNegInf; });
}

void leading_blanks(std::span<const double> lp, std::size_t frames, std::size_t classes, double* out) {
  out[0] = lp[kBlank];
  for (std::size_t t = 1; t < frames; ++t) out[t] = out[t - 1] + lp[t * classes + kBlank];
}

double word_score(std::span<const double> lp, std::size_t frames, std::size_t classes,
                  std::span<const ClassIndex> labels, std::vector<double>& scratch) {
  if (frames == 0 || min_ctc_frames(labels) > frames) return kNegInf;
  scratch.assign(frames * 4, kNegInf);
  double* blank = scratch.data();
  double* label_row = scratch.data() + frames;
  double* next_label = scratch.data() + 2 * frames;
  double* next_blank = scratch.data() + 3 * frames;
  leading_blanks(lp, frames, classes, blank);
  if (labels.empty()) return blank[frames - 1];
  const double* prev_label = nullptr;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const bool skip = k > 0 && labels[k] != labels[k - 1];
    extend(lp, frames, classes, blank, prev_label, labels[k], skip, next_label, next_blank);
    std::swap(label_row, next_label);
    std::swap(blank, next_blank);
    prev_label = label_row;
  }
  return std::max(label_row[frames - 1], blank[frames - 1]);
}

bool better(double score, const std::string& text, double best_score, const std::string* best_text) {
  if (best_text == nullptr) return true;
  if (score != best_score) return score > best_score;
  return text < *best_text;
}

}  // namespace

double clamped_log(double p) { return std::log(std::max(p, kProbabilityFloor)); }

std::vector<ClassIndex> frame_argmax(const Posteriorgram& p) {
  std::vector<ClassIndex> out(p.frames());
  for (std::size_t t = 0; t < p.frames(); ++t) {
    auto row = p.row(t);
    out[t] = static_cast<ClassIndex>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<ClassIndex> collapse_path(std::span<const ClassIndex> path) {
  std::vector<ClassIndex> out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (t > 0 && path[t] == path[t - 1]) continue;
    if (path[t] != kBlank) out.push_back(path[t]);
  }
  return out;
}

Hypothesis best_path_decode(const Posteriorgram& p, std::optional<std::size_t> classifier) {
  const auto path = frame_argmax(p);
  double score = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t) score += clamped_log(p.at(t, path[t]));
  return Hypothesis{p.alphabet().spell(collapse_path(path)), score, classifier};
}

std::size_t min_ctc_frames(std::span<const ClassIndex> labels) {
  std::size_t n = labels.size();
  for (std::size_t k = 1; k < labels.size(); ++k) {
    if (labels[k] == labels[k - 1]) ++n;
  }
  return n;
}

double ctc_max_path_score(const Posteriorgram& p, std::span<const ClassIndex> labels) {
  const auto lp = log_table(p);
  std::vector<double> scratch;
  return word_score(lp, p.frames(), p.classes(), labels, scratch);
}

LexiconScorer::LexiconScorer(const Lexicon& lexicon, std::shared_ptr<const Alphabet> alphabet,
                             ScorerOptions options)
    : alphabet_(std::move(alphabet)), options_(options) {
  for (std::string_view e : lexicon.sorted_entries()) {
    if (auto labels = alphabet_->tokenize(e)) {
      entries_.push_back(Entry{std::string(e), std::move(*labels)});
    } else {
      ++unscoreable_;
    }
  }
  if (!options_.share_prefixes) return;

  trie_.emplace_back();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::uint32_t node = 0;
    for (ClassIndex label : entries_[i].labels) {
      std::uint32_t next = 0;
      for (std::uint32_t child : trie_[node].children) {
        if (trie_[child].label == label) next = child;
      }
      if (next == 0) {
        next = static_cast<std::uint32_t>(trie_.size());
        trie_.push_back(TrieNode{label, {}, -1});
        trie_[node].children.push_back(next);
      }
      node = next;
    }
    trie_[node].entry = static_cast<std::int64_t>(i);
    max_depth_ = std::max(max_depth_, entries_[i].labels.size());
  }
}

Hypothesis LexiconScorer::decode(const Posteriorgram& p) const {
  if (!(p.alphabet() == *alphabet_)) throw ShapeMismatch("posteriorgram alphabet differs from scorer alphabet");
  const auto lp = log_table(p);
  return options_.share_prefixes ? decode_trie(p, lp) : decode_naive(p, lp);
}

Hypothesis LexiconScorer::decode_naive(const Posteriorgram& p, std::span<const double> lp) const {
  std::vector<double> scratch;
  const std::string* best_text = nullptr;
  double best_score = kNegInf;
  for (const auto& e : entries_) {
    const double score = word_score(lp, p.frames(), p.classes(), e.labels, scratch);
    if (score == kNegInf) continue;
    if (better(score, e.text, best_score, best_text)) {
      best_score = score;
      best_text = &e.text;
    }
  }
  if (best_text == nullptr) throw NoFeasibleWord("no lexicon entry fits in " + std::to_string(p.frames()) + " frames");
  return Hypothesis{*best_text, best_score, std::nullopt};
}

Hypothesis LexiconScorer::decode_trie(const Posteriorgram& p, std::span<const double> lp) const {
  const std::size_t frames = p.frames();
  const std::size_t classes = p.classes();
  // rows[d] holds the label row and blank row after d labels.
  std::vector<std::vector<double>> rows(max_depth_ + 1, std::vector<double>(2 * frames, kNegInf));
  leading_blanks(lp, frames, classes, rows[0].data() + frames);

  const std::string* best_text = nullptr;
  double best_score = kNegInf;

  struct Frame {
    std::uint32_t node;
    std::size_t depth;
  };
  std::vector<Frame> stack;
  for (auto it = trie_[0].children.rbegin(); it != trie_[0].children.rend(); ++it) stack.push_back({*it, 1});

  std::vector<ClassIndex> path(max_depth_ + 1, kBlank);
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const TrieNode& node = trie_[f.node];
    path[f.depth] = node.label;
    const auto& prev = rows[f.depth - 1];
    auto& cur = rows[f.depth];
    const bool first = f.depth == 1;
    const bool skip = !first && node.label != path[f.depth - 1];
    const bool alive = extend(lp, frames, classes, prev.data() + frames, first ? nullptr : prev.data(),
                              node.label, skip, cur.data(), cur.data() + frames);
    if (!alive) continue;
    if (node.entry >= 0) {
      const double score = std::max(cur[frames - 1], cur[2 * frames - 1]);
      const auto& text = entries_[static_cast<std::size_t>(node.entry)].text;
      if (score != kNegInf && better(score, text, best_score, best_text)) {
        best_score = score;
        best_text = &text;
      }
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back({*it, f.depth + 1});
  }
  if (best_text == nullptr) throw NoFeasibleWord("no lexicon entry fits in " + std::to_string(frames) + " frames");
  return Hypothesis{*best_text, best_score, std::nullopt};
}

Hypothesis viterbi_lexicon_decode(const Posteriorgram& p, const Lexicon& lexicon, ScorerOptions options) {
  return LexiconScorer(lexicon, p.shared_alphabet(), options).decode(p);
}

}  // namespace lexcascade
