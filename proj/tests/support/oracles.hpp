#pragma once

// Deliberately naive reference implementations used to check the library.
// None of them shares code with lexcascade beyond plain data types.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

/// Row-major T x C probabilities.
struct Matrix {
  std::size_t frames = 0;
  std::size_t classes = 0;
  std::vector<double> p;

  double at(std::size_t t, std::size_t c) const { return p[t * classes + c]; }
};

double clamped_log(double p);

/// argmax (lowest index on ties), collapse repeats, drop blanks (class 0).
std::vector<std::size_t> best_path_labels(const Matrix& m);
double best_path_score(const Matrix& m);

/// Max over every frame-level path that collapses to `labels` of the summed
/// clamped log-probabilities, found by enumerating the paths one frame at a
/// time. nullopt when no path exists.
std::optional<double> max_alignment_score(const Matrix& m, const std::vector<std::size_t>& labels);


/// Textbook Wagner-Fischer distance on code-unit vectors.
std::size_t levenshtein(const std::u32string& a, const std::u32string& b);

/// Least-squares slope by the closed form over x = 1..n.
double ols_slope_closed_form(const std::vector<double>& y);

/// POSTGRAM v1 bytes written field by field with explicit little-endian
/// packing.
std::string postgram_bytes(const std::vector<std::string>& labels, std::size_t frames,
                           const std::vector<float>& probs);

}  // namespace oracle
