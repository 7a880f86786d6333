#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsindex/error.hpp"

namespace fsindex {

/// Letter code used for anything outside the alphabet. Also terminates
/// every sequence in a ResidueStore.
inline constexpr std::uint8_t kNoLetter = 0xFF;

/// The 20 standard amino acids in NCBI matrix order.
inline constexpr std::string_view kAminoAcids = "ARNDCQEGHILKMFPSTWYV";

/// Ordered set of distinct single-character letters. Lookup is
/// case-insensitive; letters are stored upper-case.
class Alphabet {
 public:
  explicit Alphabet(std::string_view letters);

  static const Alphabet& amino_acids();

  std::size_t size() const { return letters_.size(); }
  char letter(std::size_t ordinal) const { return letters_[ordinal]; }
  std::string_view letters() const { return letters_; }

  /// Ordinal of `c`, or kNoLetter.
  std::uint8_t code(char c) const { return codes_[static_cast<unsigned char>(c)]; }
  bool contains(char c) const { return code(c) != kNoLetter; }

  /// Encodes a fragment; throws on any letter outside the alphabet.
  std::vector<std::uint8_t> encode(std::string_view text) const;
  std::string decode(std::span<const std::uint8_t> codes) const;

  bool operator==(const Alphabet& other) const { return letters_ == other.letters_; }

 private:
  std::string letters_;
  std::array<std::uint8_t, 256> codes_{};
};

/// Square integer similarity table over an alphabet.
class ScoreMatrix {
 public:
  ScoreMatrix(Alphabet alphabet, std::vector<int> cells);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_.size(); }
  int operator()(std::size_t a, std::size_t b) const { return cells_[a * size() + b]; }
  int at(char a, char b) const;
  bool is_symmetric() const;

 private:
  Alphabet alphabet_;
  std::vector<int> cells_;
};

/// Non-negative integer dissimilarity table with a zero diagonal.
///
/// `scale` records a fixed multiplier applied to every stored entry. It is 1
/// except for the average symmetrization, which stores 2 * (D(a,b)+D(b,a))/2
/// to stay integral.
class DistanceMatrix {
 public:
  DistanceMatrix(Alphabet alphabet, std::vector<int> cells, int scale = 1);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_.size(); }
  int scale() const { return scale_; }
  int operator()(std::size_t a, std::size_t b) const { return cells_[a * size() + b]; }
  int at(char a, char b) const;
  std::span<const int> row(std::size_t a) const { return {cells_.data() + a * size(), size()}; }
  bool is_symmetric() const;

 private:
  Alphabet alphabet_;
  std::vector<int> cells_;
  int scale_;
};

struct TriangleViolation {
  std::uint8_t a, b, c;
  int slack;  ///< D(a,c) - D(a,b) - D(b,c), always > 0
};

struct QuasiMetricReport {
  bool separation_ok = true;
  bool nonneg_ok = true;
  std::vector<TriangleViolation> triangle_violations;  ///< every ordered triple
  bool is_quasi_metric = true;
  bool is_symmetric = true;

  /// Violations counted once per {(a,b,c), (c,b,a)} pair. For distances
  /// derived from a symmetric score matrix the two always fail together.
  std::size_t distinct_violations() const;
};

/// Reads the NCBI substitution-matrix text layout ('#' comments, a header
/// row of letters, one labelled row per letter) and keeps only the letters
/// of `alphabet`, in alphabet order.
ScoreMatrix parse_score_matrix(std::string_view text, const Alphabet& alphabet);
ScoreMatrix load_score_matrix(const std::string& path, const Alphabet& alphabet);

/// D(a,b) = S(a,a) - S(a,b). Throws if any entry comes out negative.
DistanceMatrix distance_from_score(const ScoreMatrix& scores);

QuasiMetricReport check_quasi_metric(const DistanceMatrix& distances);

/// Sum of diagonal scores along `fragment` (alphabet codes).
long weight(const ScoreMatrix& scores, std::span<const std::uint8_t> fragment);

/// D(a,b) + S(b,b) == D(b,a) + S(a,a) for every pair.
bool is_coweightable(const ScoreMatrix& scores, const DistanceMatrix& distances);

enum class Symmetrization { average, maximum };

/// average: (D(a,b)+D(b,a)) stored with scale 2. maximum: max(D(a,b), D(b,a)).
DistanceMatrix symmetrize(const DistanceMatrix& distances, Symmetrization mode);

}  // namespace fsindex
