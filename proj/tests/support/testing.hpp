#pragma once

// Shared fixtures and brute-force oracles. The oracles work on plain strings
// and integer tables so they share no code with the index.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fsindex/alphabet.hpp"
#include "fsindex/fsindex.hpp"
#include "fsindex/ingest.hpp"
#include "fsindex/partition.hpp"
#include "fsindex/query.hpp"

namespace fsindex::testing {

/// Example score matrix over ABCD.
inline const std::vector<std::vector<int>>& toy_scores() {
  static const std::vector<std::vector<int>> s = {
      {5, -3, 2, -2}, {-3, 5, -4, 3}, {2, -4, 6, -4}, {-2, 3, -4, 6}};
  return s;
}

inline std::string toy_matrix_text() {
  return "# example matrix\n"
         "   A  B  C  D\n"
         "A  5 -3  2 -2\n"
         "B -3  5 -4  3\n"
         "C  2 -4  6 -4\n"
         "D -2  3 -4  6\n";
}

inline ScoreMatrix toy_matrix() {
  std::vector<int> cells;
  for (const auto& row : toy_scores()) cells.insert(cells.end(), row.begin(), row.end());
  return ScoreMatrix(Alphabet("ABCD"), cells);
}

/// alpha = {A, C}, beta = {B, D} at each of three positions.
inline PartitionScheme toy_scheme(std::size_t m = 3) { return parse_partition("AC,BD", Alphabet("ABCD"), m); }

/// Every word of length m over `letters`, in lexicographic order.
inline std::vector<std::string> all_words(const std::string& letters, std::size_t m) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::string> next;
    for (const auto& w : out)
      for (char c : letters) next.push_back(w + c);
    out.swap(next);
  }
  return out;
}

/// One FASTA record per word.
inline std::shared_ptr<const SequenceDB> words_db(const std::vector<std::string>& words) {
  auto db = std::make_shared<SequenceDB>();
  for (std::size_t i = 0; i < words.size(); ++i) db->add("w" + std::to_string(i), words[i]);
  return db;
}

/// Hand-rolled table lookup: cost[pos][letter index in `letters`].
using CostTable = std::vector<std::vector<std::int64_t>>;

inline std::int64_t brute_value(const CostTable& f, const std::string& letters, const std::string& word) {
  std::int64_t v = 0;
  for (std::size_t i = 0; i < f.size(); ++i) v += f[i][letters.find(word[i])];
  return v;
}

/// D(a,b) = S(a,a) - S(a,b), rows from a square int table.
inline CostTable distance_rows(const std::vector<std::vector<int>>& s, const std::string& letters,
                               const std::string& center) {
  CostTable f;
  for (char c : center) {
    std::size_t a = letters.find(c);
    std::vector<std::int64_t> col;
    for (std::size_t b = 0; b < letters.size(); ++b) col.push_back(s[a][a] - s[a][b]);
    f.push_back(col);
  }
  return f;
}

inline QueryFunction to_query(const Alphabet& alphabet, const CostTable& f) {
  std::vector<std::vector<Value>> cols(f.begin(), f.end());
  return pssm_query(alphabet, cols);
}

/// (sequence, offset, value) triples of every window of length f.size()
/// whose letters are all in `letters` and whose value is <= eps.
using Triple = std::tuple<std::uint32_t, std::uint32_t, std::int64_t>;

inline std::vector<Triple> brute_windows(const SequenceDB& db, const std::string& letters, const CostTable& f,
                                         std::int64_t eps) {
  std::vector<Triple> out;
  const std::size_t L = f.size();
  for (std::size_t s = 0; s < db.size(); ++s) {
    const auto& r = db[s].residues;
    for (std::size_t p = 0; p + L <= r.size(); ++p) {
      std::string w = r.substr(p, L);
      if (w.find_first_not_of(letters) != std::string::npos) continue;
      auto v = brute_value(f, letters, w);
      if (v <= eps) out.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p), v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Triple> triples(const HitList& hits) {
  std::vector<Triple> out;
  for (const auto& h : hits) out.emplace_back(h.ref.sequence, h.ref.offset, h.value);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::int64_t> values(const HitList& hits) {
  std::vector<std::int64_t> v;
  for (const auto& h : hits) v.push_back(h.value);
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<std::int64_t> values(const std::vector<Triple>& t) {
  std::vector<std::int64_t> v;
  for (const auto& x : t) v.push_back(std::get<2>(x));
  std::sort(v.begin(), v.end());
  return v;
}

/// Random sequences over `letters`, occasionally with a foreign letter 'X'.
inline std::shared_ptr<const SequenceDB> random_db(std::mt19937_64& rng, const std::string& letters, std::size_t count,
                                                   std::size_t min_len, std::size_t max_len, double bad_rate = 0.0) {
  auto db = std::make_shared<SequenceDB>();
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < count; ++i) {
    std::string s;
    std::size_t n = len(rng);
    for (std::size_t j = 0; j < n; ++j) s.push_back(u(rng) < bad_rate ? 'X' : letters[pick(rng)]);
    db->add("r" + std::to_string(i), s);
  }
  return db;
}

/// Random partition spec: each position gets 2..max_clusters non-empty
/// clusters over `letters`.
inline std::string random_partition_spec(std::mt19937_64& rng, const std::string& letters, std::size_t m,
                                         std::size_t max_clusters) {
  std::string spec;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(2, std::min(max_clusters, letters.size() - 1))(rng);
    std::string shuffled = letters;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<std::string> clusters(k);
    for (std::size_t c = 0; c < k; ++c) clusters[c].push_back(shuffled[c]);
    for (std::size_t c = k; c < shuffled.size(); ++c)
      clusters[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)].push_back(shuffled[c]);
    if (i) spec += ';';
    for (std::size_t c = 0; c < k; ++c) spec += (c ? "," : "") + clusters[c];
  }
  return spec;
}

/// Random symmetric score matrix with a dominant diagonal so that the
/// derived distances are non-negative.
inline std::vector<std::vector<int>> random_symmetric_scores(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::vector<int>> s(n, std::vector<int>(n));
  std::uniform_int_distribution<int> off(-4, 3), diag(4, 11);
  for (std::size_t a = 0; a < n; ++a) {
    s[a][a] = diag(rng);
    for (std::size_t b = 0; b < a; ++b) s[a][b] = s[b][a] = off(rng);
  }
  return s;
}

inline ScoreMatrix to_matrix(const std::string& letters, const std::vector<std::vector<int>>& s) {
  std::vector<int> cells;
  for (const auto& row : s) cells.insert(cells.end(), row.begin(), row.end());
  return ScoreMatrix(Alphabet(letters), cells);
}

inline CostTable random_costs(std::mt19937_64& rng, std::size_t m, std::size_t sigma, int lo, int hi) {
  CostTable f(m, std::vector<std::int64_t>(sigma));
  std::uniform_int_distribution<int> d(lo, hi);
  for (auto& col : f)
    for (auto& v : col) v = d(rng);
  return f;
}

inline std::string path_in_data(const std::string& rel) { return std::string(FSINDEX_TEST_DATA_DIR) + "/" + rel; }

}  // namespace fsindex::testing
