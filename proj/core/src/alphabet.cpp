#include "fsindex/alphabet.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fsindex {

namespace {

char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view token, int& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

}  // namespace

Alphabet::Alphabet(std::string_view letters) {
  codes_.fill(kNoLetter);
  if (letters.empty()) throw Error("alphabet is empty");
  if (letters.size() >= kNoLetter) throw Error("alphabet too large");
  for (char raw : letters) {
    char c = upper(raw);
    if (!std::isgraph(static_cast<unsigned char>(c)))
      throw Error("alphabet letters must be printable");
    if (codes_[static_cast<unsigned char>(c)] != kNoLetter)
      throw Error(std::string("duplicate alphabet letter '") + c + "'");
    auto ordinal = static_cast<std::uint8_t>(letters_.size());
    codes_[static_cast<unsigned char>(c)] = ordinal;
    codes_[static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(c)))] = ordinal;
    letters_.push_back(c);
  }
}

const Alphabet& Alphabet::amino_acids() {
  static const Alphabet standard(kAminoAcids);
  return standard;
}

std::vector<std::uint8_t> Alphabet::encode(std::string_view text) const {
  std::vector<std::uint8_t> out;
  out.reserve(text.size());
  for (char c : text) {
    std::uint8_t k = code(c);
    if (k == kNoLetter) throw Error(std::string("letter '") + c + "' is not in alphabet " + letters_);
    out.push_back(k);
  }
  return out;
}

std::string Alphabet::decode(std::span<const std::uint8_t> codes) const {
  std::string out;
  out.reserve(codes.size());
  for (auto k : codes) out.push_back(k < size() ? letters_[k] : 'X');
  return out;
}

ScoreMatrix::ScoreMatrix(Alphabet alphabet, std::vector<int> cells)
    : alphabet_(std::move(alphabet)), cells_(std::move(cells)) {
  if (cells_.size() != size() * size()) throw Error("score matrix must be square over its alphabet");
}

int ScoreMatrix::at(char a, char b) const {
  auto x = alphabet_.code(a), y = alphabet_.code(b);
  if (x == kNoLetter || y == kNoLetter) throw Error("letter not in score matrix alphabet");
  return (*this)(x, y);
}

bool ScoreMatrix::is_symmetric() const {
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = a + 1; b < size(); ++b)
      if ((*this)(a, b) != (*this)(b, a)) return false;
  return true;
}

DistanceMatrix::DistanceMatrix(Alphabet alphabet, std::vector<int> cells, int scale)
    : alphabet_(std::move(alphabet)), cells_(std::move(cells)), scale_(scale) {
  if (cells_.size() != size() * size()) throw Error("distance matrix must be square over its alphabet");
}

int DistanceMatrix::at(char a, char b) const {
  auto x = alphabet_.code(a), y = alphabet_.code(b);
  if (x == kNoLetter || y == kNoLetter) throw Error("letter not in distance matrix alphabet");
  return (*this)(x, y);
}

bool DistanceMatrix::is_symmetric() const {
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = a + 1; b < size(); ++b)
      if ((*this)(a, b) != (*this)(b, a)) return false;
  return true;
}

std::size_t QuasiMetricReport::distinct_violations() const {
  std::size_t count = 0;
  for (const auto& v : triangle_violations) {
    if (v.a < v.c) {
      ++count;
      continue;
    }
    // (a,b,c) with a > c counts only when its mirror (c,b,a) is not listed.
    bool mirrored = std::any_of(triangle_violations.begin(), triangle_violations.end(),
                                [&](const TriangleViolation& w) { return w.a == v.c && w.b == v.b && w.c == v.a; });
    if (!mirrored) ++count;
  }
  return count;
}

namespace {

// Fixed-width files can fuse adjacent columns, e.g. "-2-10".
std::vector<std::string_view> split_fused(const std::vector<std::string_view>& tokens) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string_view t = tokens[i];
    std::size_t start = 0;
    if (i == 0) {
      if (t.size() < 2 || (t[1] != '-' && t[1] != '+' && !std::isdigit(static_cast<unsigned char>(t[1])))) {
        out.push_back(t);
        continue;
      }
      out.push_back(t.substr(0, 1));
      t = t.substr(1);
    }
    for (std::size_t j = 1; j < t.size(); ++j)
      if ((t[j] == '-' || t[j] == '+') && std::isdigit(static_cast<unsigned char>(t[j - 1]))) {
        out.push_back(t.substr(start, j - start));
        start = j;
      }
    out.push_back(t.substr(start));
  }
  return out;
}

}  // namespace

ScoreMatrix parse_score_matrix(std::string_view text, const Alphabet& alphabet) {
  std::vector<std::string_view> header;
  std::vector<std::vector<int>> rows;
  std::vector<char> labels;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;

    if (header.empty()) {
      for (auto t : tokens)
        if (t.size() != 1) throw Error("matrix line " + std::to_string(line_no) + ": malformed header token '" + std::string(t) + "'");
      header = tokens;
      continue;
    }
    tokens = split_fused(tokens);
    if (tokens.front().size() != 1)
      throw Error("matrix line " + std::to_string(line_no) + ": row label must be a single letter");
    if (tokens.size() != header.size() + 1)
      throw Error("matrix line " + std::to_string(line_no) + ": non-square body (expected " +
                  std::to_string(header.size()) + " values, got " + std::to_string(tokens.size() - 1) + ")");
    std::vector<int> row;
    row.reserve(header.size());
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      int v = 0;
      if (!parse_int(tokens[i], v))
        throw Error("matrix line " + std::to_string(line_no) + ": non-integer entry '" + std::string(tokens[i]) + "'");
      row.push_back(v);
    }
    labels.push_back(upper(tokens.front().front()));
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw Error("matrix has no header row");
  if (rows.size() != header.size())
    throw Error("non-square matrix: " + std::to_string(header.size()) + " columns but " + std::to_string(rows.size()) + " rows");

  auto column_of = [&](char c) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (upper(header[i].front()) == c) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  auto row_of = [&](char c) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };

  const std::size_t n = alphabet.size();
  std::vector<std::ptrdiff_t> col(n), row(n);
  for (std::size_t a = 0; a < n; ++a) {
    char c = alphabet.letter(a);
    col[a] = column_of(c);
    row[a] = row_of(c);
    if (col[a] < 0 || row[a] < 0) throw Error(std::string("matrix is missing letter '") + c + "'");
  }
  std::vector<int> cells(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) cells[a * n + b] = rows[static_cast<std::size_t>(row[a])][static_cast<std::size_t>(col[b])];
  return ScoreMatrix(alphabet, std::move(cells));
}

ScoreMatrix load_score_matrix(const std::string& path, const Alphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_score_matrix(buffer.str(), alphabet);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

DistanceMatrix distance_from_score(const ScoreMatrix& scores) {
  const std::size_t n = scores.size();
  std::vector<int> cells(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      int d = scores(a, a) - scores(a, b);
      if (d < 0)
        throw Error(std::string("S(") + scores.alphabet().letter(a) + "," + scores.alphabet().letter(b) +
                    ") exceeds S(" + scores.alphabet().letter(a) + "," + scores.alphabet().letter(a) +
                    "): distance transform undefined");
      cells[a * n + b] = d;
    }
  }
  return DistanceMatrix(scores.alphabet(), std::move(cells));
}

QuasiMetricReport check_quasi_metric(const DistanceMatrix& d) {
  QuasiMetricReport report;
  const std::size_t n = d.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (d(a, b) < 0) report.nonneg_ok = false;
      bool both_zero = d(a, b) == 0 && d(b, a) == 0;
      if ((a == b) != both_zero) report.separation_ok = false;
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        int slack = d(a, c) - d(a, b) - d(b, c);
        if (slack > 0)
          report.triangle_violations.push_back(
              {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b), static_cast<std::uint8_t>(c), slack});
      }
  report.is_symmetric = d.is_symmetric();
  report.is_quasi_metric = report.separation_ok && report.nonneg_ok && report.triangle_violations.empty();
  return report;
}

long weight(const ScoreMatrix& scores, std::span<const std::uint8_t> fragment) {
  long total = 0;
  for (auto a : fragment) total += scores(a, a);
  return total;
}

bool is_coweightable(const ScoreMatrix& s, const DistanceMatrix& d) {
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b)
      if (d(a, b) + s(b, b) != d(b, a) + s(a, a)) return false;
  return true;
}

DistanceMatrix symmetrize(const DistanceMatrix& d, Symmetrization mode) {
  const std::size_t n = d.size();
  std::vector<int> cells(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      cells[a * n + b] = mode == Symmetrization::average ? d(a, b) + d(b, a) : std::max(d(a, b), d(b, a));
  return DistanceMatrix(d.alphabet(), std::move(cells), mode == Symmetrization::average ? 2 * d.scale() : d.scale());
}

}  // namespace fsindex
