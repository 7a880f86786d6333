#include "fsindex/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace fsindex {

QueryFunction::QueryFunction(Alphabet alphabet, std::size_t length, std::vector<Value> table, QueryKind kind)
    : alphabet_(std::move(alphabet)), length_(length), table_(std::move(table)), kind_(kind) {
  if (table_.size() != length_ * alphabet_.size()) throw Error("query table must have length x |alphabet| entries");
}

Value QueryFunction::evaluate(std::span<const std::uint8_t> fragment) const {
  if (fragment.size() < length_) throw Error("fragment shorter than query");
  Value total = 0;
  for (std::size_t i = 0; i < length_; ++i) total += (*this)(i, fragment[i]);
  return total;
}

QueryFunction distance_query(const DistanceMatrix& d, std::span<const std::uint8_t> center) {
  const std::size_t sigma = d.size();
  std::vector<Value> table(center.size() * sigma);
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (center[i] >= sigma) throw Error("query letter outside alphabet");
    for (std::size_t a = 0; a < sigma; ++a) table[i * sigma + a] = d(center[i], a);
  }
  return QueryFunction(d.alphabet(), center.size(), std::move(table), QueryKind::distance);
}

QueryFunction pssm_query(const Alphabet& alphabet, const std::vector<std::vector<Value>>& columns) {
  const std::size_t sigma = alphabet.size();
  std::vector<Value> table;
  table.reserve(columns.size() * sigma);
  for (const auto& col : columns) {
    if (col.size() != sigma) throw Error("PSSM column does not cover the alphabet");
    table.insert(table.end(), col.begin(), col.end());
  }
  return QueryFunction(alphabet, columns.size(), std::move(table), QueryKind::pssm);
}

QueryFunction parse_pssm(std::string_view text, const Alphabet& alphabet, PssmOrientation orientation) {
  auto tokens_of = [](std::string_view line) {
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
  };

  std::vector<std::uint8_t> column_letter;
  std::vector<std::vector<Value>> columns;
  std::size_t line_no = 0, pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto tokens = tokens_of(line);
    if (tokens.empty()) continue;
    if (tokens.front().front() == '#') {
      if (line.find("orientation") != std::string_view::npos) {
        if (line.find("score") != std::string_view::npos) orientation = PssmOrientation::score;
        else if (line.find("cost") != std::string_view::npos) orientation = PssmOrientation::cost;
      }
      continue;
    }
    if (!have_header) {
      std::vector<bool> seen(alphabet.size(), false);
      for (auto t : tokens) {
        if (t.size() != 1) throw Error("PSSM line " + std::to_string(line_no) + ": malformed header token");
        auto code = alphabet.code(t.front());
        if (code != kNoLetter) {
          if (seen[code]) throw Error("PSSM header repeats letter " + std::string(t));
          seen[code] = true;
        }
        column_letter.push_back(code);
      }
      for (std::size_t a = 0; a < alphabet.size(); ++a)
        if (!seen[a]) throw Error(std::string("PSSM header is missing letter '") + alphabet.letter(a) + "'");
      have_header = true;
      continue;
    }
    if (tokens.size() != column_letter.size())
      throw Error("PSSM line " + std::to_string(line_no) + ": expected " + std::to_string(column_letter.size()) + " values");
    std::vector<Value> col(alphabet.size());
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      Value v = 0;
      auto t = tokens[k];
      if (!t.empty() && t.front() == '+') t.remove_prefix(1);
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc{} || ptr != t.data() + t.size())
        throw Error("PSSM line " + std::to_string(line_no) + ": non-integer entry '" + std::string(tokens[k]) + "'");
      if (column_letter[k] != kNoLetter) col[column_letter[k]] = orientation == PssmOrientation::score ? -v : v;
    }
    columns.push_back(std::move(col));
  }
  if (!have_header) throw Error("PSSM has no header row");
  if (columns.empty()) throw Error("PSSM has no rows");
  return pssm_query(alphabet, columns);
}

Value similarity_threshold_to_radius(const ScoreMatrix& scores, std::span<const std::uint8_t> center, Value threshold) {
  return static_cast<Value>(weight(scores, center)) - threshold;
}

NormalizedQuery normalize(const QueryFunction& f) {
  const std::size_t sigma = f.alphabet().size();
  std::vector<Value> table(f.table().begin(), f.table().end());
  Value shift = 0;
  for (std::size_t i = 0; i < f.length(); ++i) {
    auto col = f.column(i);
    Value lo = *std::min_element(col.begin(), col.end());
    shift += lo;
    for (std::size_t a = 0; a < sigma; ++a) table[i * sigma + a] -= lo;
  }
  return {QueryFunction(f.alphabet(), f.length(), std::move(table), f.kind()), shift};
}

LowerBoundTable::LowerBoundTable(const NormalizedQuery& query, const PartitionScheme& scheme) {
  if (!(query.base.alphabet() == scheme.alphabet())) throw Error("query and partition use different alphabets");
  depth_ = std::min(query.base.length(), scheme.length());
  bounds_.resize(depth_);
  root_.resize(depth_);
  second_min_.resize(depth_);
  offsets_.resize(depth_);

  for (std::size_t i = 0; i < depth_; ++i) {
    const std::size_t k = scheme.cluster_count(i);
    auto& F = bounds_[i];
    F.assign(k, kUnbounded);
    for (std::size_t r = 0; r < k; ++r)
      for (auto letter : scheme.cluster(i, r)) F[r] = std::min(F[r], query.base(i, letter));

    std::size_t z = 0;
    for (std::size_t r = 1; r < k; ++r)
      if (F[r] < F[z]) z = r;
    root_[i] = static_cast<std::uint8_t>(z);

    Value second = kUnbounded;
    for (std::size_t r = 0; r < k; ++r)
      if (r != z) second = std::min(second, F[r]);
    second_min_[i] = second;

    offsets_[i].resize(k);
    const auto radix = static_cast<std::int64_t>(scheme.radix(i));
    for (std::size_t r = 0; r < k; ++r)
      offsets_[i][r] = (static_cast<std::int64_t>(r) - static_cast<std::int64_t>(z)) * radix;

    root_rank_ += z * scheme.radix(i);
    root_bound_ += F[z];
  }
}

}  // namespace fsindex
