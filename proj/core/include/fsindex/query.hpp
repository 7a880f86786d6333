#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "fsindex/alphabet.hpp"
#include "fsindex/partition.hpp"

namespace fsindex {

/// Query and distance values. Integral so results are bit-exact.
using Value = std::int64_t;

/// Stands in for +infinity; leaves headroom so sums of a few bounds never
/// overflow.
inline constexpr Value kUnbounded = std::numeric_limits<Value>::max() / 4;

enum class QueryKind : std::uint8_t { distance, pssm };

/// Additive position-wise function f(x) = sum_i f_i(x_i), in cost
/// orientation (smaller is closer). Answers valuation queries f(x) <= eps.
class QueryFunction {
 public:
  QueryFunction(Alphabet alphabet, std::size_t length, std::vector<Value> table, QueryKind kind);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t length() const { return length_; }
  QueryKind kind() const { return kind_; }

  Value operator()(std::size_t pos, std::uint8_t letter) const { return table_[pos * alphabet_.size() + letter]; }
  std::span<const Value> column(std::size_t pos) const { return {table_.data() + pos * alphabet_.size(), alphabet_.size()}; }
  /// Row-major length x |alphabet| table.
  std::span<const Value> table() const { return table_; }

  /// Full value over the first length() letters of `fragment`.
  Value evaluate(std::span<const std::uint8_t> fragment) const;

 private:
  Alphabet alphabet_;
  std::size_t length_;
  std::vector<Value> table_;
  QueryKind kind_;
};

/// f split as base + shift with every base column's minimum equal to 0.
/// Prefix sums of base never decrease, which partial-sum rejection needs.
struct NormalizedQuery {
  QueryFunction base;
  Value shift = 0;
};

/// f_i(a) = D(center_i, a).
QueryFunction distance_query(const DistanceMatrix& distances, std::span<const std::uint8_t> center);

/// f_i(a) = columns[i][a]; columns are costs.
QueryFunction pssm_query(const Alphabet& alphabet, const std::vector<std::vector<Value>>& columns);

enum class PssmOrientation { cost, score };

/// Tab- or space-separated PSSM text: optional '#' comment lines (a comment
/// "# orientation: score" or "# orientation: cost" overrides the default),
/// a header of letters, then one row of integers per position. Columns for
/// letters outside the alphabet are dropped. Score-oriented tables are
/// negated into costs.
QueryFunction parse_pssm(std::string_view text, const Alphabet& alphabet,
                         PssmOrientation orientation = PssmOrientation::cost);

/// Radius eps = s(center, center) - threshold, so that s(center, x) >= threshold
/// iff d(center, x) <= eps.
Value similarity_threshold_to_radius(const ScoreMatrix& scores, std::span<const std::uint8_t> center, Value threshold);

NormalizedQuery normalize(const QueryFunction& f);

/// Per-cluster lower bounds of a normalized query over a partition scheme,
/// with everything the tree traversal needs precomputed.
///
/// Covers the first `depth` positions: min(query length, scheme length).
class LowerBoundTable {
 public:
  LowerBoundTable(const NormalizedQuery& query, const PartitionScheme& scheme);

  std::size_t depth() const { return depth_; }

  /// F_i(gamma) = min over letters a in gamma of f_i(a).
  Value bound(std::size_t pos, std::size_t cluster) const { return bounds_[pos][cluster]; }
  /// Z_i, the cluster minimising F_i (lowest rank on ties).
  std::uint8_t root_cluster(std::size_t pos) const { return root_[pos]; }
  /// min{F_i(gamma) : gamma != Z_i}; kUnbounded for single-cluster positions.
  Value second_min(std::size_t pos) const { return second_min_[pos]; }
  /// xi_i(gamma) - xi_i(Z_i): rank change when position i switches to gamma.
  std::int64_t rank_offset(std::size_t pos, std::size_t cluster) const { return offsets_[pos][cluster]; }

  /// r(Z) with digits past depth() set to 0.
  std::uint64_t root_rank() const { return root_rank_; }
  /// F(Z) = sum_i F_i(Z_i).
  Value root_bound() const { return root_bound_; }

 private:
  std::size_t depth_ = 0;
  std::vector<std::vector<Value>> bounds_;
  std::vector<std::uint8_t> root_;
  std::vector<Value> second_min_;
  std::vector<std::vector<std::int64_t>> offsets_;
  std::uint64_t root_rank_ = 0;
  Value root_bound_ = 0;
};

inline LowerBoundTable lower_bound_table(const NormalizedQuery& query, const PartitionScheme& scheme) {
  return LowerBoundTable(query, scheme);
}

}  // namespace fsindex
