#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsindex/alphabet.hpp"

namespace fsindex {

/// Per-position alphabet reductions and the mixed-radix bin ranking.
///
/// Position i maps every letter to one of `cluster_count(i)` clusters. A bin
/// is one cluster per position; its rank is the mixed-radix number whose
/// digits are the cluster ranks, most significant digit first, so
/// rank = sum_i digit_i * radix(i) with radix(i) = prod_{j>i} cluster_count(j).
class PartitionScheme {
 public:
  PartitionScheme(Alphabet alphabet, std::vector<std::vector<std::vector<std::uint8_t>>> clusters);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t length() const { return clusters_.size(); }
  std::uint64_t bin_count() const { return bin_count_; }

  std::size_t cluster_count(std::size_t pos) const { return clusters_[pos].size(); }
  std::span<const std::uint8_t> cluster(std::size_t pos, std::size_t rank) const { return clusters_[pos][rank]; }
  std::uint8_t cluster_of(std::size_t pos, std::uint8_t letter) const { return cluster_of_[pos * alphabet_.size() + letter]; }
  std::uint64_t radix(std::size_t pos) const { return radix_[pos]; }

  /// Rank of the bin with the given cluster ranks (one per position).
  std::uint64_t rank(std::span<const std::uint8_t> digits) const;
  /// Inverse of rank().
  std::vector<std::uint8_t> digits(std::uint64_t rank) const;

  /// Rank of the bin containing `fragment`. Positions at or past the first
  /// kNoLetter (or past the fragment's end) take cluster rank 0, which is how
  /// suffixes shorter than length() are placed.
  std::uint64_t bin_of(std::span<const std::uint8_t> fragment) const;

  /// Text form accepted by parse_partition; positions joined by ';'.
  std::string to_spec() const;

  bool operator==(const PartitionScheme& other) const;

 private:
  Alphabet alphabet_;
  std::vector<std::vector<std::vector<std::uint8_t>>> clusters_;
  std::vector<std::uint8_t> cluster_of_;
  std::vector<std::uint64_t> radix_;
  std::uint64_t bin_count_ = 1;
};

/// Largest bin count accepted when building a scheme. Keeps the N+1 offset
/// array addressable and far from 64-bit overflow.
inline constexpr std::uint64_t kMaxBinCount = std::uint64_t{1} << 40;

/// Parses `cluster("," cluster)*` per position, positions separated by ';'
/// or newlines. One position is broadcast to all `length` positions.
PartitionScheme parse_partition(std::string_view spec, const Alphabet& alphabet, std::size_t length);

/// Partitions from the published length-6/9/12 indexes.
inline constexpr std::string_view kPartitionSPEQ06 = "T,SA,N,ILV,M,KR,DE,Q,WF,Y,H,G,P,C";
inline constexpr std::string_view kPartitionSPEQ09 = "TSAN,ILVM,KR,DEQ,WFYH,GPC";
inline constexpr std::string_view kPartitionSPEQ12 = "TSAN,ILVM,KRDEQ,WFYHGPC";

}  // namespace fsindex
