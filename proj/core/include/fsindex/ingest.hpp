#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fsindex/alphabet.hpp"

namespace fsindex {

struct SequenceRecord {
  std::string id;
  std::string residues;  ///< upper-case, may contain non-standard letters
};

/// Sequences in input order with unique identifiers.
class SequenceDB {
 public:
  void add(std::string id, std::string residues);

  const std::vector<SequenceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const SequenceRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t total_residues() const { return total_residues_; }

 private:
  std::vector<SequenceRecord> records_;
  std::unordered_set<std::string> ids_;
  std::size_t total_residues_ = 0;
};

/// FASTA: '>' header lines (identifier = first word), wrapped sequence
/// lines. Whitespace is stripped and letters upper-cased.
SequenceDB parse_fasta(std::istream& in);
SequenceDB parse_fasta(std::string_view text);
SequenceDB load_fasta(const std::string& path);

/// Location of a fragment: sequence ordinal and start offset.
struct FragmentRef {
  std::uint32_t sequence = 0;
  std::uint32_t offset = 0;

  std::uint64_t packed() const { return (std::uint64_t{sequence} << 32) | offset; }
  static FragmentRef unpack(std::uint64_t v) {
    return {static_cast<std::uint32_t>(v >> 32), static_cast<std::uint32_t>(v & 0xFFFFFFFFu)};
  }
  auto operator<=>(const FragmentRef&) const = default;
};

/// All sequences encoded to alphabet codes in one buffer. Letters outside
/// the alphabet become kNoLetter and every sequence is followed by one
/// kNoLetter, so reading a fragment stops at the first kNoLetter.
class ResidueStore {
 public:
  ResidueStore(const SequenceDB& db, const Alphabet& alphabet);

  const Alphabet& alphabet() const { return alphabet_; }
  std::size_t sequence_count() const { return starts_.size(); }
  std::size_t sequence_length(std::size_t seq) const { return lengths_[seq]; }
  std::span<const std::uint8_t> sequence(std::size_t seq) const { return {codes_.data() + starts_[seq], lengths_[seq]}; }

  /// Pointer to the fragment's first letter; valid for at least one
  /// terminator past the end of its sequence.
  const std::uint8_t* at(FragmentRef ref) const { return codes_.data() + starts_[ref.sequence] + ref.offset; }

  /// Number of alphabet letters starting at `ref`, capped at `cap`.
  std::size_t clean_length(FragmentRef ref, std::size_t cap) const;

 private:
  Alphabet alphabet_;
  std::vector<std::uint8_t> codes_;
  std::vector<std::uint64_t> starts_;
  std::vector<std::uint32_t> lengths_;
};

struct ExtractOptions {
  /// Also keep clean suffixes shorter than m (at sequence ends and before a
  /// rejected letter), down to `suffix_floor` letters.
  bool suffix_mode = false;
  std::size_t suffix_floor = 1;
};

/// Every clean length-m window of a sequence set (plus short suffixes in
/// suffix mode), ordered by sequence then offset.
struct FragmentDataset {
  std::shared_ptr<const SequenceDB> db;
  std::shared_ptr<const ResidueStore> store;
  std::size_t length = 0;
  bool suffix_mode = false;
  std::size_t suffix_floor = 1;
  std::vector<FragmentRef> fragments;
  std::size_t rejected_windows = 0;  ///< length-m windows dropped for a non-alphabet letter

  std::size_t size() const { return fragments.size(); }
  const Alphabet& alphabet() const { return store->alphabet(); }
  /// Letters available at `ref`, capped at `length`.
  std::size_t fragment_length(FragmentRef ref) const { return store->clean_length(ref, length); }
  std::string text(FragmentRef ref, std::size_t len) const;
};

FragmentDataset extract_fragments(std::shared_ptr<const SequenceDB> db, const Alphabet& alphabet, std::size_t length,
                                  ExtractOptions options = {});

/// JSON object: record, residue, fragment and rejection counts.
std::string dataset_manifest_json(const FragmentDataset& dataset);

/// Relative letter frequencies of the store (alphabet letters only).
std::vector<double> composition(const ResidueStore& store);

/// i.i.d. letters drawn from `frequencies` (must sum to 1 within 1e-9).
/// Deterministic for a given seed on every platform.
std::vector<std::vector<std::uint8_t>> sample_background_queries(std::span<const double> frequencies, std::size_t length,
                                                                 std::size_t count, std::uint64_t seed);

/// Non-overlapping clean windows of `store`, a seeded random selection of
/// `count` of them. Throws, naming the maximum, when too few exist.
std::vector<std::vector<std::uint8_t>> sample_window_queries(const ResidueStore& store, std::size_t length,
                                                             std::size_t count, std::uint64_t seed);

}  // namespace fsindex
