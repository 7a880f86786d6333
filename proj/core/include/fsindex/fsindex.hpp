#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fsindex/ingest.hpp"
#include "fsindex/partition.hpp"
#include "fsindex/query.hpp"

namespace fsindex {

struct Hit {
  FragmentRef ref;
  Value value = 0;

  bool operator==(const Hit&) const = default;
};

using HitList = std::vector<Hit>;

/// Counters for one search. residues_scanned counts query positions
/// actually evaluated, so it never exceeds query length x fragments_scanned.
struct SearchStats {
  std::uint64_t nodes_visited = 0;      ///< tree nodes accepted (bins whose range was scanned, empty or not)
  std::uint64_t bins_scanned = 0;       ///< non-empty bins scanned
  std::uint64_t fragments_scanned = 0;
  std::uint64_t residues_scanned = 0;
  std::uint64_t hits = 0;
  std::size_t query_length = 0;
  std::chrono::nanoseconds elapsed{0};

  /// residues_scanned / (query_length * fragments_scanned) * 100, or 0.
  double residue_percent() const;
  SearchStats& operator+=(const SearchStats& other);
};

struct SearchResult {
  HitList hits;
  SearchStats stats;
};

/// Optional record of a traversal, in visiting order.
struct TraceEvent {
  enum class Kind { scanned, pruned };
  Kind kind;
  std::uint64_t rank;  ///< bin rank of the tree node
  Value bound;         ///< F(node)
};

struct SearchTrace {
  std::vector<TraceEvent> events;
  std::vector<std::uint64_t> scanned() const;
  std::vector<std::uint64_t> pruned() const;
};

/// Fragments bucketed by bin and sorted lexicographically inside each bin,
/// with longest-common-prefix lengths between neighbours. Immutable after
/// construction; safe to share between concurrent searches.
class FSIndex {
 public:
  /// Raw arrays, as produced by build() or read back from disk.
  struct Parts {
    std::shared_ptr<const SequenceDB> db;
    std::shared_ptr<const ResidueStore> store;
    PartitionScheme scheme;
    bool suffix_mode = false;
    std::size_t suffix_floor = 0;
    std::vector<FragmentRef> frag;
    std::vector<std::uint64_t> bin;  ///< N+1 offsets into frag
    std::vector<std::uint8_t> lcp;   ///< n+1 entries
  };

  explicit FSIndex(Parts parts);

  /// Counting sort into bins, then a per-bin sort and the lcp pass.
  static FSIndex build(const FragmentDataset& dataset, const PartitionScheme& scheme);

  const PartitionScheme& scheme() const { return parts_.scheme; }
  const Alphabet& alphabet() const { return parts_.scheme.alphabet(); }
  std::size_t length() const { return parts_.scheme.length(); }
  std::size_t size() const { return parts_.frag.size(); }
  std::uint64_t bin_count() const { return parts_.scheme.bin_count(); }
  bool suffix_mode() const { return parts_.suffix_mode; }
  std::size_t suffix_floor() const { return parts_.suffix_floor; }

  std::span<const FragmentRef> frag() const { return parts_.frag; }
  std::span<const std::uint64_t> bins() const { return parts_.bin; }
  std::span<const std::uint8_t> lcp() const { return parts_.lcp; }
  std::uint64_t bin_size(std::uint64_t rank) const { return parts_.bin[rank + 1] - parts_.bin[rank]; }

  const ResidueStore& store() const { return *parts_.store; }
  const SequenceDB& db() const { return *parts_.db; }
  std::shared_ptr<const SequenceDB> db_ptr() const { return parts_.db; }
  std::shared_ptr<const ResidueStore> store_ptr() const { return parts_.store; }

  /// Letters available at `ref`, capped at `cap`.
  std::size_t fragment_length(FragmentRef ref, std::size_t cap) const { return parts_.store->clean_length(ref, cap); }
  std::string fragment_text(FragmentRef ref, std::size_t len) const;

  /// Approximate in-memory footprint of the bin, frag and lcp arrays.
  std::size_t index_bytes() const;

 private:
  Parts parts_;
};

struct AuditReport {
  bool ok = true;
  std::vector<std::string> problems;  ///< first few violations, human readable
};

/// Full pass over the structural invariants: bin offsets, constant rank per
/// bin, per-bin lexicographic order, lcp values and fragment validity.
AuditReport audit(const FSIndex& index);

/// Scans frag[bin[u]], ..., frag[bin[u+1]-1] and appends every fragment with
/// base value <= eps to `hits`.
void process_bin(const FSIndex& index, std::uint64_t rank, const NormalizedQuery& query, Value eps, HitList& hits,
                 SearchStats& stats);

/// All occurrences with base value <= eps. `eps` is measured against the
/// normalized base; compare raw radii after subtracting query.shift.
/// Query length must equal the index length.
SearchResult range_search(const FSIndex& index, const NormalizedQuery& query, Value eps, SearchTrace* trace = nullptr);

/// The min(k, n) occurrences with the smallest base values, sorted by value.
/// Ties at the k-th value keep the first occurrences met during traversal;
/// `all_ties` returns every occurrence at that value instead.
SearchResult knn_search(const FSIndex& index, const NormalizedQuery& query, std::size_t k, bool all_ties = false);

/// Queries longer than the index length: the tree is traversed on the first
/// length() positions and fragments are evaluated on all positions. Needs a
/// suffix-mode index; windows running off a clean segment are skipped.
SearchResult long_query_search(const FSIndex& index, const NormalizedQuery& query, Value eps);

/// Queries shorter than the index length: the tree is traversed to the
/// query's depth and every accepted node's contiguous range of descendant
/// bins is scanned. Needs a suffix-mode index.
SearchResult short_query_search(const FSIndex& index, const NormalizedQuery& query, Value eps);

/// Range search for any query length, choosing the route above.
SearchResult search(const FSIndex& index, const NormalizedQuery& query, Value eps);

/// kNN for any query length (same length rules as search()).
SearchResult knn_search_any_length(const FSIndex& index, const NormalizedQuery& query, std::size_t k,
                                   bool all_ties = false);

/// Adds `shift` to every value, turning base values back into f values.
void denormalize(HitList& hits, Value shift);

/// Sorts by (value, ref).
void sort_hits(HitList& hits);

}  // namespace fsindex
