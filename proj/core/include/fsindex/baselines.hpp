#pragma once

#include <map>

#include "fsindex/fsindex.hpp"

namespace fsindex {

/// Evaluates q on every fragment of the dataset; returns those with value <= eps
/// in dataset order. q.length() must equal the fragment length.
HitList linear_scan_range(const FragmentDataset& dataset, const QueryFunction& q, Value eps);

/// Every fragment evaluated, sorted by (value, ref), first min(k, n) kept.
HitList linear_scan_knn(const FragmentDataset& dataset, const QueryFunction& q, std::size_t k);

/// Every clean window of length q.length() in the dataset's sequences
/// (independent of the fragment length), value <= eps. The reference for
/// queries longer or shorter than the index length.
HitList window_scan_range(const ResidueStore& store, const QueryFunction& q, Value eps);

/// All fragments in one lexicographically sorted run with lcp values; the
/// suffix-array style comparison method.
struct FlatIndex {
  std::shared_ptr<const ResidueStore> store;
  std::size_t length = 0;
  std::vector<FragmentRef> frag;
  std::vector<std::uint8_t> lcp;  ///< n+1 entries, lcp[0] = lcp[n] = 0
};

FlatIndex flat_build(const FragmentDataset& dataset);

/// Same scan as process_bin over the single run [0, n).
SearchResult flat_search(const FlatIndex& index, const NormalizedQuery& query, Value eps);

/// Dataset split by weight w(x) = sum of diagonal scores.
struct FibrePartition {
  std::map<long, std::vector<FragmentRef>> fibres;
};

FibrePartition fibre_partition(const FragmentDataset& dataset, const ScoreMatrix& scores);

/// Quasi-metric ball {x : d(omega, x) <= eps} computed as a union of metric
/// range queries, one per fibre, under rho = (d(x,y) + d(y,x)) / 2 with
/// radius eps + (z - w(omega)) / 2. Throws unless S is symmetric and its
/// distance matrix is a quasi-metric. Values are d(omega, x).
HitList fibre_range_query(const FragmentDataset& dataset, const ScoreMatrix& scores,
                          std::span<const std::uint8_t> omega, Value eps);

}  // namespace fsindex
