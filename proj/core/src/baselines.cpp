#include "fsindex/baselines.hpp"

#include <algorithm>

#include "scan.hpp"

namespace fsindex {

namespace {

void require_length(const FragmentDataset& dataset, const QueryFunction& q) {
  if (q.length() != dataset.length)
    throw Error("query length " + std::to_string(q.length()) + " != fragment length " + std::to_string(dataset.length));
  if (!(q.alphabet() == dataset.alphabet())) throw Error("query alphabet differs from dataset alphabet");
}

bool lex_less(const std::uint8_t* a, const std::uint8_t* b, std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) {
    int x = a[i] == kNoLetter ? -1 : a[i];
    int y = b[i] == kNoLetter ? -1 : b[i];
    if (x != y) return x < y;
    if (x < 0) return false;
  }
  return false;
}

}  // namespace

HitList linear_scan_range(const FragmentDataset& dataset, const QueryFunction& q, Value eps) {
  require_length(dataset, q);
  HitList hits;
  for (auto ref : dataset.fragments) {
    if (dataset.fragment_length(ref) < q.length()) continue;
    Value v = q.evaluate({dataset.store->at(ref), q.length()});
    if (v <= eps) hits.push_back({ref, v});
  }
  return hits;
}

HitList linear_scan_knn(const FragmentDataset& dataset, const QueryFunction& q, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  HitList all = linear_scan_range(dataset, q, kUnbounded);
  sort_hits(all);
  if (all.size() > k) all.resize(k);
  return all;
}

HitList window_scan_range(const ResidueStore& store, const QueryFunction& q, Value eps) {
  HitList hits;
  const std::size_t len = q.length();
  for (std::size_t s = 0; s < store.sequence_count(); ++s) {
    const std::size_t n = store.sequence_length(s);
    for (std::size_t p = 0; p + len <= n; ++p) {
      FragmentRef ref{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p)};
      if (store.clean_length(ref, len) < len) continue;
      Value v = q.evaluate({store.at(ref), len});
      if (v <= eps) hits.push_back({ref, v});
    }
  }
  return hits;
}

FlatIndex flat_build(const FragmentDataset& dataset) {
  FlatIndex flat;
  flat.store = dataset.store;
  flat.length = dataset.length;
  flat.frag = dataset.fragments;
  const auto& store = *dataset.store;
  const std::size_t m = dataset.length;
  std::stable_sort(flat.frag.begin(), flat.frag.end(),
                   [&](FragmentRef a, FragmentRef b) { return lex_less(store.at(a), store.at(b), m); });
  flat.lcp.assign(flat.frag.size() + 1, 0);
  for (std::size_t j = 1; j < flat.frag.size(); ++j) {
    const auto* a = store.at(flat.frag[j - 1]);
    const auto* b = store.at(flat.frag[j]);
    std::size_t l = 0;
    while (l < m && a[l] != kNoLetter && a[l] == b[l]) ++l;
    flat.lcp[j] = static_cast<std::uint8_t>(l);
  }
  return flat;
}

SearchResult flat_search(const FlatIndex& index, const NormalizedQuery& query, Value eps) {
  if (query.base.length() != index.length) throw Error("query length differs from flat index length");
  SearchResult result;
  result.stats.query_length = query.base.length();
  auto t0 = std::chrono::steady_clock::now();
  if (!index.frag.empty()) {
    result.stats.nodes_visited = 1;
    result.stats.bins_scanned = 1;
    std::vector<Value> cd;
    detail::scan_run(*index.store, index.frag, index.lcp.data(), query.base, eps,
                     [&](FragmentRef ref, Value v) { result.hits.push_back({ref, v}); }, result.stats, cd);
  }
  result.stats.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0);
  result.stats.hits = result.hits.size();
  return result;
}

FibrePartition fibre_partition(const FragmentDataset& dataset, const ScoreMatrix& scores) {
  if (!(scores.alphabet() == dataset.alphabet())) throw Error("score matrix alphabet differs from dataset alphabet");
  FibrePartition p;
  for (auto ref : dataset.fragments) {
    if (dataset.fragment_length(ref) < dataset.length) continue;
    p.fibres[weight(scores, {dataset.store->at(ref), dataset.length})].push_back(ref);
  }
  return p;
}

HitList fibre_range_query(const FragmentDataset& dataset, const ScoreMatrix& scores,
                          std::span<const std::uint8_t> omega, Value eps) {
  if (!scores.is_symmetric()) throw Error("fibre decomposition needs a symmetric score matrix");
  DistanceMatrix d = distance_from_score(scores);
  auto report = check_quasi_metric(d);
  if (!report.is_quasi_metric) throw Error("distance matrix is not a quasi-metric");
  const std::size_t m = dataset.length;
  if (omega.size() != m) throw Error("query length differs from fragment length");

  const long w_omega = weight(scores, omega);
  auto partition = fibre_partition(dataset, scores);
  HitList hits;
  for (const auto& [z, members] : partition.fibres) {
    // 2*rho(omega, x) <= 2*eps + (z - w(omega))
    const Value bound = 2 * eps + (z - w_omega);
    if (bound < 0) continue;
    for (auto ref : members) {
      const std::uint8_t* x = dataset.store->at(ref);
      Value forward = 0, doubled = 0;
      for (std::size_t i = 0; i < m; ++i) {
        forward += d(omega[i], x[i]);
        doubled += d(omega[i], x[i]) + d(x[i], omega[i]);
      }
      if (doubled <= bound) hits.push_back({ref, forward});
    }
  }
  return hits;
}

}  // namespace fsindex
