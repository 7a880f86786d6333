#include "fsindex/fsindex.hpp"

#include <algorithm>
#include <new>

#include "scan.hpp"

namespace fsindex {

double SearchStats::residue_percent() const {
  if (fragments_scanned == 0 || query_length == 0) return 0.0;
  return 100.0 * static_cast<double>(residues_scanned) /
         (static_cast<double>(query_length) * static_cast<double>(fragments_scanned));
}

SearchStats& SearchStats::operator+=(const SearchStats& o) {
  nodes_visited += o.nodes_visited;
  bins_scanned += o.bins_scanned;
  fragments_scanned += o.fragments_scanned;
  residues_scanned += o.residues_scanned;
  hits += o.hits;
  elapsed += o.elapsed;
  query_length = std::max(query_length, o.query_length);
  return *this;
}

std::vector<std::uint64_t> SearchTrace::scanned() const {
  std::vector<std::uint64_t> out;
  for (const auto& e : events)
    if (e.kind == TraceEvent::Kind::scanned) out.push_back(e.rank);
  return out;
}

std::vector<std::uint64_t> SearchTrace::pruned() const {
  std::vector<std::uint64_t> out;
  for (const auto& e : events)
    if (e.kind == TraceEvent::Kind::pruned) out.push_back(e.rank);
  return out;
}

namespace {

// Letter at depth d, with the end of a fragment ordered before every letter.
inline int key_at(const std::uint8_t* s, std::size_t d) { return s[d] == kNoLetter ? -1 : s[d]; }

// Three-way comparison of two fragments over at most `m` letters, starting
// at depth `d`, where both are known equal on [0, d).
int compare_from(const std::uint8_t* a, const std::uint8_t* b, std::size_t d, std::size_t m) {
  for (; d < m; ++d) {
    int x = key_at(a, d), y = key_at(b, d);
    if (x != y) return x < y ? -1 : 1;
    if (x < 0) return 0;
  }
  return 0;
}

std::size_t common_prefix(const std::uint8_t* a, const std::uint8_t* b, std::size_t m) {
  std::size_t j = 0;
  while (j < m && a[j] != kNoLetter && a[j] == b[j]) ++j;
  return j;
}

// Multikey quicksort (three-way partition on the letter at depth d) with an
// insertion-sort cutoff.
class BinSorter {
 public:
  BinSorter(const ResidueStore& store, std::size_t m) : store_(store), m_(m) {}

  void sort(FragmentRef* a, std::size_t n, std::size_t d) {
    while (n > 1 && d < m_) {
      if (n <= kCutoff) {
        insertion_sort(a, n, d);
        return;
      }
      int pivot = median3(key(a[0], d), key(a[n / 2], d), key(a[n - 1], d));
      std::size_t lt = 0, i = 0, gt = n;
      while (i < gt) {
        int k = key(a[i], d);
        if (k < pivot) std::swap(a[lt++], a[i++]);
        else if (k > pivot) std::swap(a[i], a[--gt]);
        else ++i;
      }
      sort(a, lt, d);
      sort(a + gt, n - gt, d);
      if (pivot < 0) return;
      a += lt;
      n = gt - lt;
      ++d;
    }
  }

 private:
  static constexpr std::size_t kCutoff = 12;

  int key(FragmentRef r, std::size_t d) const { return key_at(store_.at(r), d); }

  static int median3(int x, int y, int z) {
    if (x < y) return y < z ? y : (x < z ? z : x);
    return x < z ? x : (y < z ? z : y);
  }

  void insertion_sort(FragmentRef* a, std::size_t n, std::size_t d) {
    for (std::size_t i = 1; i < n; ++i) {
      FragmentRef v = a[i];
      const std::uint8_t* sv = store_.at(v);
      std::size_t j = i;
      while (j > 0 && compare_from(store_.at(a[j - 1]), sv, d, m_) > 0) {
        a[j] = a[j - 1];
        --j;
      }
      a[j] = v;
    }
  }

  const ResidueStore& store_;
  std::size_t m_;
};

}  // namespace

FSIndex::FSIndex(Parts parts) : parts_(std::move(parts)) {
  if (!parts_.store || !parts_.db) throw Error("index needs its sequence store");
  if (parts_.bin.size() != parts_.scheme.bin_count() + 1) throw Error("bin array must have N+1 entries");
  if (parts_.lcp.size() != parts_.frag.size() + 1) throw Error("lcp array must have n+1 entries");
  if (!(parts_.store->alphabet() == parts_.scheme.alphabet())) throw Error("store and partition alphabets differ");
}

FSIndex FSIndex::build(const FragmentDataset& dataset, const PartitionScheme& scheme) {
  if (!(dataset.alphabet() == scheme.alphabet())) throw Error("dataset and partition use different alphabets");
  if (dataset.length != scheme.length())
    throw Error("dataset fragment length " + std::to_string(dataset.length) + " differs from partition length " +
                std::to_string(scheme.length()));

  const std::uint64_t N = scheme.bin_count();
  const std::size_t m = scheme.length();
  const auto& store = *dataset.store;
  const std::size_t n = dataset.size();

  Parts parts{dataset.db, dataset.store, scheme, dataset.suffix_mode, dataset.suffix_floor, {}, {}, {}};
  try {
    // Counting sort. Slot k+2 counts bin k; after the prefix sum slot k+1 is
    // the start of bin k and serves as its insertion cursor, ending as the
    // start of bin k+1.
    parts.bin.assign(N + 2, 0);
    parts.frag.resize(n);
    parts.lcp.assign(n + 1, 0);
  } catch (const std::bad_alloc&) {
    throw Error("not enough memory for an index with N=" + std::to_string(N) + " bins and n=" + std::to_string(n) +
                " fragments");
  }
  auto& bin = parts.bin;
  auto& frag = parts.frag;

  auto bin_of = [&](FragmentRef r) { return scheme.bin_of({store.at(r), m}); };
  for (const auto& r : dataset.fragments) ++bin[bin_of(r) + 2];
  for (std::uint64_t j = 2; j < N + 2; ++j) bin[j] += bin[j - 1];
  for (const auto& r : dataset.fragments) frag[bin[bin_of(r) + 1]++] = r;
  bin.pop_back();

  BinSorter sorter(store, m);
  auto& lcp = parts.lcp;
  for (std::uint64_t u = 0; u < N; ++u) {
    const std::uint64_t lo = bin[u], hi = bin[u + 1];
    if (hi - lo < 2) continue;
    sorter.sort(frag.data() + lo, hi - lo, 0);
    for (std::uint64_t j = lo + 1; j < hi; ++j)
      lcp[j] = static_cast<std::uint8_t>(common_prefix(store.at(frag[j - 1]), store.at(frag[j]), m));
    // Equal fragments in sequence/offset order so builds are canonical.
    std::uint64_t run = lo;
    for (std::uint64_t j = lo + 1; j <= hi; ++j) {
      bool same = j < hi && compare_from(store.at(frag[j - 1]), store.at(frag[j]), 0, m) == 0;
      if (!same) {
        if (j - run > 1) std::sort(frag.begin() + static_cast<std::ptrdiff_t>(run), frag.begin() + static_cast<std::ptrdiff_t>(j));
        run = j;
      }
    }
  }
  return FSIndex(std::move(parts));
}

std::string FSIndex::fragment_text(FragmentRef ref, std::size_t len) const {
  return alphabet().decode({store().at(ref), len});
}

std::size_t FSIndex::index_bytes() const {
  return parts_.bin.size() * sizeof(std::uint64_t) + parts_.frag.size() * sizeof(FragmentRef) + parts_.lcp.size();
}

AuditReport audit(const FSIndex& index) {
  AuditReport report;
  auto fail = [&](std::string msg) {
    report.ok = false;
    if (report.problems.size() < 20) report.problems.push_back(std::move(msg));
  };

  const auto bins = index.bins();
  const auto frag = index.frag();
  const auto lcp = index.lcp();
  const std::size_t m = index.length();
  const std::uint64_t N = index.bin_count();
  const std::size_t n = frag.size();
  const auto& store = index.store();

  if (bins.size() != N + 1) fail("bin array size " + std::to_string(bins.size()) + " != N+1");
  if (lcp.size() != n + 1) fail("lcp array size " + std::to_string(lcp.size()) + " != n+1");
  if (!report.ok) return report;
  if (bins[0] != 0) fail("bin[0] != 0");
  if (bins[N] != n) fail("bin[N] != n");
  if (lcp[n] != 0) fail("lcp sentinel != 0");

  const std::size_t min_len = index.suffix_mode() ? index.suffix_floor() : m;
  for (std::size_t j = 0; j < n; ++j) {
    auto r = frag[j];
    if (r.sequence >= store.sequence_count() || r.offset >= store.sequence_length(r.sequence)) {
      fail("frag[" + std::to_string(j) + "] points outside its sequence");
      return report;
    }
    auto len = store.clean_length(r, m);
    if (len < min_len || r.offset + len > store.sequence_length(r.sequence))
      fail("frag[" + std::to_string(j) + "] has only " + std::to_string(len) + " clean letters");
  }

  for (std::uint64_t u = 0; u < N; ++u) {
    if (bins[u] > bins[u + 1]) {
      fail("bin offsets decrease at rank " + std::to_string(u));
      continue;
    }
    for (std::uint64_t j = bins[u]; j < bins[u + 1]; ++j) {
      const std::uint8_t* s = store.at(frag[j]);
      if (index.scheme().bin_of({s, m}) != u) fail("frag[" + std::to_string(j) + "] is not in bin " + std::to_string(u));
      if (j == bins[u]) {
        if (lcp[j] != 0) fail("lcp at the first slot of bin " + std::to_string(u) + " is not 0");
        continue;
      }
      const std::uint8_t* prev = store.at(frag[j - 1]);
      if (compare_from(prev, s, 0, m) > 0) fail("bin " + std::to_string(u) + " is out of order at slot " + std::to_string(j));
      if (lcp[j] != common_prefix(prev, s, m)) fail("lcp[" + std::to_string(j) + "] is wrong");
    }
  }
  return report;
}

namespace {

template <class Sink>
class Traversal {
 public:
  Traversal(const FSIndex& index, const NormalizedQuery& query, Value& eps, Sink& sink, SearchStats& stats,
            SearchTrace* trace)
      : index_(index), query_(query), table_(query, index.scheme()), eps_(eps), sink_(sink), stats_(stats),
        trace_(trace) {
    const std::size_t depth = table_.depth();
    // A query shorter than the index covers every bin below its depth.
    span_ = depth < index.length() ? index.scheme().radix(depth - 1) : 1;
  }

  void run() {
    const Value root = table_.root_bound();
    if (root > eps_) {
      record(TraceEvent::Kind::pruned, table_.root_rank(), root);
      return;
    }
    visit(table_.root_rank(), root);
    check_node(table_.root_rank(), root, 0);
  }

 private:
  void record(TraceEvent::Kind kind, std::uint64_t rank, Value bound) {
    if (trace_) trace_->events.push_back({kind, rank, bound});
  }

  void visit(std::uint64_t u, Value bound) {
    record(TraceEvent::Kind::scanned, u, bound);
    ++stats_.nodes_visited;
    const auto bins = index_.bins();
    const std::uint64_t lo = bins[u], hi = bins[u + span_];
    if (lo == hi) return;
    if (span_ == 1) {
      ++stats_.bins_scanned;
    } else {
      for (std::uint64_t b = u; b < u + span_; ++b) stats_.bins_scanned += bins[b] != bins[b + 1];
    }
    detail::scan_run(index_.store(), index_.frag().subspan(lo, hi - lo), index_.lcp().data() + lo, query_.base, eps_,
                     sink_, stats_, cd_);
  }

  // Children of node u differ from it in one position j >= i, switching the
  // root cluster Z_j to another cluster. Positions are tried from the last
  // one down, so shallow branches are explored first.
  void check_node(std::uint64_t u, Value bound, std::size_t i) {
    for (std::size_t j = table_.depth(); j-- > i;) {
      const std::uint8_t z = table_.root_cluster(j);
      const Value base = bound - table_.bound(j, z);
      const std::size_t k = index_.scheme().cluster_count(j);
      if (base + table_.second_min(j) <= eps_) {
        for (std::size_t g = 0; g < k; ++g) {
          if (g == z) continue;
          const Value child = base + table_.bound(j, g);
          const std::uint64_t v = u + static_cast<std::uint64_t>(table_.rank_offset(j, g));
          if (child <= eps_) {
            visit(v, child);
            check_node(v, child, j + 1);
          } else {
            record(TraceEvent::Kind::pruned, v, child);
          }
        }
      } else if (trace_) {
        for (std::size_t g = 0; g < k; ++g)
          if (g != z)
            record(TraceEvent::Kind::pruned, u + static_cast<std::uint64_t>(table_.rank_offset(j, g)),
                   base + table_.bound(j, g));
      }
    }
  }

  const FSIndex& index_;
  const NormalizedQuery& query_;
  LowerBoundTable table_;
  Value& eps_;
  Sink& sink_;
  SearchStats& stats_;
  SearchTrace* trace_;
  std::uint64_t span_ = 1;
  std::vector<Value> cd_;
};

struct RangeSink {
  HitList& hits;
  void operator()(FragmentRef ref, Value v) { hits.push_back({ref, v}); }
};

// Bounded max-heap on value; the radius tracks the current k-th value once
// k hits are held. Replacement is strict, so earlier hits win ties.
struct KnnSink {
  std::size_t k;
  Value& eps;
  HitList heap;

  static bool less(const Hit& a, const Hit& b) { return a.value < b.value; }

  void operator()(FragmentRef ref, Value v) {
    if (heap.size() < k) {
      heap.push_back({ref, v});
      std::push_heap(heap.begin(), heap.end(), less);
      if (heap.size() == k) eps = heap.front().value;
    } else if (v < heap.front().value) {
      std::pop_heap(heap.begin(), heap.end(), less);
      heap.back() = {ref, v};
      std::push_heap(heap.begin(), heap.end(), less);
      eps = heap.front().value;
    }
  }
};

void check_query(const FSIndex& index, const NormalizedQuery& query) {
  if (!(query.base.alphabet() == index.alphabet())) throw Error("query alphabet differs from index alphabet");
  if (query.base.length() == 0) throw Error("empty query");
}

void require_suffix_mode(const FSIndex& index, std::size_t query_length) {
  if (query_length != index.length() && !index.suffix_mode())
    throw Error("query length " + std::to_string(query_length) + " differs from index length " +
                std::to_string(index.length()) + " and the index was not built in suffix mode");
}

template <class Fn>
SearchResult timed(std::size_t query_length, Fn&& fn) {
  SearchResult result;
  result.stats.query_length = query_length;
  auto t0 = std::chrono::steady_clock::now();
  fn(result);
  result.stats.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0);
  result.stats.hits = result.hits.size();
  return result;
}

SearchResult range_any_length(const FSIndex& index, const NormalizedQuery& query, Value eps, SearchTrace* trace) {
  check_query(index, query);
  require_suffix_mode(index, query.base.length());
  return timed(query.base.length(), [&](SearchResult& r) {
    RangeSink sink{r.hits};
    Traversal<RangeSink> t(index, query, eps, sink, r.stats, trace);
    t.run();
  });
}

}  // namespace

void process_bin(const FSIndex& index, std::uint64_t rank, const NormalizedQuery& query, Value eps, HitList& hits,
                 SearchStats& stats) {
  check_query(index, query);
  if (rank >= index.bin_count()) throw Error("bin rank out of range");
  const auto bins = index.bins();
  const std::uint64_t lo = bins[rank], hi = bins[rank + 1];
  stats.query_length = query.base.length();
  ++stats.nodes_visited;
  if (lo == hi) return;
  ++stats.bins_scanned;
  std::vector<Value> cd;
  std::size_t before = hits.size();
  RangeSink sink{hits};
  detail::scan_run(index.store(), index.frag().subspan(lo, hi - lo), index.lcp().data() + lo, query.base, eps, sink,
                   stats, cd);
  stats.hits += hits.size() - before;
}

SearchResult range_search(const FSIndex& index, const NormalizedQuery& query, Value eps, SearchTrace* trace) {
  if (query.base.length() != index.length())
    throw Error("query length " + std::to_string(query.base.length()) + " != index length " +
                std::to_string(index.length()));
  return range_any_length(index, query, eps, trace);
}

SearchResult long_query_search(const FSIndex& index, const NormalizedQuery& query, Value eps) {
  if (query.base.length() < index.length()) throw Error("long query must be at least as long as the index length");
  if (!index.suffix_mode() && query.base.length() != index.length())
    throw Error("long queries need an index built in suffix mode");
  return range_any_length(index, query, eps, nullptr);
}

SearchResult short_query_search(const FSIndex& index, const NormalizedQuery& query, Value eps) {
  if (query.base.length() > index.length()) throw Error("short query must not be longer than the index length");
  if (!index.suffix_mode() && query.base.length() != index.length())
    throw Error("short queries need an index built in suffix mode");
  return range_any_length(index, query, eps, nullptr);
}

SearchResult search(const FSIndex& index, const NormalizedQuery& query, Value eps) {
  return range_any_length(index, query, eps, nullptr);
}

SearchResult knn_search_any_length(const FSIndex& index, const NormalizedQuery& query, std::size_t k, bool all_ties) {
  if (k == 0) throw Error("k must be at least 1");
  check_query(index, query);
  require_suffix_mode(index, query.base.length());
  SearchResult result = timed(query.base.length(), [&](SearchResult& r) {
    Value eps = kUnbounded;
    KnnSink sink{k, eps, {}};
    Traversal<KnnSink> t(index, query, eps, sink, r.stats, nullptr);
    t.run();
    r.hits = std::move(sink.heap);
  });
  if (all_ties && result.hits.size() == k) {
    Value kth = std::max_element(result.hits.begin(), result.hits.end(),
                                 [](const Hit& a, const Hit& b) { return a.value < b.value; })->value;
    SearchResult ties = range_any_length(index, query, kth, nullptr);
    ties.stats += result.stats;
    ties.stats.hits = ties.hits.size();
    result = std::move(ties);
  }
  sort_hits(result.hits);
  return result;
}

SearchResult knn_search(const FSIndex& index, const NormalizedQuery& query, std::size_t k, bool all_ties) {
  if (query.base.length() != index.length())
    throw Error("query length " + std::to_string(query.base.length()) + " != index length " +
                std::to_string(index.length()));
  return knn_search_any_length(index, query, k, all_ties);
}

void denormalize(HitList& hits, Value shift) {
  for (auto& h : hits) h.value += shift;
}

void sort_hits(HitList& hits) {
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.value != b.value ? a.value < b.value : a.ref < b.ref;
  });
}

}  // namespace fsindex
