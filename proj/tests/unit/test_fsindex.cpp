#include <doctest.h>

#include <set>
#include <thread>

#include "fsindex/fsindex.hpp"
#include "testing.hpp"

using namespace fsindex;
using namespace fsindex::testing;

namespace {

const Alphabet kABCD("ABCD");

FragmentDataset cube_dataset() { return extract_fragments(words_db(all_words("ABCD", 3)), kABCD, 3); }

NormalizedQuery toy_query(const std::string& center) {
  return normalize(distance_query(distance_from_score(toy_matrix()), kABCD.encode(center)));
}

}  // namespace

TEST_CASE("build: degenerate and exhaustive datasets") {
  auto empty = extract_fragments(words_db({"AB", "C"}), kABCD, 3);
  auto e = FSIndex::build(empty, toy_scheme());
  CHECK(e.size() == 0);
  CHECK(e.lcp().size() == 1);
  for (auto b : e.bins()) CHECK(b == 0);
  CHECK(audit(e).ok);

  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  CHECK(idx.size() == 64);
  for (std::uint64_t u = 0; u < 8; ++u) CHECK(idx.bin_size(u) == 8);
  CHECK(audit(idx).ok);
}

TEST_CASE("build: duplicates sit next to each other with lcp m") {
  auto ds = extract_fragments(words_db({"AAAA"}), kABCD, 3);
  auto idx = FSIndex::build(ds, toy_scheme());
  REQUIRE(idx.size() == 2);
  CHECK(idx.lcp()[0] == 0);
  CHECK(idx.lcp()[1] == 3);
  CHECK(idx.lcp()[2] == 0);
  CHECK(idx.frag()[0].offset == 0);
  CHECK(idx.frag()[1].offset == 1);
}

TEST_CASE("build: audit passes on random data, including suffix mode") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    auto db = random_db(rng, "ABCD", 40, 1, 40, 0.05);
    auto spec = random_partition_spec(rng, "ABCD", 4, 3);
    auto scheme = parse_partition(spec, kABCD, 4);
    for (bool suffix : {false, true}) {
      auto ds = extract_fragments(db, kABCD, 4, {suffix, 1});
      auto idx = FSIndex::build(ds, scheme);
      auto report = audit(idx);
      CHECK_MESSAGE(report.ok, (report.problems.empty() ? "" : report.problems.front()));
      CHECK(idx.size() == ds.size());
      // Independent check: lcp equals a direct common-prefix count inside bins.
      for (std::size_t j = 1; j < idx.size(); ++j) {
        auto a = idx.fragment_text(idx.frag()[j - 1], idx.fragment_length(idx.frag()[j - 1], 4));
        auto b = idx.fragment_text(idx.frag()[j], idx.fragment_length(idx.frag()[j], 4));
        std::size_t l = 0;
        while (l < a.size() && l < b.size() && a[l] == b[l]) ++l;
        bool same_bin = scheme.bin_of(kABCD.encode(a)) == scheme.bin_of(kABCD.encode(b));
        CHECK(idx.lcp()[j] == (same_bin ? l : 0));
        if (same_bin) CHECK(a <= b);
      }
    }
  }
}

TEST_CASE("audit reports corruption") {
  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  FSIndex::Parts parts{idx.db_ptr(), idx.store_ptr(), idx.scheme(), false, 3,
                       {idx.frag().begin(), idx.frag().end()}, {idx.bins().begin(), idx.bins().end()},
                       {idx.lcp().begin(), idx.lcp().end()}};
  auto swapped = parts;
  std::swap(swapped.frag[0], swapped.frag[63]);
  CHECK_FALSE(audit(FSIndex(swapped)).ok);
  auto bad_lcp = parts;
  bad_lcp.lcp[5] = 3;
  CHECK_FALSE(audit(FSIndex(bad_lcp)).ok);
  auto bad_bin = parts;
  bad_bin.bin[3] = 30;
  CHECK_FALSE(audit(FSIndex(bad_bin)).ok);
}

TEST_CASE("range search on the worked example") {
  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  auto q = toy_query("ABD");
  SearchTrace trace;
  auto r = range_search(idx, q, 7, &trace);

  // alpha=0, beta=1; ranks: aab=1, aba=2, abb=3, bab=5, bba=6, bbb=7
  CHECK(trace.scanned() == std::vector<std::uint64_t>{3, 7});
  auto pruned_ranks = trace.pruned();
  std::set<std::uint64_t> pruned(pruned_ranks.begin(), pruned_ranks.end());
  CHECK(pruned == std::set<std::uint64_t>{1, 2, 5, 6});
  for (const auto& e : trace.events)
    if (e.kind == TraceEvent::Kind::pruned && (e.rank == 5 || e.rank == 6)) CHECK(e.bound == 15);
  CHECK(r.stats.bins_scanned == 2);
  CHECK(r.stats.fragments_scanned == 16);

  auto expected = brute_windows(*idx.db_ptr(), "ABCD", distance_rows(toy_scores(), "ABCD", "ABD"), 7);
  CHECK(triples(r.hits) == expected);
  bool has_cbb = false, has_cad = false;
  for (const auto& h : r.hits) {
    auto t = idx.fragment_text(h.ref, 3);
    has_cbb |= t == "CBB";
    has_cad |= t == "CAD";
  }
  CHECK(has_cbb);
  CHECK_FALSE(has_cad);
}

TEST_CASE("range search with a negative radius evaluates only the root") {
  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  SearchTrace trace;
  auto r = range_search(idx, toy_query("ABD"), -1, &trace);
  CHECK(r.hits.empty());
  CHECK(r.stats.bins_scanned == 0);
  CHECK(trace.scanned().empty());
  CHECK(trace.events.size() == 1);
}

TEST_CASE("range search rejects a length mismatch") {
  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  auto q = normalize(distance_query(distance_from_score(toy_matrix()), kABCD.encode("ABDA")));
  CHECK_THROWS_AS(range_search(idx, q, 5), Error);
  CHECK_THROWS_AS(search(idx, q, 5), Error);
  CHECK_THROWS_AS(knn_search_any_length(idx, q, 3), Error);
}

TEST_CASE("process_bin") {
  // Bin of identical fragments: one full evaluation, then shared prefixes.
  auto ds = extract_fragments(words_db({"ABDABDABDABD"}), kABCD, 3);
  auto scheme = toy_scheme();
  auto idx = FSIndex::build(ds, scheme);
  auto q = toy_query("ABD");
  auto u = scheme.bin_of(kABCD.encode("ABD"));
  HitList hits;
  SearchStats st;
  process_bin(idx, u, q, 100, hits, st);
  CHECK(hits.size() == 4);
  CHECK(st.residues_scanned == 3);
  CHECK(st.fragments_scanned == 4);

  // Random bins: same hits as evaluating every fragment in full.
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    auto db = random_db(rng, "ABCD", 30, 5, 30);
    auto d2 = extract_fragments(db, kABCD, 4);
    auto sc = parse_partition("AB,CD", kABCD, 4);
    auto ix = FSIndex::build(d2, sc);
    auto table = random_costs(rng, 4, 4, -5, 10);
    auto nq = normalize(to_query(kABCD, table));
    Value eps = std::uniform_int_distribution<Value>(0, 25)(rng);
    for (std::uint64_t b = 0; b < sc.bin_count(); ++b) {
      HitList h;
      SearchStats s;
      process_bin(ix, b, nq, eps, h, s);
      HitList expect;
      for (std::uint64_t j = ix.bins()[b]; j < ix.bins()[b + 1]; ++j) {
        auto ref = ix.frag()[j];
        Value v = brute_value(table, "ABCD", ix.fragment_text(ref, 4)) - nq.shift;
        if (v <= eps) expect.push_back({ref, v});
      }
      CHECK(triples(h) == triples(expect));
      CHECK(s.residues_scanned <= 4 * s.fragments_scanned);
      CHECK(s.fragments_scanned == ix.bin_size(b));
    }
  }
}

TEST_CASE("range search equals the window oracle") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 40; ++t) {
    const bool amino = t % 2;
    const std::string letters = amino ? std::string(kAminoAcids) : "ABCD";
    Alphabet alphabet(letters);
    const std::size_t m = std::vector<std::size_t>{3, 4, 6}[t % 3];
    auto db = random_db(rng, letters, 50, 1, 60, 0.02);
    auto ds = extract_fragments(db, alphabet, m);
    auto scheme = parse_partition(random_partition_spec(rng, letters, m, amino ? 6 : 3), alphabet, m);
    auto idx = FSIndex::build(ds, scheme);
    auto table = random_costs(rng, m, letters.size(), -3, 9);
    auto q = normalize(to_query(alphabet, table));
    Value raw = std::uniform_int_distribution<Value>(-10, static_cast<Value>(5 * m))(rng);
    SearchTrace trace;
    auto r = range_search(idx, q, raw - q.shift, &trace);
    auto hits = r.hits;
    denormalize(hits, q.shift);
    CHECK(triples(hits) == brute_windows(*db, letters, table, raw));
    CHECK(r.stats.hits == r.hits.size());
    CHECK(r.stats.residues_scanned <= m * r.stats.fragments_scanned);

    // Stats: fragments scanned = total size of the scanned bins.
    std::uint64_t total = 0;
    for (auto u : trace.scanned()) total += idx.bin_size(u);
    CHECK(r.stats.fragments_scanned == total);

    // No false dismissals: every pruned subtree holds nothing within range.
    for (const auto& e : trace.events) {
      if (e.kind != TraceEvent::Kind::pruned) continue;
      CHECK(e.bound > raw - q.shift);
    }
  }
}

TEST_CASE("pruned subtrees contain no qualifying fragment") {
  std::mt19937_64 rng(57);
  Alphabet a("ABCD");
  for (int t = 0; t < 15; ++t) {
    auto ds = extract_fragments(words_db(all_words("ABCD", 3)), a, 3);
    auto scheme = parse_partition(random_partition_spec(rng, "ABCD", 3, 3), a, 3);
    auto idx = FSIndex::build(ds, scheme);
    auto table = random_costs(rng, 3, 4, 0, 9);
    auto q = normalize(to_query(a, table));
    Value eps = std::uniform_int_distribution<Value>(0, 12)(rng);
    SearchTrace trace;
    range_search(idx, q, eps, &trace);
    LowerBoundTable lb(q, scheme);
    for (auto p : trace.pruned()) {
      // Subtree of p: bins that agree with p on positions where p differs
      // from Z, and differ from Z only at positions after p's last change.
      auto pd = scheme.digits(p);
      std::size_t last = 0;
      for (std::size_t i = 0; i < 3; ++i)
        if (pd[i] != lb.root_cluster(i)) last = i;
      for (std::uint64_t u = 0; u < scheme.bin_count(); ++u) {
        auto ud = scheme.digits(u);
        bool inside = true;
        for (std::size_t i = 0; i <= last; ++i) inside &= ud[i] == pd[i];
        if (!inside) continue;
        for (std::uint64_t j = idx.bins()[u]; j < idx.bins()[u + 1]; ++j)
          CHECK(brute_value(table, "ABCD", idx.fragment_text(idx.frag()[j], 3)) - q.shift > eps);
      }
    }
  }
}

TEST_CASE("kNN") {
  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  auto q = toy_query("ABD");
  auto rows = distance_rows(toy_scores(), "ABCD", "ABD");
  std::vector<std::int64_t> all;
  for (const auto& w : all_words("ABCD", 3)) all.push_back(brute_value(rows, "ABCD", w));
  std::sort(all.begin(), all.end());

  auto r10 = knn_search(idx, q, 10);
  CHECK(values(r10.hits) == std::vector<std::int64_t>(all.begin(), all.begin() + 10));
  auto r1 = knn_search(idx, q, 1);
  REQUIRE(r1.hits.size() == 1);
  CHECK(r1.hits[0].value == 0);
  CHECK(idx.fragment_text(r1.hits[0].ref, 3) == "ABD");
  CHECK(knn_search(idx, q, 64).hits.size() == 64);
  CHECK(knn_search(idx, q, 500).hits.size() == 64);
  CHECK_THROWS_AS(knn_search(idx, q, 0), Error);

  // Sorted output.
  for (std::size_t i = 1; i < r10.hits.size(); ++i) CHECK(r10.hits[i - 1].value <= r10.hits[i].value);

  // all_ties returns every occurrence at the k-th value.
  auto kth = all[9];
  auto expected = std::count_if(all.begin(), all.end(), [&](auto v) { return v <= kth; });
  CHECK(static_cast<std::ptrdiff_t>(knn_search(idx, q, 10, true).hits.size()) == expected);
}

TEST_CASE("kNN equals the sorted oracle on random data") {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 30; ++t) {
    const std::string letters = t % 2 ? std::string(kAminoAcids) : "ABCD";
    Alphabet alphabet(letters);
    const std::size_t m = std::vector<std::size_t>{3, 4, 6, 9}[t % 4];
    auto db = random_db(rng, letters, 40, 5, 80);
    auto ds = extract_fragments(db, alphabet, m);
    auto scheme = parse_partition(random_partition_spec(rng, letters, m, t % 2 ? 6 : 3), alphabet, m);
    auto idx = FSIndex::build(ds, scheme);
    auto table = random_costs(rng, m, letters.size(), 0, 12);
    auto q = normalize(to_query(alphabet, table));
    auto everything = values(brute_windows(*db, letters, table, kUnbounded));
    for (std::size_t k : {1u, 10u, 50u}) {
      auto r = knn_search(idx, q, k);
      auto got = values(r.hits);
      for (auto& v : got) v += q.shift;
      std::vector<std::int64_t> want(everything.begin(),
                                     everything.begin() + static_cast<std::ptrdiff_t>(std::min(k, everything.size())));
      CHECK(got == want);
    }
  }
}

TEST_CASE("long and short queries on suffix-mode indexes") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 20; ++t) {
    const std::string letters = t % 2 ? std::string(kAminoAcids) : "ABCD";
    Alphabet alphabet(letters);
    const std::size_t m = 4;
    auto db = random_db(rng, letters, 40, 1, 40, 0.03);
    auto ds = extract_fragments(db, alphabet, m, {true, 1});
    auto scheme = parse_partition(random_partition_spec(rng, letters, m, t % 2 ? 5 : 3), alphabet, m);
    auto idx = FSIndex::build(ds, scheme);
    CHECK(audit(idx).ok);

    for (std::size_t L : {2u, 3u, 4u, 5u, 6u}) {
      auto table = random_costs(rng, L, letters.size(), 0, 8);
      auto q = normalize(to_query(alphabet, table));
      Value raw = std::uniform_int_distribution<Value>(0, static_cast<Value>(4 * L))(rng);
      Value eps = raw - q.shift;
      SearchResult r = L > m ? long_query_search(idx, q, eps) : L < m ? short_query_search(idx, q, eps) : search(idx, q, eps);
      denormalize(r.hits, q.shift);
      CHECK(triples(r.hits) == brute_windows(*db, letters, table, raw));
      auto routed = search(idx, q, eps).hits;
      denormalize(routed, q.shift);
      CHECK(triples(routed) == triples(r.hits));

      auto kn = knn_search_any_length(idx, q, 7);
      denormalize(kn.hits, q.shift);
      auto all = values(brute_windows(*db, letters, table, kUnbounded));
      all.resize(std::min<std::size_t>(7, all.size()));
      CHECK(values(kn.hits) == all);
    }
  }
}

TEST_CASE("variable-length routes need suffix mode and the right length") {
  auto idx = FSIndex::build(cube_dataset(), toy_scheme());
  auto d = distance_from_score(toy_matrix());
  auto q4 = normalize(distance_query(d, kABCD.encode("ABDA")));
  auto q2 = normalize(distance_query(d, kABCD.encode("AB")));
  auto q3 = toy_query("ABD");
  CHECK_THROWS_AS(long_query_search(idx, q4, 5), Error);
  CHECK_THROWS_AS(short_query_search(idx, q2, 5), Error);
  CHECK_THROWS_AS(long_query_search(idx, q2, 5), Error);
  CHECK_THROWS_AS(short_query_search(idx, q4, 5), Error);
  CHECK(triples(long_query_search(idx, q3, 7).hits) == triples(range_search(idx, q3, 7).hits));
  CHECK(triples(short_query_search(idx, q3, 7).hits) == triples(range_search(idx, q3, 7).hits));
}

TEST_CASE("descendant bins of a shallow node are contiguous") {
  Alphabet a("ABCD");
  auto scheme = parse_partition("AB,CD", a, 4);
  for (std::uint8_t d0 = 0; d0 < 2; ++d0)
    for (std::uint8_t d1 = 0; d1 < 2; ++d1) {
      std::vector<std::uint64_t> ranks;
      for (std::uint8_t d2 = 0; d2 < 2; ++d2)
        for (std::uint8_t d3 = 0; d3 < 2; ++d3) ranks.push_back(scheme.rank(std::vector<std::uint8_t>{d0, d1, d2, d3}));
      std::sort(ranks.begin(), ranks.end());
      auto lo = scheme.rank(std::vector<std::uint8_t>{d0, d1, 0, 0});
      CHECK(ranks.front() == lo);
      CHECK(ranks.back() + 1 == lo + scheme.radix(1));
      for (std::size_t i = 1; i < ranks.size(); ++i) CHECK(ranks[i] == ranks[i - 1] + 1);
    }
}

TEST_CASE("a short-query search scans the whole descendant range") {
  auto ds = extract_fragments(words_db(all_words("ABCD", 3)), kABCD, 3, {true, 1});
  auto idx = FSIndex::build(ds, toy_scheme());
  auto d = distance_from_score(toy_matrix());
  auto q = normalize(distance_query(d, kABCD.encode("A")));
  auto r = short_query_search(idx, q, 0);
  // Each word contributes fragments at offsets 0, 1 and 2; 16 of each start with A.
  CHECK(r.hits.size() == 48);
}

TEST_CASE("concurrent searches share one index") {
  std::mt19937_64 rng(81);
  Alphabet alphabet(kAminoAcids);
  auto db = random_db(rng, std::string(kAminoAcids), 200, 20, 200);
  auto ds = extract_fragments(db, alphabet, 6);
  auto idx = FSIndex::build(ds, parse_partition(kPartitionSPEQ06, alphabet, 6));
  auto d = distance_from_score(load_score_matrix(path_in_data("matrices/BLOSUM62"), alphabet));
  std::vector<NormalizedQuery> qs;
  for (int i = 0; i < 8; ++i) {
    std::vector<std::uint8_t> c(6);
    for (auto& x : c) x = static_cast<std::uint8_t>(rng() % 20);
    qs.push_back(normalize(distance_query(d, c)));
  }
  std::vector<std::vector<std::int64_t>> serial, parallel(qs.size());
  for (const auto& q : qs) serial.push_back(values(knn_search(idx, q, 20).hits));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < qs.size(); ++i)
    pool.emplace_back([&, i] { parallel[i] = values(knn_search(idx, qs[i], 20).hits); });
  for (auto& th : pool) th.join();
  CHECK(serial == parallel);
}

TEST_CASE("stats helpers") {
  SearchStats a;
  a.fragments_scanned = 4;
  a.residues_scanned = 6;
  a.query_length = 3;
  CHECK(a.residue_percent() == doctest::Approx(50.0));
  SearchStats b;
  b.fragments_scanned = 1;
  a += b;
  CHECK(a.fragments_scanned == 5);
  CHECK(SearchStats{}.residue_percent() == 0.0);
}
