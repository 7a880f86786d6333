#include "fsindex/bench.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fsindex {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double ms(std::chrono::nanoseconds d) { return static_cast<double>(d.count()) / 1e6; }

template <class Fn>
SearchResult repeated(std::size_t reps, Fn&& fn) {
  SearchResult first = fn();
  if (reps <= 1) return first;
  std::vector<std::chrono::nanoseconds> times{first.stats.elapsed};
  for (std::size_t i = 1; i < reps; ++i) times.push_back(fn().stats.elapsed);
  std::sort(times.begin(), times.end());
  first.stats.elapsed = times[times.size() / 2];
  return first;
}

std::vector<std::pair<FragmentRef, Value>> as_pairs(HitList hits) {
  sort_hits(hits);
  std::vector<std::pair<FragmentRef, Value>> out;
  for (auto& h : hits) out.emplace_back(h.ref, h.value);
  return out;
}

BenchRow measure(const FSIndex& index, const NormalizedQuery& q, std::size_t qi, std::size_t k,
                 const BenchOptions& options, const FlatIndex* flat) {
  BenchRow row;
  row.query = qi;
  row.k = k;
  row.index_size = index.size();
  auto knn = repeated(options.repetitions, [&] { return knn_search_any_length(index, q, k); });
  row.knn = knn.stats;
  row.radius = knn.hits.empty() ? 0 : knn.hits.back().value;
  row.raw_radius = row.radius + q.shift;
  auto range = repeated(options.repetitions, [&] { return search(index, q, row.radius); });
  row.range = range.stats;
  if (options.flat) {
    auto f = repeated(options.repetitions, [&] { return flat_search(*flat, q, row.radius); });
    row.flat = f.stats;
  }
  if (options.oracle) {
    auto expected = window_scan_range(index.store(), q.base, row.radius);
    if (index.suffix_mode() || q.base.length() == index.length()) {
      row.oracle_ok = as_pairs(range.hits) == as_pairs(std::move(expected));
    }
  }
  return row;
}

}  // namespace

bool BenchReport::all_oracles_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.oracle_ok.value_or(true); });
}

std::vector<BenchAggregate> aggregate_rows(const std::vector<BenchRow>& rows) {
  std::map<std::size_t, std::vector<const BenchRow*>> by_k;
  for (const auto& r : rows) by_k[r.k].push_back(&r);

  std::vector<BenchAggregate> out;
  for (const auto& [k, group] : by_k) {
    BenchAggregate a;
    a.k = k;
    a.queries = group.size();
    std::vector<double> bins, frags, fraction, residue, overhead, ratio, radius, hits, knn_ms, range_ms, flat_res,
        range_res;
    for (const auto* r : group) {
      bins.push_back(static_cast<double>(r->range.bins_scanned));
      frags.push_back(static_cast<double>(r->range.fragments_scanned));
      fraction.push_back(r->index_size ? 100.0 * static_cast<double>(r->range.fragments_scanned) /
                                             static_cast<double>(r->index_size)
                                       : 0.0);
      residue.push_back(r->range.residue_percent());
      if (r->range.hits > 0)
        overhead.push_back(static_cast<double>(r->range.fragments_scanned) / static_cast<double>(r->range.hits));
      if (r->range.bins_scanned > 0)
        ratio.push_back(static_cast<double>(r->knn.bins_scanned) / static_cast<double>(r->range.bins_scanned));
      radius.push_back(static_cast<double>(r->raw_radius));
      hits.push_back(static_cast<double>(r->range.hits));
      knn_ms.push_back(ms(r->knn.elapsed));
      range_ms.push_back(ms(r->range.elapsed));
      range_res.push_back(static_cast<double>(r->range.residues_scanned));
      if (r->flat) flat_res.push_back(static_cast<double>(r->flat->residues_scanned));
      if (r->oracle_ok && !*r->oracle_ok) ++a.oracle_failures;
    }
    a.mean_bins = mean(bins);
    a.median_bins = median(bins);
    a.mean_fragments = mean(frags);
    a.median_fragments = median(frags);
    a.mean_fraction_scanned = mean(fraction);
    a.mean_residue_percent = mean(residue);
    a.access_overhead = mean(overhead);
    a.knn_range_bin_ratio = mean(ratio);
    a.mean_radius = mean(radius);
    a.median_radius = median(radius);
    a.mean_hits = mean(hits);
    a.mean_knn_ms = mean(knn_ms);
    a.mean_range_ms = mean(range_ms);
    if (flat_res.size() == group.size()) {
      a.mean_flat_residues = mean(flat_res);
      double range_mean = mean(range_res);
      if (range_mean > 0) a.flat_residue_ratio = *a.mean_flat_residues / range_mean;
    }
    out.push_back(a);
  }
  return out;
}

BenchReport run_bench(const FSIndex& index, const std::vector<NormalizedQuery>& queries, const BenchOptions& options,
                      const FlatIndex* flat) {
  if (options.ks.empty()) throw Error("bench needs at least one k");
  for (auto k : options.ks)
    if (k == 0) throw Error("k must be at least 1");
  if (options.flat && !flat) throw Error("flat comparison requested without a flat index");

  BenchReport report;
  const std::size_t tasks = queries.size() * options.ks.size();
  report.rows.resize(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      try {
        std::size_t qi = t / options.ks.size();
        report.rows[t] = measure(index, queries[qi], qi, options.ks[t % options.ks.size()], options, flat);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(tasks, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

std::string bench_rows_tsv(const BenchReport& report) {
  std::ostringstream out;
  out << "query\tk\tradius\thits\tknn_nodes\tknn_bins\tknn_fragments\tknn_residues\tknn_ms\trange_nodes\trange_bins"
         "\trange_fragments\trange_residues\tresidue_pct\trange_ms\tflat_fragments\tflat_residues\toracle\n";
  for (const auto& r : report.rows) {
    out << r.query << '\t' << r.k << '\t' << r.raw_radius << '\t' << r.range.hits << '\t' << r.knn.nodes_visited << '\t'
        << r.knn.bins_scanned << '\t' << r.knn.fragments_scanned << '\t' << r.knn.residues_scanned << '\t'
        << ms(r.knn.elapsed) << '\t' << r.range.nodes_visited << '\t' << r.range.bins_scanned << '\t'
        << r.range.fragments_scanned << '\t' << r.range.residues_scanned << '\t' << r.range.residue_percent() << '\t'
        << ms(r.range.elapsed) << '\t';
    if (r.flat) out << r.flat->fragments_scanned << '\t' << r.flat->residues_scanned << '\t';
    else out << "-\t-\t";
    out << (r.oracle_ok ? (*r.oracle_ok ? "ok" : "FAIL") : "-") << '\n';
  }
  return out.str();
}

std::string bench_aggregate_json(const BenchReport& report, const std::string& extra) {
  nlohmann::ordered_json j;
  j["schema"] = "fsindex-bench";
  j["version"] = kBenchSchemaVersion;
  auto more = nlohmann::ordered_json::parse(extra);
  if (more.is_object())
    for (auto& [key, value] : more.items()) j[key] = value;
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    nlohmann::ordered_json o;
    o["k"] = a.k;
    o["queries"] = a.queries;
    o["mean_bins_scanned"] = a.mean_bins;
    o["median_bins_scanned"] = a.median_bins;
    o["mean_fragments_scanned"] = a.mean_fragments;
    o["median_fragments_scanned"] = a.median_fragments;
    o["mean_percent_fragments_scanned"] = a.mean_fraction_scanned;
    o["mean_residue_percent"] = a.mean_residue_percent;
    o["access_overhead"] = a.access_overhead;
    o["knn_range_bin_ratio"] = a.knn_range_bin_ratio;
    o["mean_radius"] = a.mean_radius;
    o["median_radius"] = a.median_radius;
    o["mean_hits"] = a.mean_hits;
    o["mean_knn_ms"] = a.mean_knn_ms;
    o["mean_range_ms"] = a.mean_range_ms;
    if (a.mean_flat_residues) o["mean_flat_residues"] = *a.mean_flat_residues;
    if (a.flat_residue_ratio) o["flat_residue_ratio"] = *a.flat_residue_ratio;
    o["oracle_failures"] = a.oracle_failures;
    j["aggregates"].push_back(o);
  }
  return j.dump(2);
}

}  // namespace fsindex
