#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fsindex/baselines.hpp"
#include "fsindex/fsindex.hpp"

namespace fsindex {

inline constexpr int kBenchSchemaVersion = 1;

struct BenchOptions {
  std::vector<std::size_t> ks{1};
  std::size_t repetitions = 1;  ///< timed runs per search; the median time is kept
  bool flat = false;            ///< also run flat_search at each radius
  bool oracle = false;          ///< compare range hits with a window scan
  std::size_t threads = 1;
};

/// One (query, k) measurement: kNN to find the k-th value, then a range
/// search at that value.
struct BenchRow {
  std::size_t query = 0;
  std::size_t k = 0;
  Value radius = 0;      ///< normalized radius used for the range search
  Value raw_radius = 0;  ///< radius + shift
  SearchStats knn;
  SearchStats range;
  std::optional<SearchStats> flat;
  std::optional<bool> oracle_ok;
  std::uint64_t index_size = 0;  ///< fragments in the index, for scan fractions
};

struct BenchAggregate {
  std::size_t k = 0;
  std::size_t queries = 0;
  double mean_bins = 0, median_bins = 0;
  double mean_fragments = 0, median_fragments = 0;
  double mean_fraction_scanned = 0;  ///< percent of the index
  double mean_residue_percent = 0;
  double access_overhead = 0;        ///< mean of fragments scanned / hits
  double knn_range_bin_ratio = 0;    ///< mean of per-query kNN bins / range bins
  double mean_radius = 0, median_radius = 0;
  double mean_hits = 0;
  double mean_knn_ms = 0, mean_range_ms = 0;
  std::optional<double> mean_flat_residues;
  std::optional<double> flat_residue_ratio;  ///< mean flat residues / mean range residues
  std::size_t oracle_failures = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchAggregate> aggregates;
  bool all_oracles_ok() const;
};

/// Aggregates per k, computed from the rows alone.
std::vector<BenchAggregate> aggregate_rows(const std::vector<BenchRow>& rows);

/// Runs every query against every k. `flat` must be non-null when
/// options.flat is set. Queries must match the index length.
BenchReport run_bench(const FSIndex& index, const std::vector<NormalizedQuery>& queries, const BenchOptions& options,
                      const FlatIndex* flat = nullptr);

/// Fixed column order; header line first.
std::string bench_rows_tsv(const BenchReport& report);
/// {"schema": "fsindex-bench", "version": ..., "aggregates": [...]}; `extra`
/// is merged in at the top level when it is a JSON object.
std::string bench_aggregate_json(const BenchReport& report, const std::string& extra = "{}");

}  // namespace fsindex
