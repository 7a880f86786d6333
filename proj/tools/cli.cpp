#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsindex/baselines.hpp"
#include "fsindex/bench.hpp"
#include "fsindex/fsindex.hpp"
#include "fsindex/ingest.hpp"
#include "fsindex/serialize.hpp"

namespace fsindex::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Letters of a matrix file's header row. The 20 amino acids when all are
// present, otherwise every alphabetic header letter in file order.
Alphabet matrix_alphabet(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string letters;
    std::istringstream row(line);
    std::string tok;
    while (row >> tok)
      if (tok.size() == 1 && std::isalpha(static_cast<unsigned char>(tok[0])))
        letters.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0]))));
    bool amino = std::all_of(kAminoAcids.begin(), kAminoAcids.end(),
                             [&](char c) { return letters.find(c) != std::string::npos; });
    if (amino) return Alphabet(kAminoAcids);
    return Alphabet(letters);
  }
  throw Error("matrix file has no header row");
}

ScoreMatrix load_matrix(const std::string& path, const std::string& alphabet_override, Alphabet* alphabet_out) {
  std::string text = read_file(path);
  try {
    Alphabet a = alphabet_override.empty() ? matrix_alphabet(text) : Alphabet(alphabet_override);
    if (alphabet_out) *alphabet_out = a;
    return parse_score_matrix(text, a);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string resolve_partition(const std::string& spec) {
  if (spec == "SPEQ06") return std::string(kPartitionSPEQ06);
  if (spec == "SPEQ09") return std::string(kPartitionSPEQ09);
  if (spec == "SPEQ12") return std::string(kPartitionSPEQ12);
  return spec;
}

DistanceMatrix metric_matrix(const ScoreMatrix& s, const std::string& metric) {
  DistanceMatrix d = distance_from_score(s);
  if (metric == "quasi") return d;
  if (metric == "maximum") return symmetrize(d, Symmetrization::maximum);
  return symmetrize(d, Symmetrization::average);
}

std::ostream& choose_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open " + path + " for writing");
  return file;
}

json stats_json(const SearchStats& s) {
  json j;
  j["nodes_visited"] = s.nodes_visited;
  j["bins_scanned"] = s.bins_scanned;
  j["fragments_scanned"] = s.fragments_scanned;
  j["residues_scanned"] = s.residues_scanned;
  j["hits"] = s.hits;
  j["residue_percent"] = s.residue_percent();
  j["elapsed_ms"] = static_cast<double>(s.elapsed.count()) / 1e6;
  return j;
}

// ---- build ----

struct BuildArgs {
  std::string fasta, matrix, partition, alphabet, out;
  std::size_t length = 0;
  bool suffix = false;
  std::size_t floor = 1;
};

int cmd_build(const BuildArgs& a, std::ostream& out) {
  Alphabet alphabet("A");
  load_matrix(a.matrix, a.alphabet, &alphabet);
  auto scheme = parse_partition(resolve_partition(a.partition), alphabet, a.length);
  auto db = std::make_shared<const SequenceDB>(load_fasta(a.fasta));
  auto dataset = extract_fragments(db, alphabet, a.length, {a.suffix, a.floor});
  auto index = FSIndex::build(dataset, scheme);
  save_index(index, a.out);

  std::uint64_t empty = 0;
  for (std::uint64_t u = 0; u < index.bin_count(); ++u) empty += index.bin_size(u) == 0;
  json j = json::parse(dataset_manifest_json(dataset));
  j["n"] = index.size();
  j["bins"] = index.bin_count();
  j["empty_bins"] = empty;
  j["index_bytes"] = index.index_bytes();
  j["file_bytes"] = std::filesystem::file_size(a.out);
  j["partition"] = scheme.to_spec();
  j["out"] = a.out;
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---- search ----

struct SearchArgs {
  std::string index, matrix, query, pssm, orientation = "cost", metric = "quasi", format = "tsv", out,
      mode;
  std::optional<Value> radius, threshold;
  std::optional<std::size_t> k;
  bool all_ties = false;
};

int cmd_search(const SearchArgs& a, std::ostream& stdout_stream, std::ostream& err) {
  FSIndex index = load_index(a.index);
  const Alphabet& alphabet = index.alphabet();

  std::optional<QueryFunction> f;
  std::optional<ScoreMatrix> scores;
  std::vector<std::uint8_t> center;
  int scale = 1;
  if (!a.query.empty()) {
    if (a.matrix.empty()) throw Error("--query needs --matrix");
    scores = load_matrix(a.matrix, std::string(alphabet.letters()), nullptr);
    auto d = metric_matrix(*scores, a.metric);
    scale = d.scale();
    center = alphabet.encode(a.query);
    f = distance_query(d, center);
  } else {
    auto orient = a.orientation == "score" ? PssmOrientation::score : PssmOrientation::cost;
    f = parse_pssm(read_file(a.pssm), alphabet, orient);
  }

  const std::string mode = !a.mode.empty() ? a.mode : (a.k ? "knn" : "range");
  NormalizedQuery q = normalize(*f);
  SearchResult result;
  Value raw_radius = 0;
  if (mode == "knn") {
    if (!a.k) throw Error("knn search needs --k");
    result = knn_search_any_length(index, q, *a.k, a.all_ties);
  } else {
    if (a.radius && a.threshold) throw Error("give either --radius or --similarity-threshold, not both");
    if (a.threshold) {
      if (!scores || a.metric != "quasi") throw Error("--similarity-threshold needs a literal query and --metric quasi");
      raw_radius = similarity_threshold_to_radius(*scores, center, *a.threshold);
    } else if (a.radius) {
      raw_radius = *a.radius;
    } else {
      throw Error("range search needs --radius or --similarity-threshold");
    }
    // Keep eps - shift from underflowing for radii near the representable floor.
    Value eps = raw_radius < -kUnbounded + q.shift ? -kUnbounded : raw_radius - q.shift;
    result = search(index, q, eps);
    sort_hits(result.hits);
  }
  HitList hits = result.hits;
  denormalize(hits, q.shift);

  // Spot audit: reported values against direct evaluation.
  const std::size_t L = f->length();
  const std::size_t step = std::max<std::size_t>(1, hits.size() / 32);
  for (std::size_t i = 0; i < hits.size(); i += step) {
    Value direct = f->evaluate({index.store().at(hits[i].ref), L});
    if (direct != hits[i].value) {
      err << "assertion failed: hit value " << hits[i].value << " differs from direct evaluation " << direct << '\n';
      return kExitAssertion;
    }
  }

  std::ofstream file;
  std::ostream& out = choose_out(a.out, file, stdout_stream);
  const auto& db = index.db();
  if (a.format == "json") {
    json j;
    j["mode"] = mode;
    j["query_length"] = L;
    j["metric"] = scores ? a.metric : "pssm";
    j["scale"] = scale;
    if (mode == "range") j["radius"] = raw_radius;
    else j["k"] = *a.k;
    j["shift"] = q.shift;
    j["hits"] = json::array();
    std::size_t rank = 0;
    for (const auto& h : hits) {
      json row;
      row["sequence"] = db[h.ref.sequence].id;
      row["offset"] = h.ref.offset;
      row["fragment"] = index.fragment_text(h.ref, L);
      row["value"] = h.value;
      row["rank"] = ++rank;
      j["hits"].push_back(row);
    }
    j["stats"] = stats_json(result.stats);
    out << j.dump(2) << '\n';
  } else {
    out << "sequence\toffset\tfragment\tvalue\trank\n";
    std::size_t rank = 0;
    for (const auto& h : hits)
      out << db[h.ref.sequence].id << '\t' << h.ref.offset << '\t' << index.fragment_text(h.ref, L) << '\t' << h.value
          << '\t' << ++rank << '\n';
    auto s = stats_json(result.stats);
    out << "# mode\t" << mode << '\n';
    if (mode == "range") out << "# radius\t" << raw_radius << '\n';
    else out << "# k\t" << *a.k << '\n';
    out << "# shift\t" << q.shift << '\n';
    out << "# scale\t" << scale << '\n';
    for (auto& [key, value] : s.items()) out << "# " << key << '\t' << value.dump() << '\n';
  }
  return kExitOk;
}

// ---- bench ----

struct BenchArgs {
  std::string index, matrix, source = "background", metric = "quasi", rows, out;
  std::size_t queries = 100, repetitions = 1, threads = 1, query_length = 0;
  std::uint64_t seed = 1;
  std::vector<std::size_t> ks{1};
  bool flat = false, oracle = false, no_assert = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& stdout_stream, std::ostream& err) {
  FSIndex index = load_index(a.index);
  const Alphabet& alphabet = index.alphabet();
  auto scores = load_matrix(a.matrix, std::string(alphabet.letters()), nullptr);
  auto d = metric_matrix(scores, a.metric);
  const std::size_t L = a.query_length ? a.query_length : index.length();

  std::vector<std::vector<std::uint8_t>> centers;
  if (a.source == "windows") {
    centers = sample_window_queries(index.store(), L, a.queries, a.seed);
  } else {
    auto freqs = composition(index.store());
    centers = sample_background_queries(freqs, L, a.queries, a.seed);
  }
  std::vector<NormalizedQuery> queries;
  queries.reserve(centers.size());
  for (const auto& c : centers) queries.push_back(normalize(distance_query(d, c)));

  BenchOptions options;
  options.ks = a.ks;
  options.repetitions = a.repetitions;
  options.flat = a.flat;
  options.oracle = a.oracle;
  options.threads = a.threads;

  std::optional<FlatIndex> flat;
  if (a.flat) {
    if (L != index.length()) throw Error("--flat needs queries of the index length");
    FragmentDataset ds;
    ds.db = index.db_ptr();
    ds.store = index.store_ptr();
    ds.length = index.length();
    ds.suffix_mode = index.suffix_mode();
    ds.suffix_floor = index.suffix_floor();
    ds.fragments.assign(index.frag().begin(), index.frag().end());
    std::sort(ds.fragments.begin(), ds.fragments.end());
    flat = flat_build(ds);
  }

  BenchReport report = run_bench(index, queries, options, flat ? &*flat : nullptr);
  if (a.oracle && !report.all_oracles_ok()) {
    std::size_t failures = 0;
    for (const auto& agg : report.aggregates) failures += agg.oracle_failures;
    err << "assertion failed: " << failures << " queries disagree with the oracle\n";
    if (!a.no_assert) return kExitAssertion;
  }

  if (!a.rows.empty()) {
    std::ofstream rows(a.rows, std::ios::binary | std::ios::trunc);
    if (!rows) throw Error("cannot open " + a.rows + " for writing");
    rows << bench_rows_tsv(report);
  }
  json extra;
  extra["index"] = a.index;
  extra["n"] = index.size();
  extra["bins"] = index.bin_count();
  extra["length"] = index.length();
  extra["query_length"] = L;
  extra["queries"] = a.queries;
  extra["seed"] = a.seed;
  extra["query_source"] = a.source;
  extra["metric"] = a.metric;
  extra["scale"] = d.scale();
  std::ofstream file;
  std::ostream& out = choose_out(a.out, file, stdout_stream);
  out << bench_aggregate_json(report, extra.dump()) << '\n';
  return kExitOk;
}

// ---- verify-matrix ----

struct VerifyArgs {
  std::string matrix, alphabet, format = "text";
  std::size_t samples = 5;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  Alphabet alphabet("A");
  auto s = load_matrix(a.matrix, a.alphabet, &alphabet);
  json j;
  j["matrix"] = a.matrix;
  j["letters"] = std::string(alphabet.letters());
  j["score_symmetric"] = s.is_symmetric();
  try {
    auto d = distance_from_score(s);
    auto r = check_quasi_metric(d);
    j["nonnegative"] = r.nonneg_ok;
    j["separation"] = r.separation_ok;
    j["triangle_violations"] = r.triangle_violations.size();
    j["distinct_violations"] = r.distinct_violations();
    j["quasi_metric"] = r.is_quasi_metric;
    j["distance_symmetric"] = r.is_symmetric;
    j["coweightable"] = is_coweightable(s, d);
    j["samples"] = json::array();
    for (std::size_t i = 0; i < std::min(a.samples, r.triangle_violations.size()); ++i) {
      const auto& v = r.triangle_violations[i];
      j["samples"].push_back({{"a", std::string(1, alphabet.letter(v.a))},
                              {"b", std::string(1, alphabet.letter(v.b))},
                              {"c", std::string(1, alphabet.letter(v.c))},
                              {"slack", v.slack}});
    }
  } catch (const Error& e) {
    j["nonnegative"] = false;
    j["quasi_metric"] = false;
    j["error"] = e.what();
  }

  if (a.format == "json") {
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  auto yn = [](const json& v) { return v.get<bool>() ? "yes" : "no"; };
  out << "matrix\t" << a.matrix << '\n';
  out << "letters\t" << j["letters"].get<std::string>() << '\n';
  out << "score symmetric\t" << yn(j["score_symmetric"]) << '\n';
  if (j.contains("error")) {
    out << "quasi-metric\tno\n";
    out << "error\t" << j["error"].get<std::string>() << '\n';
    return kExitOk;
  }
  out << "non-negative\t" << yn(j["nonnegative"]) << '\n';
  out << "separation\t" << yn(j["separation"]) << '\n';
  out << "triangle violations\t" << j["triangle_violations"] << '\n';
  out << "distinct violations\t" << j["distinct_violations"] << '\n';
  out << "quasi-metric\t" << yn(j["quasi_metric"]) << '\n';
  out << "distance symmetric\t" << yn(j["distance_symmetric"]) << '\n';
  out << "co-weightable\t" << yn(j["coweightable"]) << '\n';
  for (const auto& v : j["samples"])
    out << "violation\t" << v["a"].get<std::string>() << ' ' << v["b"].get<std::string>() << ' '
        << v["c"].get<std::string>() << "\tslack " << v["slack"] << '\n';
  return kExitOk;
}

// ---- stats ----

int cmd_stats(const std::string& path, std::ostream& out) {
  FSIndex index = load_index(path);
  std::uint64_t empty = 0, largest = 0;
  for (std::uint64_t u = 0; u < index.bin_count(); ++u) {
    auto sz = index.bin_size(u);
    empty += sz == 0;
    largest = std::max(largest, sz);
  }
  const std::uint64_t occupied = index.bin_count() - empty;
  json j;
  j["index"] = path;
  j["records"] = index.db().size();
  j["residues"] = index.db().total_residues();
  j["length"] = index.length();
  j["n"] = index.size();
  j["bins"] = index.bin_count();
  j["empty_bins"] = empty;
  j["occupied_bins"] = occupied;
  j["largest_bin"] = largest;
  j["mean_occupied_bin"] = occupied ? static_cast<double>(index.size()) / static_cast<double>(occupied) : 0.0;
  j["suffix_mode"] = index.suffix_mode();
  j["suffix_floor"] = index.suffix_floor();
  j["alphabet"] = std::string(index.alphabet().letters());
  j["partition"] = index.scheme().to_spec();
  j["index_bytes"] = index.index_bytes();
  j["audit"] = audit(index).ok;
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FSIndex: exact similarity search over fixed-length protein fragments", "fsindex"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fsindex 1.0.0");

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build an index from a FASTA file");
  b->add_option("--fasta", build.fasta, "Input FASTA")->required()->check(CLI::ExistingFile);
  b->add_option("--matrix", build.matrix, "Score matrix (NCBI layout); fixes the alphabet")->required()->check(CLI::ExistingFile);
  b->add_option("--partition", build.partition, "Clusters per position, or SPEQ06/SPEQ09/SPEQ12")->required();
  b->add_option("-m,--length", build.length, "Fragment length")->required()->check(CLI::PositiveNumber);
  b->add_flag("--suffix", build.suffix, "Also index suffixes shorter than the fragment length");
  b->add_option("--suffix-floor", build.floor, "Shortest suffix kept in suffix mode")->check(CLI::PositiveNumber);
  b->add_option("--alphabet", build.alphabet, "Alphabet letters (default: from the matrix header)");
  b->add_option("-o,--out", build.out, "Index file to write")->required();

  SearchArgs search;
  std::int64_t radius = 0, threshold = 0;
  std::size_t k = 0;
  auto* s = app.add_subcommand("search", "Range or kNN search");
  s->add_option("--index", search.index, "Index file")->required()->check(CLI::ExistingFile);
  s->add_option("--matrix", search.matrix, "Score matrix for literal queries")->check(CLI::ExistingFile);
  auto* q_opt = s->add_option("-q,--query", search.query, "Query fragment");
  auto* p_opt = s->add_option("--pssm", search.pssm, "PSSM file")->check(CLI::ExistingFile);
  q_opt->excludes(p_opt);
  s->add_option("--pssm-orientation", search.orientation, "cost or score")
      ->check(CLI::IsMember({"cost", "score"}));
  s->add_option("--mode", search.mode, "range or knn (default: knn when --k is given)")
      ->check(CLI::IsMember({"range", "knn"}));
  auto* r_opt = s->add_option("-r,--radius", radius, "Range radius on the query value");
  auto* t_opt = s->add_option("-t,--similarity-threshold", threshold, "Minimum similarity score");
  r_opt->excludes(t_opt);
  auto* k_opt = s->add_option("-k,--k", k, "Neighbours")->check(CLI::PositiveNumber);
  s->add_flag("--all-ties", search.all_ties, "Return every hit tied at the k-th value");
  s->add_option("--metric", search.metric, "quasi, maximum or average")
      ->check(CLI::IsMember({"quasi", "maximum", "average"}));
  s->add_option("--format", search.format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));
  s->add_option("-o,--out", search.out, "Write results here instead of stdout");

  BenchArgs bench;
  auto* bn = app.add_subcommand("bench", "kNN-then-range benchmark over random queries");
  bn->add_option("--index", bench.index, "Index file")->required()->check(CLI::ExistingFile);
  bn->add_option("--matrix", bench.matrix, "Score matrix")->required()->check(CLI::ExistingFile);
  bn->add_option("--queries", bench.queries, "Number of queries")->check(CLI::PositiveNumber);
  bn->add_option("--seed", bench.seed, "Random seed");
  bn->add_option("-k,--k", bench.ks, "Neighbour counts")->delimiter(',')->check(CLI::PositiveNumber);
  bn->add_option("--query-source", bench.source, "background or windows")
      ->check(CLI::IsMember({"background", "windows"}));
  bn->add_option("--query-length", bench.query_length, "Query length (default: index length)");
  bn->add_option("--metric", bench.metric, "quasi, maximum or average")
      ->check(CLI::IsMember({"quasi", "maximum", "average"}));
  bn->add_option("--repetitions", bench.repetitions, "Timed runs per search")->check(CLI::PositiveNumber);
  bn->add_option("--threads", bench.threads, "Worker threads")->check(CLI::PositiveNumber);
  bn->add_flag("--flat", bench.flat, "Also run the single-bin flat scan");
  bn->add_flag("--oracle", bench.oracle, "Check every range result against a linear scan");
  bn->add_flag("--no-assert", bench.no_assert, "Report even when oracle checks fail");
  bn->add_option("--rows", bench.rows, "Per-query TSV file");
  bn->add_option("-o,--out", bench.out, "Aggregate JSON file (default: stdout)");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify-matrix", "Quasi-metric audit of a score matrix");
  v->add_option("--matrix,matrix", verify.matrix, "Score matrix")->required()->check(CLI::ExistingFile);
  v->add_option("--alphabet", verify.alphabet, "Alphabet letters (default: from the matrix header)");
  v->add_option("--format", verify.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  v->add_option("--samples", verify.samples, "Violating triples to list");

  std::string stats_index;
  auto* st = app.add_subcommand("stats", "Summary of an index file");
  st->add_option("--index,index", stats_index, "Index file")->required()->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (b->parsed()) return cmd_build(build, out);
    if (s->parsed()) {
      if (!r_opt->empty()) search.radius = radius;
      if (!t_opt->empty()) search.threshold = threshold;
      if (!k_opt->empty()) search.k = k;
      if (search.query.empty() && search.pssm.empty()) throw Error("search needs --query or --pssm");
      return cmd_search(search, out, err);
    }
    if (bn->parsed()) return cmd_bench(bench, out, err);
    if (v->parsed()) return cmd_verify(verify, out);
    if (st->parsed()) return cmd_stats(stats_index, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fsindex::cli
