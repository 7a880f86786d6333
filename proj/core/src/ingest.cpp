#include "fsindex/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fsindex {

void SequenceDB::add(std::string id, std::string residues) {
  if (residues.empty()) throw Error("sequence '" + id + "' is empty");
  if (!ids_.insert(id).second) throw Error("duplicate sequence identifier '" + id + "'");
  total_residues_ += residues.size();
  records_.push_back({std::move(id), std::move(residues)});
}

SequenceDB parse_fasta(std::istream& in) {
  SequenceDB db;
  std::string line, id, residues;
  bool in_record = false;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!in_record) return;
    if (residues.empty()) throw Error("FASTA record '" + id + "' has an empty sequence");
    db.add(std::move(id), std::move(residues));
    id.clear();
    residues.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.front() == '>') {
      flush();
      std::size_t b = 1;
      while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
      std::size_t e = b;
      while (e < line.size() && !std::isspace(static_cast<unsigned char>(line[e]))) ++e;
      id = line.substr(b, e - b);
      if (id.empty()) throw Error("FASTA line " + std::to_string(line_no) + ": header without identifier");
      in_record = true;
      continue;
    }
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (!in_record) throw Error("FASTA line " + std::to_string(line_no) + ": sequence data before first header");
      residues.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  flush();
  if (db.size() == 0) throw Error("FASTA input is empty");
  return db;
}

SequenceDB parse_fasta(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_fasta(in);
}

SequenceDB load_fasta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open FASTA file " + path);
  try {
    return parse_fasta(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

ResidueStore::ResidueStore(const SequenceDB& db, const Alphabet& alphabet) : alphabet_(alphabet) {
  codes_.reserve(db.total_residues() + db.size());
  starts_.reserve(db.size());
  lengths_.reserve(db.size());
  for (const auto& rec : db.records()) {
    if (rec.residues.size() > 0xFFFFFFF0u) throw Error("sequence '" + rec.id + "' is too long");
    starts_.push_back(codes_.size());
    lengths_.push_back(static_cast<std::uint32_t>(rec.residues.size()));
    for (char c : rec.residues) codes_.push_back(alphabet_.code(c));
    codes_.push_back(kNoLetter);
  }
  if (starts_.size() > 0xFFFFFFFFu) throw Error("too many sequences");
}

std::size_t ResidueStore::clean_length(FragmentRef ref, std::size_t cap) const {
  const std::uint8_t* p = at(ref);
  std::size_t n = 0;
  while (n < cap && p[n] != kNoLetter) ++n;
  return n;
}

std::string FragmentDataset::text(FragmentRef ref, std::size_t len) const {
  return store->alphabet().decode({store->at(ref), len});
}

FragmentDataset extract_fragments(std::shared_ptr<const SequenceDB> db, const Alphabet& alphabet, std::size_t length,
                                  ExtractOptions options) {
  if (length == 0) throw Error("fragment length must be at least 1");
  if (options.suffix_mode && options.suffix_floor == 0) throw Error("suffix floor must be at least 1");

  FragmentDataset ds;
  ds.store = std::make_shared<const ResidueStore>(*db, alphabet);
  ds.db = std::move(db);
  ds.length = length;
  ds.suffix_mode = options.suffix_mode;
  ds.suffix_floor = options.suffix_mode ? std::min(options.suffix_floor, length) : length;

  const auto& store = *ds.store;
  for (std::size_t s = 0; s < store.sequence_count(); ++s) {
    auto seq = store.sequence(s);
    // run = clean letters from p to the next rejected letter or the end.
    std::size_t run = 0;
    std::vector<std::uint32_t> runs(seq.size());
    for (std::size_t p = seq.size(); p-- > 0;) {
      run = seq[p] == kNoLetter ? 0 : run + 1;
      runs[p] = static_cast<std::uint32_t>(run);
    }
    for (std::size_t p = 0; p < seq.size(); ++p) {
      if (p + length <= seq.size() && runs[p] < length) ++ds.rejected_windows;
      if (runs[p] >= ds.suffix_floor)
        ds.fragments.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p)});
    }
  }
  return ds;
}

std::string dataset_manifest_json(const FragmentDataset& dataset) {
  nlohmann::ordered_json j;
  j["records"] = dataset.db->size();
  j["residues"] = dataset.db->total_residues();
  j["fragment_length"] = dataset.length;
  j["suffix_mode"] = dataset.suffix_mode;
  j["fragments"] = dataset.size();
  j["rejected_windows"] = dataset.rejected_windows;
  return j.dump();
}

std::vector<double> composition(const ResidueStore& store) {
  std::vector<double> counts(store.alphabet().size(), 0.0);
  double total = 0;
  for (std::size_t s = 0; s < store.sequence_count(); ++s)
    for (auto c : store.sequence(s))
      if (c != kNoLetter) {
        counts[c] += 1;
        total += 1;
      }
  if (total == 0) throw Error("no alphabet letters to compute a composition from");
  for (auto& c : counts) c /= total;
  return counts;
}

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::uint64_t kLattice = std::uint64_t{1} << 32;

// Uniform integer in [0, bound) from one 64-bit draw (multiply-shift).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<u128>(rng()) * bound) >> 64);
}

}  // namespace

std::vector<std::vector<std::uint8_t>> sample_background_queries(std::span<const double> frequencies, std::size_t length,
                                                                 std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error("query count must be at least 1");
  if (frequencies.empty() || frequencies.size() >= kNoLetter) throw Error("bad frequency vector size");
  double sum = 0;
  for (double f : frequencies) {
    if (!(f >= 0)) throw Error("letter frequencies must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("letter frequencies must sum to 1");

  // Integer cumulative weights summing exactly to 2^32.
  std::vector<std::uint64_t> cumulative(frequencies.size());
  std::uint64_t acc = 0;
  for (std::size_t a = 0; a < frequencies.size(); ++a) {
    acc += static_cast<std::uint64_t>(std::llround(frequencies[a] * static_cast<double>(kLattice)));
    cumulative[a] = acc;
  }
  std::size_t last = frequencies.size() - 1;
  while (last > 0 && frequencies[last] == 0) --last;
  for (std::size_t a = last; a < cumulative.size(); ++a) cumulative[a] = kLattice;

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::uint8_t>> out(count, std::vector<std::uint8_t>(length));
  for (auto& q : out)
    for (auto& letter : q) {
      std::uint64_t u = rng() >> 32;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      letter = static_cast<std::uint8_t>(it - cumulative.begin());
    }
  return out;
}

std::vector<std::vector<std::uint8_t>> sample_window_queries(const ResidueStore& store, std::size_t length,
                                                             std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error("query count must be at least 1");
  if (length == 0) throw Error("query length must be at least 1");
  std::vector<FragmentRef> windows;
  for (std::size_t s = 0; s < store.sequence_count(); ++s) {
    auto seq = store.sequence(s);
    std::size_t p = 0;
    while (p + length <= seq.size()) {
      FragmentRef ref{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p)};
      if (store.clean_length(ref, length) == length) {
        windows.push_back(ref);
        p += length;
      } else {
        ++p;
      }
    }
  }
  if (count > windows.size())
    throw Error("requested " + std::to_string(count) + " held-out windows but only " + std::to_string(windows.size()) +
                " non-overlapping windows are available");

  std::mt19937_64 rng(seed);
  for (std::size_t i = windows.size(); i > 1; --i) std::swap(windows[i - 1], windows[bounded(rng, i)]);

  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* p = store.at(windows[i]);
    out.emplace_back(p, p + length);
  }
  return out;
}

}  // namespace fsindex
