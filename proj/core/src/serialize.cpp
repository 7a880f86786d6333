#include "fsindex/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace fsindex {

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'S', 'I', 'N', 'D', 'E', 'X', '\0'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T r{};
    for (std::size_t i = 0; i < sizeof(T); ++i) r = static_cast<T>((r << 8) | ((v >> (8 * i)) & 0xFF));
    return r;
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class T>
  void num(T v) {
    v = to_le(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(std::string_view s) {
    if (s.size() > 0xFFFFFFFFu) throw Error("string too long to serialize");
    num<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <class T>
  void array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
      out_.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    } else {
      for (T v : values) num(v);
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T num() {
    T v{};
    raw(&v, sizeof v);
    return to_le(v);
  }
  std::string str(std::size_t limit) {
    auto len = num<std::uint32_t>();
    if (len > limit) throw Error("index file: string field too long");
    std::string s(len, '\0');
    raw(s.data(), len);
    return s;
  }
  template <class T>
  std::vector<T> array(std::uint64_t count) {
    std::vector<T> v;
    // Grow in chunks so a corrupt count fails on truncation, not allocation.
    constexpr std::uint64_t kChunk = std::uint64_t{1} << 20;
    for (std::uint64_t done = 0; done < count;) {
      std::uint64_t step = std::min(kChunk, count - done);
      v.resize(done + step);
      raw(v.data() + done, step * sizeof(T));
      done += step;
    }
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1)
      for (auto& x : v) x = to_le(x);
    return v;
  }

 private:
  void raw(void* dst, std::size_t bytes) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) throw Error("index file is truncated");
  }

  std::istream& in_;
};

}  // namespace

void save_index(const FSIndex& index, std::ostream& out) {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.num<std::uint32_t>(kIndexFormatVersion);
  w.num<std::uint32_t>(static_cast<std::uint32_t>(index.length()));
  w.num<std::uint64_t>(index.size());
  w.num<std::uint64_t>(index.bin_count());
  w.num<std::uint8_t>(index.suffix_mode() ? 1 : 0);
  w.num<std::uint32_t>(static_cast<std::uint32_t>(index.suffix_floor()));
  w.str(index.alphabet().letters());
  w.str(index.scheme().to_spec());
  w.array(index.bins());
  std::vector<std::uint64_t> packed;
  packed.reserve(index.size());
  for (auto r : index.frag()) packed.push_back(r.packed());
  w.array(std::span<const std::uint64_t>(packed));
  w.array(index.lcp());
  const auto& db = index.db();
  w.num<std::uint64_t>(db.size());
  for (const auto& rec : db.records()) {
    w.str(rec.id);
    w.str(rec.residues);
  }
  if (!out) throw Error("failed writing index");
}

void save_index(const FSIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_index(index, out);
  out.close();
  if (!out) throw Error("failed writing " + path);
}

FSIndex load_index(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kMagic)
    throw Error("not an fsindex file (bad magic)");
  auto version = r.num<std::uint32_t>();
  if (version != kIndexFormatVersion)
    throw Error("unsupported index format version " + std::to_string(version));
  auto m = r.num<std::uint32_t>();
  auto n = r.num<std::uint64_t>();
  auto N = r.num<std::uint64_t>();
  auto suffix = r.num<std::uint8_t>();
  auto floor = r.num<std::uint32_t>();
  Alphabet alphabet(r.str(255));
  PartitionScheme scheme = parse_partition(r.str(std::size_t{1} << 20), alphabet, m);
  if (scheme.bin_count() != N)
    throw Error("index file: bin count " + std::to_string(N) + " does not match its partition");
  if (suffix > 1) throw Error("index file: bad suffix flag");

  FSIndex::Parts parts{nullptr, nullptr, scheme, suffix == 1, floor, {}, {}, {}};
  parts.bin = r.array<std::uint64_t>(N + 1);
  auto packed = r.array<std::uint64_t>(n);
  parts.frag.reserve(n);
  for (auto p : packed) parts.frag.push_back(FragmentRef::unpack(p));
  parts.lcp = r.array<std::uint8_t>(n + 1);

  auto db = std::make_shared<SequenceDB>();
  auto records = r.num<std::uint64_t>();
  for (std::uint64_t i = 0; i < records; ++i) {
    auto id = r.str(0xFFFFFFFFu);
    auto residues = r.str(0xFFFFFFFFu);
    db->add(std::move(id), std::move(residues));
  }
  parts.store = std::make_shared<const ResidueStore>(*db, alphabet);
  parts.db = std::move(db);

  for (auto ref : parts.frag)
    if (ref.sequence >= parts.db->size() || ref.offset >= (*parts.db)[ref.sequence].residues.size())
      throw Error("index file: fragment reference outside the stored sequences");

  FSIndex index(std::move(parts));
  auto report = audit(index);
  if (!report.ok) throw Error("index file fails audit: " + report.problems.front());
  return index;
}

FSIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index file " + path);
  try {
    return load_index(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace fsindex
