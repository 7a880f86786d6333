#pragma once

#include <iosfwd>
#include <string>

#include "fsindex/fsindex.hpp"

namespace fsindex {

/// Current on-disk format version.
inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// Little-endian binary layout:
///   magic "FSINDEX\0", version u32, m u32, n u64, N u64, suffix flag u8,
///   suffix floor u32, alphabet (u32 length + bytes), partition spec
///   (u32 length + bytes), bin (N+1 x u64), frag (n x u64, sequence << 32 |
///   offset), lcp (n+1 x u8), then the sequences: count u64 and per record
///   id and residues (u32 length + bytes each).
void save_index(const FSIndex& index, std::ostream& out);
void save_index(const FSIndex& index, const std::string& path);

/// Reads and audits an index. Throws on a bad magic, unsupported version,
/// truncation or a failed audit.
FSIndex load_index(std::istream& in);
FSIndex load_index(const std::string& path);

}  // namespace fsindex
