#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "fsindex/fsindex.hpp"

namespace fsindex::detail {

/// Sequential scan of a run of lexicographically sorted fragments, sharing
/// partial sums across common prefixes.
///
/// cd[j] holds the query value over the first j letters of the current
/// fragment. Entries up to the prefix shared with the previous fragment are
/// reused; a fragment is abandoned at the first position where its partial
/// sum exceeds eps. Requires non-negative query columns.
///
/// `lcp` is aligned with `frag`; lcp[0] is ignored.
/// `eps` is read on every fragment so a kNN sink may shrink it.
template <class Sink>
void scan_run(const ResidueStore& store, std::span<const FragmentRef> frag, const std::uint8_t* lcp,
              const QueryFunction& q, const Value& eps, Sink&& sink, SearchStats& stats, std::vector<Value>& cd) {
  const std::size_t len = q.length();
  const std::size_t sigma = q.alphabet().size();
  const Value* f = q.table().data();
  const std::size_t count = frag.size();
  cd.resize(len + 1);
  cd[0] = 0;

  std::size_t valid = 0;
  std::uint64_t residues = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* s = store.at(frag[i]);
    if (i > 0) valid = std::min<std::size_t>(valid, lcp[i]);
    if (cd[valid] > eps) continue;
    while (valid < len && s[valid] != kNoLetter) {
      cd[valid + 1] = cd[valid] + f[valid * sigma + s[valid]];
      ++valid;
      ++residues;
      if (cd[valid] > eps) break;
    }
    if (valid == len && cd[len] <= eps) sink(frag[i], cd[len]);
  }
  stats.fragments_scanned += count;
  stats.residues_scanned += residues;
}

}  // namespace fsindex::detail
