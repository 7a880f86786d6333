#include "fsindex/partition.hpp"

#include <algorithm>
#include <cctype>

namespace fsindex {

PartitionScheme::PartitionScheme(Alphabet alphabet, std::vector<std::vector<std::vector<std::uint8_t>>> clusters)
    : alphabet_(std::move(alphabet)), clusters_(std::move(clusters)) {
  const std::size_t sigma = alphabet_.size();
  const std::size_t m = clusters_.size();
  if (m == 0) throw Error("partition needs at least one position");
  if (m > 255) throw Error("fragment length above 255 is not supported");

  cluster_of_.assign(m * sigma, kNoLetter);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& position = clusters_[i];
    if (position.empty()) throw Error("position " + std::to_string(i) + " has no clusters");
    if (position.size() >= sigma)
      throw Error("position " + std::to_string(i) + " has " + std::to_string(position.size()) +
                  " clusters; a reduction needs fewer than " + std::to_string(sigma));
    for (std::size_t r = 0; r < position.size(); ++r) {
      if (position[r].empty()) throw Error("position " + std::to_string(i) + " has an empty cluster");
      for (auto letter : position[r]) {
        if (letter >= sigma) throw Error("cluster letter outside alphabet");
        auto& slot = cluster_of_[i * sigma + letter];
        if (slot != kNoLetter)
          throw Error(std::string("letter '") + alphabet_.letter(letter) + "' repeated at position " + std::to_string(i));
        slot = static_cast<std::uint8_t>(r);
      }
    }
    for (std::size_t a = 0; a < sigma; ++a)
      if (cluster_of_[i * sigma + a] == kNoLetter)
        throw Error(std::string("letter '") + alphabet_.letter(a) + "' missing from position " + std::to_string(i));
  }

  radix_.assign(m, 1);
  bin_count_ = 1;
  for (std::size_t i = m; i-- > 0;) {
    radix_[i] = bin_count_;
    if (bin_count_ > kMaxBinCount / clusters_[i].size())
      throw Error("bin count overflows the supported maximum of " + std::to_string(kMaxBinCount));
    bin_count_ *= clusters_[i].size();
  }
  if (bin_count_ == 1) throw Error("degenerate partition: every position has a single cluster");
}

std::uint64_t PartitionScheme::rank(std::span<const std::uint8_t> digits) const {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) r += digits[i] * radix_[i];
  return r;
}

std::vector<std::uint8_t> PartitionScheme::digits(std::uint64_t rank) const {
  std::vector<std::uint8_t> out(length());
  for (std::size_t i = 0; i < length(); ++i) {
    out[i] = static_cast<std::uint8_t>(rank / radix_[i]);
    rank %= radix_[i];
  }
  return out;
}

std::uint64_t PartitionScheme::bin_of(std::span<const std::uint8_t> fragment) const {
  const std::size_t sigma = alphabet_.size();
  const std::size_t n = std::min(fragment.size(), length());
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto letter = fragment[i];
    if (letter >= sigma) break;
    r += cluster_of_[i * sigma + letter] * radix_[i];
  }
  return r;
}

std::string PartitionScheme::to_spec() const {
  std::string out;
  for (std::size_t i = 0; i < length(); ++i) {
    if (i) out.push_back(';');
    for (std::size_t r = 0; r < clusters_[i].size(); ++r) {
      if (r) out.push_back(',');
      for (auto letter : clusters_[i][r]) out.push_back(alphabet_.letter(letter));
    }
  }
  return out;
}

bool PartitionScheme::operator==(const PartitionScheme& other) const {
  return alphabet_ == other.alphabet_ && clusters_ == other.clusters_;
}

PartitionScheme parse_partition(std::string_view spec, const Alphabet& alphabet, std::size_t length) {
  if (length == 0) throw Error("fragment length must be at least 1");

  std::vector<std::string_view> positions;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ';' || spec[i] == '\n') {
      auto piece = spec.substr(start, i - start);
      bool blank = std::all_of(piece.begin(), piece.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
      if (!blank) positions.push_back(piece);
      start = i + 1;
    }
  }
  if (positions.empty()) throw Error("empty partition spec");
  if (positions.size() != 1 && positions.size() != length)
    throw Error("partition spec has " + std::to_string(positions.size()) + " positions; expected 1 or " +
                std::to_string(length));

  auto parse_position = [&](std::string_view text) {
    std::vector<std::vector<std::uint8_t>> clusters(1);
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      if (c == ',') {
        clusters.emplace_back();
        continue;
      }
      auto code = alphabet.code(c);
      if (code == kNoLetter) throw Error(std::string("partition letter '") + c + "' is not in alphabet " + std::string(alphabet.letters()));
      clusters.back().push_back(code);
    }
    return clusters;
  };

  std::vector<std::vector<std::vector<std::uint8_t>>> clusters;
  clusters.reserve(length);
  for (std::size_t i = 0; i < length; ++i) clusters.push_back(parse_position(positions.size() == 1 ? positions[0] : positions[i]));
  return PartitionScheme(alphabet, std::move(clusters));
}

}  // namespace fsindex
