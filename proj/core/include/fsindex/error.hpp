#pragma once

#include <stdexcept>
#include <string>

namespace fsindex {

/// Raised for malformed input (matrix, partition, FASTA, PSSM, index file)
/// and for violated operation preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsindex
