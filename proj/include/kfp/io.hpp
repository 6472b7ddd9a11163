#pragma once

#include <iosfwd>
#include <string>

#include "kfp/assembly.hpp"

namespace kfp {

/// Sparse triplet text format:
///
///   # kfp-triplets 1
///   # dims <rows> <cols>
///   # shift <K|Kcheck>
///   # provenance <free text, one line>
///   # nnz <count>
///   <row> <col> <re> <im>        (zero-based, column-major order, %.17g)
void write_triplets(std::ostream& os, const DiscretizedOperator& op);

struct TripletFile {
  SparseMatrixC matrix;
  std::string shift;
  std::string provenance;
};

/// Throws ArgumentError on malformed input.
TripletFile read_triplets(std::istream& is);

}  // namespace kfp
