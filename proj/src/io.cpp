#include "kfp/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace kfp {

void write_triplets(std::ostream& os, const DiscretizedOperator& op) {
  const SparseMatrixC& m = op.matrix();
  os << "# kfp-triplets 1\n";
  os << "# dims " << m.rows() << ' ' << m.cols() << '\n';
  os << "# shift " << to_string(op.provenance.shift) << '\n';
  os << "# provenance " << op.provenance.describe() << '\n';
  os << "# nnz " << m.nonZeros() << '\n';
  char buf[96];
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrixC::InnerIterator it(m, c); it; ++it) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g\n", it.value().real(), it.value().imag());
      os << it.row() << ' ' << it.col() << buf;
    }
}

TripletFile read_triplets(std::istream& is) {
  TripletFile f;
  Index rows = -1, cols = -1, nnz = -1;
  std::vector<Eigen::Triplet<Complex>> t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "dims") ls >> rows >> cols;
      else if (key == "nnz") ls >> nnz;
      else if (key == "shift") ls >> f.shift;
      else if (key == "provenance") f.provenance = line.substr(line.find("provenance") + 11);
      continue;
    }
    Index r, c;
    double re, im;
    if (!(ls >> r >> c >> re >> im) || rows < 0 || r < 0 || c < 0 || r >= rows || c >= cols)
      throw ArgumentError("assembly", "malformed triplet at line " + std::to_string(lineno));
    t.emplace_back(r, c, Complex(re, im));
  }
  if (rows < 0 || cols < 0) throw ArgumentError("assembly", "triplet file lacks a dims header");
  if (nnz >= 0 && nnz != static_cast<Index>(t.size()))
    throw ArgumentError("assembly", "triplet count differs from the nnz header");
  f.matrix.resize(rows, cols);
  f.matrix.setFromTriplets(t.begin(), t.end());
  return f;
}

}  // namespace kfp
