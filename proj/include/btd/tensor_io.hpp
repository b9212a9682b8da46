#pragma once

#include "btd/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace btd {

// T3:  ASCII header "T3 <I> <J> <K>\n" followed by I*J*K little-endian
//      float64 values in (i*J + j)*K + k order.
// M2:  ASCII header "M2 <rows> <cols>\n" followed by rows*cols little-endian
//      float64 values, row-major.
// Triplet text: "# dims I J K" header, then one "i j k value" line per entry
//      (0-based indices); entries not listed are zero.

void write_t3(std::ostream& out, const DenseTensor3& t);
void write_t3(const std::filesystem::path& path, const DenseTensor3& t);

/// Reads either a binary T3 stream or the ASCII triplet format.
DenseTensor3 read_tensor(std::istream& in);
DenseTensor3 read_tensor(const std::filesystem::path& path);

void write_m2(std::ostream& out, const DenseMatrix& m);
void write_m2(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_m2(std::istream& in);
DenseMatrix read_m2(const std::filesystem::path& path);

}  // namespace btd
