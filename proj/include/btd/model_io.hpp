#pragma once

#include "btd/model.hpp"

#include <filesystem>

namespace btd {

// Factor directory layout:
//   meta      "R <R>\ndims <I> <J> <K>\nranks <L_1> ... <L_R>\n"
//   A_<r>.mat, B_<r>.mat (r = 1..R) and C.mat in M2 format.
void write_factors(const std::filesystem::path& dir, const BtdFactors& f);
BtdFactors read_factors(const std::filesystem::path& dir);

}  // namespace btd
