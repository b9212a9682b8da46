#include "btd/model_io.hpp"

#include "btd/error.hpp"
#include "btd/tensor_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace btd {

namespace fs = std::filesystem;

void write_factors(const fs::path& dir, const BtdFactors& f) {
  f.validate();
  fs::create_directories(dir);
  std::ofstream meta(dir / "meta");
  if (!meta) throw UsageError("cannot write " + (dir / "meta").string());
  const Dims3 d = f.dims();
  meta << "R " << f.num_blocks() << "\ndims " << d.I << ' ' << d.J << ' ' << d.K << "\nranks";
  for (Index l : f.ranks()) meta << ' ' << l;
  meta << '\n';
  for (Index r = 0; r < f.num_blocks(); ++r) {
    const auto n = std::to_string(r + 1);
    write_m2(dir / ("A_" + n + ".mat"), f.A[static_cast<std::size_t>(r)]);
    write_m2(dir / ("B_" + n + ".mat"), f.B[static_cast<std::size_t>(r)]);
  }
  write_m2(dir / "C.mat", f.C);
}

BtdFactors read_factors(const fs::path& dir) {
  std::ifstream meta(dir / "meta");
  if (!meta) throw UsageError("missing factor metadata " + (dir / "meta").string());
  std::string line;
  Index R = 0;
  Dims3 dims;
  std::vector<Index> ranks;
  std::size_t offset = 0;
  while (std::getline(meta, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "R") {
      ls >> R;
    } else if (key == "dims") {
      ls >> dims.I >> dims.J >> dims.K;
    } else if (key == "ranks") {
      Index l = 0;
      while (ls >> l) ranks.push_back(l);
    } else if (!key.empty()) {
      throw ParseError("unknown meta key '" + key + "'", offset);
    }
    if (ls.bad()) throw ParseError("bad meta line", offset);
    offset += line.size() + 1;
  }
  if (R <= 0 || static_cast<Index>(ranks.size()) != R) {
    throw ParseError("meta: R and ranks list disagree", 0);
  }
  BtdFactors f;
  for (Index r = 1; r <= R; ++r) {
    f.A.push_back(read_m2(dir / ("A_" + std::to_string(r) + ".mat")));
    f.B.push_back(read_m2(dir / ("B_" + std::to_string(r) + ".mat")));
  }
  f.C = read_m2(dir / "C.mat");
  f.validate();
  if (!(f.dims() == dims) || f.ranks() != ranks) {
    throw ParseError("factor matrices disagree with meta", 0);
  }
  return f;
}

}  // namespace btd
