#include "btd/tensor_io.hpp"

#include "btd/error.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace btd {

namespace {

static_assert(sizeof(double) == 8);

void put_le_double(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  out.write(buf, 8);
}

double get_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::string slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Parses "<magic> n1 n2 [n3]\n" and returns the payload offset.
std::size_t parse_header(const std::string& buf, const std::string& magic,
                         std::vector<long long>& dims, std::size_t ndims) {
  const std::size_t eol = buf.find('\n');
  if (eol == std::string::npos) throw ParseError("missing header newline", buf.size());
  std::istringstream hs(buf.substr(0, eol));
  std::string tag;
  hs >> tag;
  if (tag != magic) throw ParseError("expected '" + magic + "' header", 0);
  dims.clear();
  for (std::size_t d = 0; d < ndims; ++d) {
    long long v = 0;
    if (!(hs >> v) || v <= 0) {
      throw ParseError("bad dimension #" + std::to_string(d + 1) + " in header", 0);
    }
    dims.push_back(v);
  }
  std::string extra;
  if (hs >> extra) throw ParseError("trailing header token '" + extra + "'", 0);
  return eol + 1;
}

std::vector<double> parse_payload(const std::string& buf, std::size_t offset, std::size_t count) {
  const std::size_t need = offset + 8 * count;
  if (buf.size() < need) {
    throw ParseError("truncated payload: expected " + std::to_string(count) + " doubles",
                     buf.size());
  }
  if (buf.size() > need) throw ParseError("trailing bytes after payload", need);
  std::vector<double> values(count);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + offset);
  for (std::size_t n = 0; n < count; ++n) {
    values[n] = get_le_double(p + 8 * n);
    if (!std::isfinite(values[n])) throw ParseError("non-finite value", offset + 8 * n);
  }
  return values;
}

DenseTensor3 parse_triplets(const std::string& buf) {
  std::size_t pos = 0;
  Dims3 dims;
  bool have_dims = false;
  std::vector<double> values;
  while (pos < buf.size()) {
    std::size_t eol = buf.find('\n', pos);
    if (eol == std::string::npos) eol = buf.size();
    const std::string line = buf.substr(pos, eol - pos);
    const std::size_t line_start = pos;
    pos = eol + 1;

    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream ls(line);
    if (line[first] == '#') {
      std::string hash, word;
      ls >> hash >> word;
      if (hash == "#" && word == "dims") {
        long long I = 0, J = 0, K = 0;
        if (!(ls >> I >> J >> K) || I <= 0 || J <= 0 || K <= 0) {
          throw ParseError("bad '# dims' header", line_start);
        }
        dims = {I, J, K};
        values.assign(static_cast<std::size_t>(dims.size()), 0.0);
        have_dims = true;
      }
      continue;
    }
    if (!have_dims) throw ParseError("entry before '# dims I J K' header", line_start);
    long long i = 0, j = 0, k = 0;
    double v = 0.0;
    if (!(ls >> i >> j >> k >> v)) throw ParseError("expected 'i j k value'", line_start);
    if (i < 0 || j < 0 || k < 0 || i >= dims.I || j >= dims.J || k >= dims.K) {
      throw ParseError("index out of range", line_start);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value", line_start);
    values[static_cast<std::size_t>((i * dims.J + j) * dims.K + k)] = v;
  }
  if (!have_dims) throw ParseError("missing '# dims I J K' header", 0);
  return DenseTensor3(dims, std::move(values));
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void write_t3(std::ostream& out, const DenseTensor3& t) {
  const auto& d = t.dims();
  out << "T3 " << d.I << ' ' << d.J << ' ' << d.K << '\n';
  for (double v : t.values()) put_le_double(out, v);
}

void write_t3(const std::filesystem::path& path, const DenseTensor3& t) {
  auto out = open_out(path);
  write_t3(out, t);
}

DenseTensor3 read_tensor(std::istream& in) {
  const std::string buf = slurp(in);
  if (buf.rfind("T3", 0) == 0) {
    std::vector<long long> d;
    const std::size_t off = parse_header(buf, "T3", d, 3);
    const Dims3 dims{d[0], d[1], d[2]};
    return DenseTensor3(dims, parse_payload(buf, off, static_cast<std::size_t>(dims.size())));
  }
  return parse_triplets(buf);
}

DenseTensor3 read_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_tensor(in);
}

void write_m2(std::ostream& out, const DenseMatrix& m) {
  out << "M2 " << m.rows() << ' ' << m.cols() << '\n';
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) put_le_double(out, m(r, c));
}

void write_m2(const std::filesystem::path& path, const DenseMatrix& m) {
  auto out = open_out(path);
  write_m2(out, m);
}

DenseMatrix read_m2(std::istream& in) {
  const std::string buf = slurp(in);
  std::vector<long long> d;
  const std::size_t off = parse_header(buf, "M2", d, 2);
  const auto values = parse_payload(buf, off, static_cast<std::size_t>(d[0] * d[1]));
  DenseMatrix m(d[0], d[1]);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = values[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

DenseMatrix read_m2(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_m2(in);
}

}  // namespace btd
