#include "core/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/error.hpp"

namespace splitcv {

std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d)
      fail(ErrorKind::Dimension, "shape size overflows");
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require(!shape_.empty(), ErrorKind::Dimension, "tensor shape must have at least one dim");
  for (auto d : shape_) require(d > 0, ErrorKind::Dimension, "tensor dims must be positive");
  require(shape_size(shape_) == data_.size(), ErrorKind::Dimension,
          "tensor shape " + shape_to_string(shape_) + " does not match " +
              std::to_string(data_.size()) + " values");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      fail(ErrorKind::Numerical, "non-finite tensor entry at index " + std::to_string(i));
  }
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  const auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Dimension, "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }
double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

namespace {

template <class Op>
Tensor zip(const Tensor& a, const Tensor& b, Op op) {
  require(a.shape() == b.shape(), ErrorKind::Dimension,
          "shape mismatch " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Tensor(a.shape(), std::move(out));
}

}  // namespace

Tensor operator+(const Tensor& a, const Tensor& b) { return zip(a, b, std::plus<>{}); }
Tensor operator-(const Tensor& a, const Tensor& b) { return zip(a, b, std::minus<>{}); }

Tensor operator*(double s, const Tensor& a) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= s;
  return Tensor(a.shape(), std::move(out));
}

Tensor stack(std::span<const Tensor> items) {
  require(!items.empty(), ErrorKind::Dimension, "stack: no tensors");
  const Shape& inner = items.front().shape();
  std::vector<double> out;
  out.reserve(items.size() * items.front().size());
  for (const auto& t : items) {
    require(t.shape() == inner, ErrorKind::Dimension, "stack: shape mismatch");
    out.insert(out.end(), t.values().begin(), t.values().end());
  }
  Shape shape{items.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  return Tensor(std::move(shape), std::move(out));
}

Tensor unstack(const Tensor& stacked, std::size_t index) {
  require(stacked.ndim() >= 2, ErrorKind::Dimension, "unstack: need at least 2 dims");
  require(index < stacked.shape()[0], ErrorKind::Lookup,
          "unstack: index " + std::to_string(index) + " out of range");
  Shape inner(stacked.shape().begin() + 1, stacked.shape().end());
  const auto n = shape_size(inner);
  auto first = stacked.values().begin() + static_cast<std::ptrdiff_t>(index * n);
  return Tensor(std::move(inner), std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
}

// ---- FT64 -----------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'F', 'T', '6', '4'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const unsigned char> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v |= static_cast<std::uint64_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

void spill(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace

std::vector<unsigned char> encode_ft64(const Tensor& t) {
  require(!t.empty(), ErrorKind::Dimension, "cannot encode an empty tensor");
  require(t.ndim() <= 255, ErrorKind::Dimension, "FT64 supports at most 255 dims");
  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(5 + 4 * t.ndim() + 8 * t.size());
  out.push_back(static_cast<unsigned char>(t.ndim()));
  for (auto d : t.shape()) {
    require(d <= std::numeric_limits<std::uint32_t>::max(), ErrorKind::Dimension,
            "FT64 dims must fit in 32 bits");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Tensor decode_ft64(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated FT64 magic", bytes.size());
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw FormatError("bad FT64 magic", 0);
  if (bytes.size() < 5) throw FormatError("missing FT64 ndim byte", bytes.size());
  const std::size_t ndim = bytes[4];
  if (ndim == 0) throw FormatError("FT64 ndim must be positive", 4);
  std::size_t offset = 5;
  if (bytes.size() < offset + 4 * ndim) throw FormatError("truncated FT64 dims", bytes.size());
  Shape shape(ndim);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i, offset += 4) {
    shape[i] = static_cast<std::size_t>(get_le(bytes, offset, 4));
    if (shape[i] == 0) throw FormatError("FT64 dim must be positive", offset);
    if (count > (std::numeric_limits<std::uint64_t>::max() / 8) / shape[i])
      throw FormatError("FT64 dims overflow", offset);
    count *= shape[i];
  }
  const std::uint64_t payload = bytes.size() - offset;
  if (payload < count * 8)
    throw FormatError("truncated FT64 payload: header declares " + std::to_string(count) +
                          " values, found " + std::to_string(payload / 8),
                      bytes.size());
  if (payload > count * 8) throw FormatError("trailing bytes after FT64 payload", offset + count * 8);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i, offset += 8) {
    data[i] = std::bit_cast<double>(get_le(bytes, offset, 8));
    if (!std::isfinite(data[i])) throw FormatError("non-finite FT64 value", offset);
  }
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  spill(path, encode_ft64(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  return decode_ft64(bytes);
}

// ---- PGM ------------------------------------------------------------------

namespace {

struct PgmCursor {
  std::span<const unsigned char> bytes;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* what) {
    skip_space_and_comments();
    const auto start = pos;
    unsigned long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1u << 24) throw FormatError(std::string("PGM ") + what + " too large", start);
      ++pos;
    }
    if (pos == start) throw FormatError(std::string("expected PGM ") + what, start);
    return v;
  }
};

}  // namespace

Tensor read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 2 || bytes[0] != 'P') throw FormatError("not a PNM file", 0);
  const char kind = static_cast<char>(bytes[1]);
  if (kind == '3' || kind == '6') throw FormatError("color PNM is not supported", 1);
  if (kind != '2' && kind != '5') throw FormatError("unsupported PNM variant", 1);
  PgmCursor cur{bytes, 2};
  const auto width = cur.number("width");
  const auto height = cur.number("height");
  const auto maxval_pos = cur.pos;
  const auto maxval = cur.number("maxval");
  if (maxval != 255) throw FormatError("unsupported PGM maxval " + std::to_string(maxval), maxval_pos);
  if (width == 0 || height == 0) throw FormatError("PGM dims must be positive", 2);
  const std::size_t n = width * height;
  std::vector<double> data(n);
  if (kind == '5') {
    if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos]))
      throw FormatError("missing whitespace after PGM header", cur.pos);
    ++cur.pos;
    if (bytes.size() - cur.pos < n) throw FormatError("truncated PGM raster", bytes.size());
    for (std::size_t i = 0; i < n; ++i) data[i] = bytes[cur.pos + i] / 255.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto at = cur.pos;
      const auto v = cur.number("pixel");
      if (v > 255) throw FormatError("PGM pixel exceeds maxval", at);
      data[i] = static_cast<double>(v) / 255.0;
    }
  }
  return Tensor({height, width}, std::move(data));
}

void write_pgm(const std::filesystem::path& path, const Tensor& t) {
  require(t.ndim() == 2, ErrorKind::Dimension, "PGM output needs a 2-D tensor");
  const std::string header =
      "P5\n" + std::to_string(t.shape()[1]) + " " + std::to_string(t.shape()[0]) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  for (double v : t.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<unsigned char>(std::floor(c * 255.0 + 0.5)));
  }
  spill(path, out);
}

}  // namespace splitcv
