#include <doctest.h>

#include <cstring>
#include <fstream>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "support.hpp"

using namespace splitcv;
using testing::TempDir;

namespace {

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void write_bytes(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// FT64 header by hand: magic, ndim byte, u32 LE dims.
std::string ft64_header(std::initializer_list<std::uint32_t> dims) {
  std::string h = "FT64";
  h += static_cast<char>(dims.size());
  for (auto d : dims)
    for (int b = 0; b < 4; ++b) h += static_cast<char>((d >> (8 * b)) & 0xff);
  return h;
}

std::string f64_le(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  std::string s;
  for (int b = 0; b < 8; ++b) s += static_cast<char>((bits >> (8 * b)) & 0xff);
  return s;
}

std::uint64_t format_offset(const std::vector<unsigned char>& bytes) {
  try {
    decode_ft64(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  FAIL("expected a format error");
  return 0;
}

}  // namespace

TEST_CASE("tensor construction validates shape and values") {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.size() == 6);
  CHECK(t.ndim() == 2);
  CHECK_THROWS_KIND(Tensor({2, 3}, {1, 2, 3}), ErrorKind::Dimension);
  CHECK_THROWS_KIND(Tensor({0}, {}), ErrorKind::Dimension);
  CHECK_THROWS_KIND(Tensor({2}, {1.0, NAN}), ErrorKind::Numerical);
  CHECK_THROWS_KIND(Tensor({1}, {INFINITY}), ErrorKind::Numerical);
}

TEST_CASE("stack and unstack are inverse") {
  testing::Gen g(3);
  std::vector<Tensor> items{g.tensor({2, 2}), g.tensor({2, 2}), g.tensor({2, 2})};
  const Tensor s = stack(items);
  CHECK(s.shape() == Shape{3, 2, 2});
  for (std::size_t i = 0; i < 3; ++i) CHECK(unstack(s, i) == items[i]);
  CHECK_THROWS_KIND(unstack(s, 3), ErrorKind::Lookup);
}

TEST_CASE("FT64 layout matches the byte-level definition") {
  const Tensor t({2, 1}, {1.5, -2.0});
  const auto enc = encode_ft64(t);
  const std::string expected = ft64_header({2, 1}) + f64_le(1.5) + f64_le(-2.0);
  CHECK(enc == bytes_of(expected));
}

TEST_CASE("FT64 round trip is bit exact") {
  TempDir dir("ft64");
  SUBCASE("2x3 example") {
    const Tensor t({2, 3}, {0.1, 0.2, 0.3, -1e300, 5e-324, 0.0});
    write_tensor(dir / "t.ft64", t);
    CHECK(read_tensor(dir / "t.ft64") == t);
  }
  SUBCASE("random shapes and payloads") {
    testing::Gen g(11);
    for (int trial = 0; trial < 50; ++trial) {
      Shape shape;
      const std::size_t nd = g.index(1, 4);
      for (std::size_t d = 0; d < nd; ++d) shape.push_back(g.index(1, 5));
      const Tensor t = g.tensor(shape, std::pow(10.0, g.uniform(-200, 200)));
      const Tensor back = decode_ft64(encode_ft64(t));
      REQUIRE(back.shape() == t.shape());
      CHECK(std::memcmp(back.values().data(), t.values().data(), t.size() * 8) == 0);
    }
  }
}

TEST_CASE("FT64 decode errors carry byte offsets") {
  CHECK(format_offset(bytes_of("XXXX" + std::string("\x01\x01\x00\x00\x00", 5) + f64_le(1))) == 0);
  // header 2x3, only 5 values
  std::string truncated = ft64_header({2, 3});
  for (int i = 0; i < 5; ++i) truncated += f64_le(i);
  CHECK_THROWS_AS(decode_ft64(bytes_of(truncated)), FormatError);
  CHECK(format_offset(bytes_of(truncated)) == 53);  // where the input ran out
  // dims whose product overflows 64 bits
  const std::string overflow = ft64_header({0xffffffffu, 0xffffffffu, 0xffffffffu});
  CHECK(format_offset(bytes_of(overflow)) > 4);
  CHECK_THROWS_AS(decode_ft64(bytes_of(ft64_header({1}) + f64_le(1) + "z")), FormatError);
  CHECK_THROWS_AS(decode_ft64(bytes_of(ft64_header({1}) + f64_le(NAN))), FormatError);
  CHECK_THROWS_AS(decode_ft64(bytes_of("FT")), FormatError);
}

TEST_CASE("missing tensor file is an I/O error") {
  CHECK_THROWS_KIND(read_tensor("/nonexistent/dir/x.ft64"), ErrorKind::Io);
}

TEST_CASE("PGM reading and writing") {
  TempDir dir("pgm");
  SUBCASE("all-zero 8x8 P5") {
    write_bytes(dir / "z.pgm", "P5\n8 8\n255\n" + std::string(64, '\0'));
    const Tensor t = read_pgm(dir / "z.pgm");
    CHECK(t.shape() == Shape{8, 8});
    CHECK(testing::max_abs(t) == 0.0);
  }
  SUBCASE("P2 with comments, endpoints scale to 0 and 1") {
    write_bytes(dir / "a.pgm", "P2\n# comment\n2 1\n255\n0 255\n");
    const Tensor t = read_pgm(dir / "a.pgm");
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 1.0);
  }
  SUBCASE("0.5 writes 128, clamping outside [0,1]") {
    write_pgm(dir / "w.pgm", Tensor({1, 4}, {0.5, -3.0, 2.0, 0.2}));
    std::ifstream in(dir / "w.pgm", std::ios::binary);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    const std::string raster = all.substr(all.size() - 4);
    CHECK(static_cast<unsigned char>(raster[0]) == 128);
    CHECK(static_cast<unsigned char>(raster[1]) == 0);
    CHECK(static_cast<unsigned char>(raster[2]) == 255);
    CHECK(static_cast<unsigned char>(raster[3]) == 51);
  }
  SUBCASE("round trip of 8-bit values") {
    std::vector<double> v;
    for (int i = 0; i < 256; ++i) v.push_back(i / 255.0);
    const Tensor t({16, 16}, v);
    write_pgm(dir / "r.pgm", t);
    CHECK(read_pgm(dir / "r.pgm") == t);
  }
  SUBCASE("color and other maxvals are rejected") {
    write_bytes(dir / "c.ppm", "P6\n1 1\n255\n\x01\x02\x03");
    CHECK_THROWS_AS(read_pgm(dir / "c.ppm"), FormatError);
    write_bytes(dir / "m.pgm", "P5\n1 1\n65535\n\x01\x02");
    CHECK_THROWS_AS(read_pgm(dir / "m.pgm"), FormatError);
    write_bytes(dir / "t.pgm", "P5\n4 4\n255\n\x01");
    CHECK_THROWS_AS(read_pgm(dir / "t.pgm"), FormatError);
  }
}

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("gaussian_noise is deterministic per stream") {
  const SeedSpec s{42, {1, 2}};
  CHECK(gaussian_noise({4}, 1.0, s) == gaussian_noise({4}, 1.0, s));
  CHECK_FALSE(gaussian_noise({4}, 1.0, s) == gaussian_noise({4}, 1.0, s.child(0)));
  CHECK_FALSE(gaussian_noise({4}, 1.0, SeedSpec{42, {}}) == gaussian_noise({4}, 1.0, SeedSpec{43, {}}));
  CHECK_THROWS_KIND(gaussian_noise({4}, 0.0, s), ErrorKind::InvalidParameter);
  CHECK_THROWS_KIND(gaussian_noise({4}, -1.0, s), ErrorKind::InvalidParameter);
}

TEST_CASE("stream paths are not confused by concatenation") {
  CHECK(SeedSpec{1, {1, 2}}.key() != SeedSpec{1, {12}}.key());
  CHECK(SeedSpec{1, {0}}.key() != SeedSpec{1, {}}.key());
  CHECK(SeedSpec{1, {1}}.child(2) == SeedSpec{1, {1, 2}});
}

TEST_CASE("gaussian_noise moments and stream independence at 1e5 draws") {
  const std::size_t S = 100000;
  const Tensor a = gaussian_noise({S}, 1.0, SeedSpec{7, {0}});
  const Tensor b = gaussian_noise({S}, 1.0, SeedSpec{7, {1}});
  const auto ma = testing::moments(a.to_vector());
  CHECK(std::abs(ma.mean) < 0.02);
  CHECK(std::abs(ma.var - 1.0) < 0.02);
  CHECK(std::abs(testing::correlation(a.to_vector(), b.to_vector())) < 5.0 / std::sqrt(double(S)));
}

TEST_CASE("uniform draws stay inside the open unit interval") {
  RandomStream rng(SeedSpec{5, {}});
  double lo = 1, hi = 0, sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}
