#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace splitcv {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Real n-dimensional array, row-major, finite entries only. Values are
// immutable once constructed; build a std::vector<double> and move it in.
// A default-constructed Tensor is empty (no shape, no data).
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t ndim() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return shape_.empty(); }

  std::span<const double> values() const noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::vector<double> to_vector() const { return data_; }

  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
double norm(std::span<const double> a);

// Elementwise helpers; shapes must agree.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

// Stack equally-shaped tensors along a new leading dimension.
Tensor stack(std::span<const Tensor> items);
// Slice `index` along the leading dimension.
Tensor unstack(const Tensor& stacked, std::size_t index);

// FT64: "FT64", u8 ndim, ndim x u32 LE dims, row-major f64 LE payload.
void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);
std::vector<unsigned char> encode_ft64(const Tensor& t);
Tensor decode_ft64(std::span<const unsigned char> bytes);

// 8-bit grayscale PGM (P5 or P2, maxval 255). Pixel v maps to v/255.
Tensor read_pgm(const std::filesystem::path& path);
// Writes P5 with round(clamp(x,0,1)*255), halves rounded up.
void write_pgm(const std::filesystem::path& path, const Tensor& t);

}  // namespace splitcv
