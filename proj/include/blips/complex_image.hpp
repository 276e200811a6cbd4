#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace blips {

using cplx = std::complex<double>;

struct Shape
{
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return height * width; }
  bool operator==(const Shape &) const = default;
};

// Dense row-major complex 2D array. Used for images and single-coil k-space.
class ComplexImage
{
public:
  ComplexImage() = default;
  ComplexImage(std::size_t height, std::size_t width);
  ComplexImage(std::size_t height, std::size_t width, std::vector<cplx> data);
  explicit ComplexImage(Shape shape) : ComplexImage(shape.height, shape.width) {}

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  Shape shape() const { return {height_, width_}; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cplx &operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const cplx &operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  cplx &operator[](std::size_t i) { return data_[i]; }
  const cplx &operator[](std::size_t i) const { return data_[i]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }
  const std::vector<cplx> &values() const { return data_; }

  ComplexImage &operator+=(const ComplexImage &other);
  ComplexImage &operator-=(const ComplexImage &other);
  ComplexImage &operator*=(cplx s);
  ComplexImage &operator*=(double s);

  // this += alpha * other
  void axpy(cplx alpha, const ComplexImage &other);
  void set_zero();

  bool operator==(const ComplexImage &) const = default;

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<cplx> data_;
};

ComplexImage operator+(ComplexImage a, const ComplexImage &b);
ComplexImage operator-(ComplexImage a, const ComplexImage &b);
ComplexImage operator*(cplx s, ComplexImage a);
ComplexImage operator*(double s, ComplexImage a);

// sum conj(a_i) b_i
cplx inner(const ComplexImage &a, const ComplexImage &b);
double norm2_squared(const ComplexImage &a);
double norm2(const ComplexImage &a);
double max_abs(const ComplexImage &a);
bool all_finite(const ComplexImage &a);
std::vector<double> magnitude(const ComplexImage &a);

void require_same_shape(const ComplexImage &a, const ComplexImage &b, const char *what);

} // namespace blips
