#include "blips/complex_image.hpp"

#include <cmath>
#include <string>

#include "blips/errors.hpp"
#include "blips/random.hpp"

namespace blips {

ComplexImage::ComplexImage(std::size_t height, std::size_t width)
  : height_(height), width_(width), data_(height * width)
{
}

ComplexImage::ComplexImage(std::size_t height, std::size_t width, std::vector<cplx> data)
  : height_(height), width_(width), data_(std::move(data))
{
  require(data_.size() == height_ * width_, "ComplexImage: data length must equal height*width");
}

ComplexImage &ComplexImage::operator+=(const ComplexImage &other)
{
  require_same_shape(*this, other, "ComplexImage +=");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += other.data_[i];
  }
  return *this;
}

ComplexImage &ComplexImage::operator-=(const ComplexImage &other)
{
  require_same_shape(*this, other, "ComplexImage -=");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] -= other.data_[i];
  }
  return *this;
}

ComplexImage &ComplexImage::operator*=(cplx s)
{
  for (auto &v : data_) {
    v *= s;
  }
  return *this;
}

ComplexImage &ComplexImage::operator*=(double s)
{
  for (auto &v : data_) {
    v *= s;
  }
  return *this;
}

void ComplexImage::axpy(cplx alpha, const ComplexImage &other)
{
  require_same_shape(*this, other, "ComplexImage axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += alpha * other.data_[i];
  }
}

void ComplexImage::set_zero()
{
  std::fill(data_.begin(), data_.end(), cplx{});
}

ComplexImage operator+(ComplexImage a, const ComplexImage &b)
{
  a += b;
  return a;
}

ComplexImage operator-(ComplexImage a, const ComplexImage &b)
{
  a -= b;
  return a;
}

ComplexImage operator*(cplx s, ComplexImage a)
{
  a *= s;
  return a;
}

ComplexImage operator*(double s, ComplexImage a)
{
  a *= s;
  return a;
}

cplx inner(const ComplexImage &a, const ComplexImage &b)
{
  require_same_shape(a, b, "inner");
  cplx acc{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::conj(a[i]) * b[i];
  }
  return acc;
}

double norm2_squared(const ComplexImage &a)
{
  double acc = 0.0;
  for (const auto &v : a.data()) {
    acc += std::norm(v);
  }
  return acc;
}

double norm2(const ComplexImage &a) { return std::sqrt(norm2_squared(a)); }

double max_abs(const ComplexImage &a)
{
  double m = 0.0;
  for (const auto &v : a.data()) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

bool all_finite(const ComplexImage &a)
{
  for (const auto &v : a.data()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      return false;
    }
  }
  return true;
}

std::vector<double> magnitude(const ComplexImage &a)
{
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::abs(a[i]);
  }
  return out;
}

void require_same_shape(const ComplexImage &a, const ComplexImage &b, const char *what)
{
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()) + ")");
  }
}

ComplexImage random_image(std::size_t height, std::size_t width, Rng &rng)
{
  ComplexImage img(height, width);
  for (auto &v : img.data()) {
    v = rng.complex_normal();
  }
  return img;
}

} // namespace blips
