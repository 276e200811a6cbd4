#include "blips/fft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <new>
#include <tuple>

#include <fftw3.h>

#include "blips/errors.hpp"

namespace blips {
namespace {

// Planning is not thread safe in FFTW; execution of an existing plan on
// fresh buffers (fftw_execute_dft) is, provided they are fftw_malloc aligned.
// FFTW_ESTIMATE keeps the plan, and therefore the rounding, the same in every run.
class PlanCache
{
public:
  ~PlanCache()
  {
    for (auto &[key, plan] : plans_) {
      fftw_destroy_plan(plan);
    }
  }

  fftw_plan get(std::size_t height, std::size_t width, int sign)
  {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(height, width, sign);
    if (auto it = plans_.find(key); it != plans_.end()) {
      return it->second;
    }
    auto *in = fftw_alloc_complex(height * width);
    auto *out = fftw_alloc_complex(height * width);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(height), static_cast<int>(width), in, out, sign,
                                      FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (plan == nullptr) {
      throw NumericFailure("fft: FFTW failed to create a plan");
    }
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache &plan_cache()
{
  static PlanCache cache;
  return cache;
}

struct FftwBuffer
{
  explicit FftwBuffer(std::size_t n) : data(reinterpret_cast<cplx *>(fftw_alloc_complex(n)))
  {
    if (data == nullptr) {
      throw std::bad_alloc();
    }
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;

  cplx *data;
};

ComplexImage centered_transform(const ComplexImage &src, int sign)
{
  const std::size_t h = src.height();
  const std::size_t w = src.width();
  if (h == 0 || w == 0) {
    throw InvalidArgument("fft: image dimensions must be nonzero");
  }
  fftw_plan plan = plan_cache().get(h, w, sign);

  // ifftshift on the way in, fftshift on the way out; each row moves as two blocks.
  const std::size_t hh = h / 2;
  const std::size_t hw = w / 2;
  FftwBuffer buffer(h * w);
  FftwBuffer spectrum(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    const cplx *row = &src((r + hh) % h, 0);
    cplx *dst_row = buffer.data + r * w;
    std::copy(row + hw, row + w, dst_row);
    std::copy(row, row + hw, dst_row + (w - hw));
  }
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(buffer.data),
                   reinterpret_cast<fftw_complex *>(spectrum.data));

  const double scale = 1.0 / std::sqrt(static_cast<double>(h * w));
  ComplexImage dst(h, w);
  const std::size_t back = w - hw;
  for (std::size_t r = 0; r < h; ++r) {
    const cplx *row = spectrum.data + ((r + h - hh) % h) * w;
    cplx *out = &dst(r, 0);
    for (std::size_t c = 0; c < hw; ++c) {
      out[c] = row[back + c] * scale;
    }
    for (std::size_t c = hw; c < w; ++c) {
      out[c] = row[c - hw] * scale;
    }
  }
  return dst;
}

} // namespace

ComplexImage fft2c(const ComplexImage &img) { return centered_transform(img, FFTW_FORWARD); }

ComplexImage ifft2c(const ComplexImage &ksp) { return centered_transform(ksp, FFTW_BACKWARD); }

} // namespace blips
