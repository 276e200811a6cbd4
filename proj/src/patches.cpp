#include "blips/patches.hpp"

#include "blips/errors.hpp"

namespace blips {
namespace {

void validate(const PatchConfig &cfg, std::size_t height, std::size_t width)
{
  require(cfg.patch_side >= 1, "patches: patch_side must be >= 1");
  require(cfg.stride == 1, "patches: only stride 1 is supported");
  require(cfg.patch_side <= std::min(height, width), "patches: patch_side exceeds image dimensions");
}

} // namespace

PatchMatrix extract_patches(const ComplexImage &x, const PatchConfig &cfg)
{
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  validate(cfg, h, w);
  const std::size_t side = cfg.patch_side;
  PatchMatrix out(static_cast<Eigen::Index>(side * side), static_cast<Eigen::Index>(h * w));
  const auto n = static_cast<std::ptrdiff_t>(h * w);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) / w;
    const std::size_t col = static_cast<std::size_t>(j) % w;
    cplx *dst = out.col(j).data();
    for (std::size_t dr = 0; dr < side; ++dr) {
      const std::size_t r = (row + dr) % h;
      for (std::size_t dc = 0; dc < side; ++dc) {
        dst[dr * side + dc] = x(r, (col + dc) % w);
      }
    }
  }
  return out;
}

ComplexImage aggregate_patches(const PatchMatrix &patches, const PatchConfig &cfg, std::size_t height,
                               std::size_t width)
{
  validate(cfg, height, width);
  const std::size_t side = cfg.patch_side;
  require(static_cast<std::size_t>(patches.rows()) == side * side, "aggregate_patches: patch length mismatch");
  require(static_cast<std::size_t>(patches.cols()) == height * width, "aggregate_patches: patch count mismatch");
  ComplexImage out(height, width);
  // Gather form: each output pixel sums the patch entries that cover it.
  const auto n = static_cast<std::ptrdiff_t>(height * width);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const std::size_t row = static_cast<std::size_t>(p) / width;
    const std::size_t col = static_cast<std::size_t>(p) % width;
    cplx acc{};
    for (std::size_t dr = 0; dr < side; ++dr) {
      const std::size_t ar = (row + height - dr % height) % height;
      for (std::size_t dc = 0; dc < side; ++dc) {
        const std::size_t ac = (col + width - dc % width) % width;
        acc += patches(static_cast<Eigen::Index>(dr * side + dc), static_cast<Eigen::Index>(ar * width + ac));
      }
    }
    out[static_cast<std::size_t>(p)] = acc;
  }
  return out;
}

} // namespace blips
