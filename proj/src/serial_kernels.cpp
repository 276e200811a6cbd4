#include "blips/serial.hpp"

#include "blips/errors.hpp"
#include "blips/fft.hpp"

namespace blips::kernels::serial {

PatchMatrix extract_patches(const ComplexImage &x, const PatchConfig &cfg)
{
  const std::size_t h = x.height();
  const std::size_t w = x.width();
  require(cfg.patch_side >= 1 && cfg.patch_side <= std::min(h, w), "serial::extract_patches: bad patch_side");
  const std::size_t side = cfg.patch_side;
  PatchMatrix out(static_cast<Eigen::Index>(side * side), static_cast<Eigen::Index>(h * w));
  for (std::size_t row = 0; row < h; ++row) {
    for (std::size_t col = 0; col < w; ++col) {
      for (std::size_t dr = 0; dr < side; ++dr) {
        for (std::size_t dc = 0; dc < side; ++dc) {
          out(static_cast<Eigen::Index>(dr * side + dc), static_cast<Eigen::Index>(row * w + col)) =
            x((row + dr) % h, (col + dc) % w);
        }
      }
    }
  }
  return out;
}

ComplexImage aggregate_patches(const PatchMatrix &patches, const PatchConfig &cfg, std::size_t height,
                               std::size_t width)
{
  const std::size_t side = cfg.patch_side;
  require(static_cast<std::size_t>(patches.rows()) == side * side &&
            static_cast<std::size_t>(patches.cols()) == height * width,
          "serial::aggregate_patches: shape mismatch");
  ComplexImage out(height, width);
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      for (std::size_t dr = 0; dr < side; ++dr) {
        for (std::size_t dc = 0; dc < side; ++dc) {
          out((row + dr) % height, (col + dc) % width) +=
            patches(static_cast<Eigen::Index>(dr * side + dc), static_cast<Eigen::Index>(row * width + col));
        }
      }
    }
  }
  return out;
}

FeatureMap conv3x3_forward(const ConvLayer &layer, const FeatureMap &input)
{
  const std::size_t h = input.height;
  const std::size_t w = input.width;
  FeatureMap out(layer.out_channels, h, w);
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in_channels; ++i) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              acc += layer.w(o, i, ky, kx) * input.at(i, (r + h + ky - 1) % h, (c + w + kx - 1) % w);
            }
          }
        }
        out.at(o, r, c) = acc;
      }
    }
  }
  return out;
}

FeatureMap conv3x3_backward_input(const ConvLayer &layer, const FeatureMap &grad_out)
{
  const std::size_t h = grad_out.height;
  const std::size_t w = grad_out.width;
  FeatureMap grad_in(layer.in_channels, h, w);
  for (std::size_t o = 0; o < layer.out_channels; ++o) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const double g = grad_out.at(o, r, c);
        for (std::size_t i = 0; i < layer.in_channels; ++i) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              grad_in.at(i, (r + h + ky - 1) % h, (c + w + kx - 1) % w) += layer.w(o, i, ky, kx) * g;
            }
          }
        }
      }
    }
  }
  return grad_in;
}

void conv3x3_backward_params(const FeatureMap &input, const FeatureMap &grad_out, ConvLayer &grad)
{
  const std::size_t h = input.height;
  const std::size_t w = input.width;
  for (std::size_t o = 0; o < grad.out_channels; ++o) {
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const double g = grad_out.at(o, r, c);
        grad.bias[o] += g;
        for (std::size_t i = 0; i < grad.in_channels; ++i) {
          for (std::size_t ky = 0; ky < 3; ++ky) {
            for (std::size_t kx = 0; kx < 3; ++kx) {
              grad.w(o, i, ky, kx) += g * input.at(i, (r + h + ky - 1) % h, (c + w + kx - 1) % w);
            }
          }
        }
      }
    }
  }
}

Eigen::RowVectorXcd atom_correlation(const Eigen::VectorXcd &atom, const PatchMatrix &patches)
{
  Eigen::RowVectorXcd out(patches.cols());
  for (Eigen::Index j = 0; j < patches.cols(); ++j) {
    cplx acc{};
    for (Eigen::Index k = 0; k < patches.rows(); ++k) {
      acc += std::conj(atom(k)) * patches(k, j);
    }
    out(j) = acc;
  }
  return out;
}

ComplexImage apply_normal(const MultiCoilSystem &sys, const ComplexImage &x)
{
  ComplexImage out(sys.shape());
  for (std::size_t c = 0; c < sys.n_coils(); ++c) {
    const ComplexImage &map = sys.coils()[c];
    ComplexImage img(x.height(), x.width());
    for (std::size_t i = 0; i < x.size(); ++i) {
      img[i] = map[i] * x[i];
    }
    ComplexImage ksp = fft2c(img);
    sys.mask().apply(ksp);
    img = ifft2c(ksp);
    for (std::size_t i = 0; i < img.size(); ++i) {
      out[i] += std::conj(map[i]) * img[i];
    }
  }
  return out;
}

} // namespace blips::kernels::serial
