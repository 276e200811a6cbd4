#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blips/complex_image.hpp"
#include "blips/multicoil.hpp"

namespace blips {

// Centre and semi-axes in normalized coordinates: x runs over columns and y
// over rows, both in [-1, 1].
struct Ellipse
{
  double cx = 0.0;
  double cy = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double angle_deg = 0.0;
  double intensity = 0.0;
};

struct PhantomSpec
{
  std::size_t height = 64;
  std::size_t width = 64;
  // Painted in order: a pixel takes the intensity of the last ellipse covering it.
  std::vector<Ellipse> ellipses;
  double texture_amplitude = 0.1; // multiplicative, band-limited
  double phase_amplitude = 0.5;   // peak smooth phase, in units of pi
  std::uint64_t seed = 0;

  static PhantomSpec make_default(std::size_t height, std::size_t width, std::uint64_t seed);
  void validate() const;
};

// Per-seed jitter of the default ellipse layout, so datasets are not ten
// copies of the same anatomy.
PhantomSpec randomized_spec(std::size_t height, std::size_t width, std::uint64_t seed);

ComplexImage make_phantom(const PhantomSpec &spec);

// Gaussian-bump sensitivities centred on distinct border points with a
// per-coil phase, SoS-normalized.
CoilSet make_coils(std::size_t height, std::size_t width, std::size_t n_coils, std::uint64_t seed);

// apply_forward plus complex Gaussian noise (sigma per component) at sampled entries.
KSpace simulate_kspace(const ComplexImage &x, const MultiCoilSystem &sys, double noise_sigma, std::uint64_t seed);

enum class FeatureKind
{
  disc,
  bar,
  letter,
};

struct Feature
{
  FeatureKind kind = FeatureKind::disc;
  std::size_t row = 0; // centre for discs, top-left for bars and letters
  std::size_t col = 0;
  std::size_t size = 3; // disc radius, bar length, letter scale
  std::size_t thickness = 1; // bar only
  bool vertical = false;     // bar only
  char glyph = 'A';          // letter only
  double intensity = 1.0;

  // Footprint as (row, col) pairs; throws InvalidArgument if it leaves the image.
  std::vector<std::pair<std::size_t, std::size_t>> pixels(std::size_t height, std::size_t width) const;
  // Centre of the footprint's bounding box.
  std::pair<std::size_t, std::size_t> centre() const;
};

// Sets the magnitude of every footprint pixel to the feature intensity and keeps its phase.
ComplexImage plant_features(const ComplexImage &x, const std::vector<Feature> &features);

// Three shapes used by the planted-feature experiment.
std::vector<Feature> default_features(std::size_t height, std::size_t width);

FeatureKind parse_feature_kind(const std::string &name);
std::string to_string(FeatureKind kind);

} // namespace blips
