#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "blips/blind_recon.hpp"
#include "blips/cs_pdhg.hpp"
#include "blips/masks.hpp"
#include "blips/metrics.hpp"
#include "blips/phantom.hpp"
#include "blips/training.hpp"
#include "blips/unrolled.hpp"

namespace blips {

struct ExperimentSpec
{
  std::string name = "experiment";
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t n_coils = 4;
  double noise_sigma = 0.005;
  // One mask shared by every slice.
  MaskSpec mask;
  std::vector<std::size_t> train_sizes = {32};
  std::size_t n_test = 16;
  std::vector<std::string> methods = {"zf", "dict-blind", "supervised", "blips-p1"};
  ReconConfig blind;
  ReconConfig p3_blind;
  SupervisedConfig supervised;
  TrainConfig train;
  CsConfig cs;
  bool planted_features = false;
  std::size_t image_slices = 1; // test slices written as images
  std::uint64_t seed = 1;

  static ExperimentSpec defaults();
  void validate() const;
  bool needs_training() const;
};

ExperimentSpec parse_experiment_spec(const std::string &json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path &path);
std::string to_json(const ExperimentSpec &spec);

// Train and test slices come from disjoint id ranges: train ids are
// [0, max(train_sizes)), test ids follow them.
struct Slice
{
  std::size_t id = 0;
  Sample sample; // target carries any planted features
  std::vector<Feature> features;
};

enum class Partition
{
  train,
  test,
};

std::vector<Slice> make_slices(const ExperimentSpec &spec, Partition part);
std::uint64_t slice_seed(std::uint64_t base, std::size_t id, std::uint64_t stream);

struct SliceMetrics
{
  std::size_t train_size = 0;
  std::string method;
  std::size_t slice = 0;
  MetricReport metrics;
};

struct FeatureMetrics
{
  std::size_t train_size = 0;
  std::string method;
  std::size_t slice = 0;
  std::size_t feature = 0;
  std::string kind;
  double local_psnr = 0.0;
};

struct AggregateRow
{
  std::size_t train_size = 0;
  std::string method;
  std::size_t n = 0;
  double psnr_mean = 0.0;
  double psnr_std = 0.0;
  double ssim_mean = 0.0;
  double hfen_mean = 0.0;
  double hfen_normalized_mean = 0.0;
};

struct ExperimentReport
{
  std::vector<SliceMetrics> slices;
  std::vector<FeatureMetrics> features;
  std::vector<AggregateRow> aggregate;
  // Final-stage loss per epoch, keyed by "<method>@<train size>".
  std::map<std::string, std::vector<double>> losses;
  std::vector<std::filesystem::path> files;
  bool trained = false;
};

std::vector<AggregateRow> aggregate(const std::vector<SliceMetrics> &rows);

std::string slice_csv(const std::vector<SliceMetrics> &rows);
std::string aggregate_csv(const std::vector<AggregateRow> &rows);
std::string feature_csv(const std::vector<FeatureMetrics> &rows);

// Runs the whole matrix and writes per_slice.csv, aggregate.csv, features.csv
// (when planting), loss CSVs, .ctz reconstructions and PGM previews under `out`.
// A failing stage writes error.json before rethrowing.
ExperimentReport run_experiment(const ExperimentSpec &spec, const std::filesystem::path &out);

} // namespace blips
