#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "blips/blind_recon.hpp"
#include "blips/cs_pdhg.hpp"
#include "blips/ctz.hpp"
#include "blips/errors.hpp"
#include "blips/experiment.hpp"
#include "blips/masks.hpp"
#include "blips/metrics.hpp"
#include "blips/phantom.hpp"
#include "blips/training.hpp"
#include "blips/unrolled.hpp"

namespace fs = std::filesystem;
using namespace blips;

namespace {

struct Global
{
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
};

ExperimentSpec load_config(const Global &g)
{
  ExperimentSpec spec = g.config.empty() ? ExperimentSpec::defaults() : load_experiment_spec(g.config);
  return spec;
}

struct MaskOptions
{
  std::string kind = "vd1d";
  std::size_t height = 64;
  std::size_t width = 64;
  double acceleration = 5.0;
  std::size_t acs_lines = 5;
  double acs_fraction = 0.04;

  void add(CLI::App *cmd)
  {
    cmd->add_option("--kind", kind, "vd1d | poisson | equidistant")->capture_default_str();
    cmd->add_option("--height", height)->capture_default_str();
    cmd->add_option("--width", width)->capture_default_str();
    cmd->add_option("--acceleration", acceleration)->capture_default_str();
    cmd->add_option("--acs-lines", acs_lines, "center lines (vd1d)")->capture_default_str();
    cmd->add_option("--acs-fraction", acs_fraction, "center fraction (equidistant)")->capture_default_str();
  }

  MaskSpec spec(std::uint64_t seed) const
  {
    MaskSpec ms;
    ms.kind = parse_mask_kind(kind);
    ms.height = height;
    ms.width = width;
    ms.acceleration = acceleration;
    ms.acs_lines = acs_lines;
    ms.acs_fraction = acs_fraction;
    ms.seed = seed;
    return ms;
  }
};

MultiCoilSystem load_system(const std::string &coils, const std::string &mask, bool normalize)
{
  CoilSet set(ctz::read_stack(coils), normalize ? SosPolicy::normalize : SosPolicy::reject);
  return {std::move(set), ctz::read_mask(mask)};
}

std::vector<Sample> load_dataset(const fs::path &manifest, bool normalize)
{
  std::ifstream in(manifest);
  if (!in) {
    throw InvalidArgument("cannot open dataset manifest " + manifest.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw InvalidArgument(std::string("dataset manifest: ") + e.what());
  }
  const fs::path base = manifest.parent_path();
  std::vector<Sample> samples;
  for (const auto &entry : j.at("samples")) {
    auto path = [&](const char *key) { return (base / entry.at(key).get<std::string>()).string(); };
    MultiCoilSystem sys = load_system(path("coils"), path("mask"), normalize);
    KSpace y = ctz::read_stack(path("kspace"));
    ComplexImage target = ctz::read_image(path("target"));
    require(target.shape() == sys.shape() && y.size() == sys.n_coils(), "dataset: inconsistent sample shapes");
    samples.push_back({std::move(sys), std::move(y), std::move(target)});
  }
  require(!samples.empty(), "dataset manifest lists no samples");
  return samples;
}

PipelineSpec pipeline_spec(PipelineKind kind, const ExperimentSpec &cfg)
{
  PipelineSpec p = PipelineSpec::make(kind);
  p.blind = kind == PipelineKind::p3 ? cfg.p3_blind : cfg.blind;
  p.supervised = cfg.supervised;
  p.supervised2 = cfg.supervised;
  return p;
}

void print_metrics_row(const MetricReport &m)
{
  std::cout << fmt::format("{:.6f},{:.6f},{:.6f},{:.6f}\n", m.psnr_db, m.ssim, m.hfen, m.hfen_normalized);
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Blind-primed supervised MRI reconstruction toolkit"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--config", g.config, "JSON configuration (experiment spec format)");

  // phantom
  auto *phantom = app.add_subcommand("phantom", "synthesize phantoms, coil maps and k-space");
  MaskOptions pmask;
  pmask.add(phantom);
  std::size_t n_coils = 4;
  double noise = 0.005;
  std::size_t count = 1;
  bool with_features = false;
  phantom->add_option("--coils", n_coils)->capture_default_str();
  phantom->add_option("--noise", noise, "noise sigma per real/imag component")->capture_default_str();
  phantom->add_option("--count", count, "number of slices; writes a dataset manifest")->capture_default_str();
  phantom->add_flag("--features", with_features, "plant disc/bar/letter features");

  // mask
  auto *mask = app.add_subcommand("mask", "generate a sampling mask");
  MaskOptions mopt;
  mopt.add(mask);

  // recon
  auto *recon = app.add_subcommand("recon", "reconstruct from k-space");
  std::string method = "zf";
  std::string kspace_path;
  std::string coils_path;
  std::string mask_path;
  std::string params_path;
  std::string params2_path;
  std::string reference_path;
  bool normalize = false;
  recon->add_option("--method", method, "zf|cs|dict-fixed|dict-blind|supervised|blips-p1|blips-p2|blips-p3")
    ->capture_default_str();
  recon->add_option("--kspace", kspace_path)->required();
  recon->add_option("--coils", coils_path)->required();
  recon->add_option("--mask", mask_path)->required();
  recon->add_option("--params", params_path, "trained parameter directory");
  recon->add_option("--params2", params2_path, "second-stage parameters (blips-p3)");
  recon->add_option("--reference", reference_path, "print metrics against this image");
  recon->add_flag("--normalize-coils", normalize, "renormalize coil maps instead of rejecting them");

  // train
  auto *trainc = app.add_subcommand("train", "train a pipeline");
  std::string pipeline = "p1";
  std::string dataset_path;
  bool train_normalize = false;
  trainc->add_option("--pipeline", pipeline, "s|p1|p2|p3")->capture_default_str();
  trainc->add_option("--dataset", dataset_path, "dataset manifest JSON")->required();
  trainc->add_flag("--normalize-coils", train_normalize);

  // metrics
  auto *metrics = app.add_subcommand("metrics", "compare an image with a reference");
  std::string ref_path;
  std::string test_path;
  bool header = false;
  metrics->add_option("reference", ref_path)->required();
  metrics->add_option("test", test_path)->required();
  metrics->add_flag("--header", header, "print the column names first");

  // experiment
  auto *experiment = app.add_subcommand("experiment", "run an experiment matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const fs::path out(g.out);
    if (*phantom) {
      fs::create_directories(out);
      const MaskSpec ms = pmask.spec(g.seed);
      const SamplingMask m = make_mask(ms);
      ctz::write_mask(out / "mask.ctz", m);
      nlohmann::json manifest = {{"samples", nlohmann::json::array()}};
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t s = slice_seed(g.seed, i, 0);
        ComplexImage x = make_phantom(randomized_spec(ms.height, ms.width, s));
        if (with_features) {
          x = plant_features(x, default_features(ms.height, ms.width));
        }
        MultiCoilSystem sys(make_coils(ms.height, ms.width, n_coils, slice_seed(g.seed, i, 1)), m);
        const KSpace y = simulate_kspace(x, sys, noise, slice_seed(g.seed, i, 2));
        const std::string stem = count == 1 ? std::string() : fmt::format("_{:03d}", i);
        ctz::write_image(out / ("phantom" + stem + ".ctz"), x);
        ctz::write_magnitude_pgm(out / ("phantom" + stem + ".pgm"), x);
        ctz::write_stack(out / ("coils" + stem + ".ctz"), sys.coils().maps());
        ctz::write_stack(out / ("kspace" + stem + ".ctz"), y);
        manifest["samples"].push_back({{"kspace", "kspace" + stem + ".ctz"},
                                       {"coils", "coils" + stem + ".ctz"},
                                       {"mask", "mask.ctz"},
                                       {"target", "phantom" + stem + ".ctz"}});
      }
      std::ofstream(out / "dataset.json") << manifest.dump(2) << '\n';
    } else if (*mask) {
      fs::create_directories(out);
      const SamplingMask m = make_mask(mopt.spec(g.seed));
      ctz::write_mask(out / "mask.ctz", m);
      ctz::write_pbm(out / "mask.pbm", m);
      std::cout << fmt::format("sampled_fraction,{:.6f}\n", m.fraction());
    } else if (*recon) {
      const ExperimentSpec cfg = load_config(g);
      const MultiCoilSystem sys = load_system(coils_path, mask_path, normalize);
      const KSpace y = ctz::read_stack(kspace_path);
      require(y.size() == sys.n_coils(), "recon: k-space coil count does not match coil maps");
      const PatchConfig patch;
      ComplexImage x;
      if (method == "zf") {
        x = zero_filled_recon(sys, y);
      } else if (method == "cs") {
        x = cs_pdhg_recon(sys, y, cfg.cs);
      } else if (method == "dict-fixed") {
        x = fixed_dict_recon(sys, y, cfg.blind, patch);
      } else if (method == "dict-blind") {
        x = blind_recon(sys, y, cfg.blind, patch);
      } else {
        const PipelineKind kind = parse_pipeline_kind(method);
        require(!params_path.empty(), "recon: --params is required for " + method);
        PipelineParams params;
        params.theta = ctz::load_params(params_path);
        if (kind == PipelineKind::p3) {
          require(!params2_path.empty(), "recon: --params2 is required for blips-p3");
          params.theta2 = ctz::load_params(params2_path);
        }
        x = run_pipeline(pipeline_spec(kind, cfg), params, sys, y);
      }
      fs::create_directories(out);
      ctz::write_image(out / "recon.ctz", x);
      ctz::write_magnitude_pgm(out / "recon.pgm", x);
      if (!reference_path.empty()) {
        print_metrics_row(evaluate(x, ctz::read_image(reference_path)));
      }
    } else if (*trainc) {
      ExperimentSpec cfg = load_config(g);
      cfg.train.seed = g.seed;
      const PipelineKind kind = parse_pipeline_kind(pipeline);
      const std::vector<Sample> dataset = load_dataset(dataset_path, train_normalize);
      const TrainResult result = train(pipeline_spec(kind, cfg), dataset, cfg.train);
      fs::create_directories(out);
      ctz::save_params(out / "params", result.params.theta);
      if (kind == PipelineKind::p3) {
        ctz::save_params(out / "params_stage2", result.params.theta2);
      }
      std::ofstream loss(out / "loss.csv");
      loss << "stage,epoch,loss\n";
      for (std::size_t e = 0; e < result.stage1_loss_history.size(); ++e) {
        loss << fmt::format("1,{},{:.9e}\n", e, result.stage1_loss_history[e]);
      }
      const int stage = result.stage1_loss_history.empty() ? 1 : 2;
      for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
        loss << fmt::format("{},{},{:.9e}\n", stage, e, result.loss_history[e]);
      }
    } else if (*metrics) {
      const ComplexImage ref = ctz::read_image(ref_path);
      const ComplexImage test = ctz::read_image(test_path);
      if (header) {
        std::cout << "psnr_db,ssim,hfen,hfen_normalized\n";
      }
      print_metrics_row(evaluate(test, ref));
    } else if (*experiment) {
      require(!g.config.empty(), "experiment: --config <spec.json> is required");
      const ExperimentReport report = run_experiment(load_config(g), out);
      std::cout << aggregate_csv(report.aggregate);
    }
  } catch (const InvalidArgument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericFailure &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
