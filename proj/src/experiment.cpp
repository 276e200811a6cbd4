#include "blips/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "blips/ctz.hpp"
#include "blips/errors.hpp"
#include "blips/parallel.hpp"

namespace blips {
namespace {

using nlohmann::json;

const std::set<std::string> kMethods = {"zf",         "cs",       "dict-fixed", "dict-blind",
                                        "supervised", "blips-p1", "blips-p2",   "blips-p3"};

bool is_trained(const std::string &method)
{
  return method == "supervised" || method.rfind("blips-", 0) == 0;
}

std::uint64_t splitmix(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <class T>
void read_opt(const json &j, const char *key, T &dst)
{
  if (j.contains(key)) {
    dst = j.at(key).get<T>();
  }
}

void read_recon(const json &j, ReconConfig &cfg)
{
  read_opt(j, "nu", cfg.nu);
  read_opt(j, "lambda", cfg.lambda);
  read_opt(j, "outer_iters", cfg.outer_iters);
  read_opt(j, "inner_iters", cfg.inner_iters);
  read_opt(j, "cg_iters", cfg.cg_iters);
  read_opt(j, "cg_tol", cfg.cg_tol);
  read_opt(j, "n_atoms", cfg.n_atoms);
}

json recon_json(const ReconConfig &cfg)
{
  return {{"nu", cfg.nu},           {"lambda", cfg.lambda},   {"outer_iters", cfg.outer_iters},
          {"inner_iters", cfg.inner_iters}, {"cg_iters", cfg.cg_iters}, {"cg_tol", cfg.cg_tol},
          {"n_atoms", cfg.n_atoms}};
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidArgument("cannot write " + path.string());
  }
  out << text;
}

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string loss_csv(const std::vector<double> &stage1, const std::vector<double> &final_stage)
{
  std::string s = "stage,epoch,loss\n";
  for (std::size_t e = 0; e < stage1.size(); ++e) {
    s += fmt::format("1,{},{:.9e}\n", e, stage1[e]);
  }
  const int stage = stage1.empty() ? 1 : 2;
  for (std::size_t e = 0; e < final_stage.size(); ++e) {
    s += fmt::format("{},{},{:.9e}\n", stage, e, final_stage[e]);
  }
  return s;
}

} // namespace

ExperimentSpec ExperimentSpec::defaults()
{
  ExperimentSpec spec;
  spec.mask.kind = MaskKind::variable_density_1d;
  spec.mask.acceleration = 5.0;
  spec.mask.acs_lines = 5;
  spec.mask.seed = 1;
  spec.blind.nu = 1e3;
  spec.blind.lambda = 0.2;
  spec.p3_blind = PipelineSpec::make(PipelineKind::p3).blind;
  return spec;
}

void ExperimentSpec::validate() const
{
  require(height >= 32 && width >= 32, "experiment: image dimensions must be at least 32");
  require(n_coils >= 1, "experiment: need at least one coil");
  require(noise_sigma >= 0.0, "experiment: noise sigma must be non-negative");
  require(n_test >= 1, "experiment: need at least one test slice");
  require(!methods.empty(), "experiment: no methods");
  for (const auto &m : methods) {
    require(kMethods.count(m) == 1, "experiment: unknown method '" + m + "'");
  }
  require(std::set<std::string>(methods.begin(), methods.end()).size() == methods.size(),
          "experiment: duplicate method");
  require(!train_sizes.empty(), "experiment: train_sizes must not be empty");
  for (auto n : train_sizes) {
    require(n >= 1, "experiment: train sizes must be positive");
  }
  blind.validate();
  supervised.validate();
  if (needs_training()) {
    train.validate();
  }
  if (std::find(methods.begin(), methods.end(), "blips-p3") != methods.end()) {
    p3_blind.validate();
    require(p3_blind.outer_iters == 1, "experiment: P3 uses exactly one blind iteration");
  }
}

bool ExperimentSpec::needs_training() const
{
  return std::any_of(methods.begin(), methods.end(), is_trained);
}

ExperimentSpec parse_experiment_spec(const std::string &json_text)
{
  ExperimentSpec spec = ExperimentSpec::defaults();
  try {
    const json j = json::parse(json_text);
    read_opt(j, "name", spec.name);
    read_opt(j, "height", spec.height);
    read_opt(j, "width", spec.width);
    read_opt(j, "coils", spec.n_coils);
    read_opt(j, "noise_sigma", spec.noise_sigma);
    read_opt(j, "train_sizes", spec.train_sizes);
    read_opt(j, "n_test", spec.n_test);
    read_opt(j, "methods", spec.methods);
    read_opt(j, "planted_features", spec.planted_features);
    read_opt(j, "image_slices", spec.image_slices);
    read_opt(j, "seed", spec.seed);
    if (j.contains("mask")) {
      const auto &m = j.at("mask");
      if (m.contains("kind")) {
        spec.mask.kind = parse_mask_kind(m.at("kind").get<std::string>());
      }
      read_opt(m, "acceleration", spec.mask.acceleration);
      read_opt(m, "acs_lines", spec.mask.acs_lines);
      read_opt(m, "acs_fraction", spec.mask.acs_fraction);
      read_opt(m, "seed", spec.mask.seed);
    }
    if (j.contains("blind")) {
      read_recon(j.at("blind"), spec.blind);
    }
    if (j.contains("p3_blind")) {
      read_recon(j.at("p3_blind"), spec.p3_blind);
    }
    if (j.contains("supervised")) {
      const auto &s = j.at("supervised");
      read_opt(s, "nu", spec.supervised.nu);
      read_opt(s, "unrolls", spec.supervised.unrolls);
      read_opt(s, "cg_iters", spec.supervised.cg_iters);
      read_opt(s, "cg_tol", spec.supervised.cg_tol);
    }
    if (j.contains("train")) {
      const auto &t = j.at("train");
      read_opt(t, "beta", spec.train.beta);
      read_opt(t, "epochs", spec.train.epochs);
      read_opt(t, "stage1_epochs", spec.train.stage1_epochs);
      read_opt(t, "learning_rate", spec.train.learning_rate);
      read_opt(t, "batch_size", spec.train.batch_size);
      read_opt(t, "channels", spec.train.channels);
      read_opt(t, "depth", spec.train.depth);
      read_opt(t, "seed", spec.train.seed);
    }
    if (j.contains("cs")) {
      const auto &c = j.at("cs");
      read_opt(c, "weight", spec.cs.weight);
      read_opt(c, "iterations", spec.cs.iterations);
    }
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("experiment spec: ") + e.what());
  }
  spec.mask.height = spec.height;
  spec.mask.width = spec.width;
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot open experiment spec " + path.string());
  }
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_experiment_spec(text);
}

std::string to_json(const ExperimentSpec &spec)
{
  const json j = {
    {"name", spec.name},
    {"height", spec.height},
    {"width", spec.width},
    {"coils", spec.n_coils},
    {"noise_sigma", spec.noise_sigma},
    {"train_sizes", spec.train_sizes},
    {"n_test", spec.n_test},
    {"methods", spec.methods},
    {"planted_features", spec.planted_features},
    {"image_slices", spec.image_slices},
    {"seed", spec.seed},
    {"mask",
     {{"kind", to_string(spec.mask.kind)},
      {"acceleration", spec.mask.acceleration},
      {"acs_lines", spec.mask.acs_lines},
      {"acs_fraction", spec.mask.acs_fraction},
      {"seed", spec.mask.seed}}},
    {"blind", recon_json(spec.blind)},
    {"p3_blind", recon_json(spec.p3_blind)},
    {"supervised",
     {{"nu", spec.supervised.nu},
      {"unrolls", spec.supervised.unrolls},
      {"cg_iters", spec.supervised.cg_iters},
      {"cg_tol", spec.supervised.cg_tol}}},
    {"train",
     {{"beta", spec.train.beta},
      {"epochs", spec.train.epochs},
      {"stage1_epochs", spec.train.stage1_epochs},
      {"learning_rate", spec.train.learning_rate},
      {"batch_size", spec.train.batch_size},
      {"channels", spec.train.channels},
      {"depth", spec.train.depth},
      {"seed", spec.train.seed}}},
    {"cs", {{"weight", spec.cs.weight}, {"iterations", spec.cs.iterations}}},
  };
  return j.dump(2) + "\n";
}

std::uint64_t slice_seed(std::uint64_t base, std::size_t id, std::uint64_t stream)
{
  return splitmix(splitmix(splitmix(base) ^ static_cast<std::uint64_t>(id)) ^ stream);
}

std::vector<Slice> make_slices(const ExperimentSpec &spec, Partition part)
{
  const std::size_t n_train = *std::max_element(spec.train_sizes.begin(), spec.train_sizes.end());
  const std::size_t first = part == Partition::train ? 0 : n_train;
  const std::size_t count = part == Partition::train ? n_train : spec.n_test;
  MaskSpec ms = spec.mask;
  ms.height = spec.height;
  ms.width = spec.width;
  const SamplingMask mask = make_mask(ms);
  std::vector<Slice> slices(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
  LoopErrors errors;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    errors.capture(static_cast<std::size_t>(k), [&] {
      Slice &s = slices[static_cast<std::size_t>(k)];
      s.id = first + static_cast<std::size_t>(k);
      ComplexImage truth = make_phantom(randomized_spec(spec.height, spec.width, slice_seed(spec.seed, s.id, 0)));
      if (part == Partition::test && spec.planted_features) {
        s.features = default_features(spec.height, spec.width);
        truth = plant_features(truth, s.features);
      }
      MultiCoilSystem sys(make_coils(spec.height, spec.width, spec.n_coils, slice_seed(spec.seed, s.id, 1)), mask);
      KSpace y = simulate_kspace(truth, sys, spec.noise_sigma, slice_seed(spec.seed, s.id, 2));
      s.sample = Sample{std::move(sys), std::move(y), std::move(truth)};
    });
  }
  errors.rethrow();
  return slices;
}

std::vector<AggregateRow> aggregate(const std::vector<SliceMetrics> &rows)
{
  std::vector<AggregateRow> out;
  for (const auto &r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const AggregateRow &a) {
      return a.train_size == r.train_size && a.method == r.method;
    });
    if (it == out.end()) {
      out.push_back({r.train_size, r.method});
      it = out.end() - 1;
    }
    it->n += 1;
    it->psnr_mean += r.metrics.psnr_db;
    it->ssim_mean += r.metrics.ssim;
    it->hfen_mean += r.metrics.hfen;
    it->hfen_normalized_mean += r.metrics.hfen_normalized;
  }
  for (auto &a : out) {
    const double n = static_cast<double>(a.n);
    a.psnr_mean /= n;
    a.ssim_mean /= n;
    a.hfen_mean /= n;
    a.hfen_normalized_mean /= n;
    double var = 0.0;
    for (const auto &r : rows) {
      if (r.train_size == a.train_size && r.method == a.method) {
        var += (r.metrics.psnr_db - a.psnr_mean) * (r.metrics.psnr_db - a.psnr_mean);
      }
    }
    a.psnr_std = a.n > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  }
  return out;
}

std::string slice_csv(const std::vector<SliceMetrics> &rows)
{
  std::string s = "train_size,method,slice,psnr_db,ssim,hfen,hfen_normalized\n";
  for (const auto &r : rows) {
    s += fmt::format("{},{},{},{},{},{},{}\n", r.train_size, r.method, r.slice, num(r.metrics.psnr_db),
                     num(r.metrics.ssim), num(r.metrics.hfen), num(r.metrics.hfen_normalized));
  }
  return s;
}

std::string aggregate_csv(const std::vector<AggregateRow> &rows)
{
  std::string s = "train_size,method,n,psnr_mean,psnr_std,ssim_mean,hfen_mean,hfen_normalized_mean\n";
  for (const auto &a : rows) {
    s += fmt::format("{},{},{},{},{},{},{},{}\n", a.train_size, a.method, a.n, num(a.psnr_mean), num(a.psnr_std),
                     num(a.ssim_mean), num(a.hfen_mean), num(a.hfen_normalized_mean));
  }
  return s;
}

std::string feature_csv(const std::vector<FeatureMetrics> &rows)
{
  std::string s = "train_size,method,slice,feature,kind,local_psnr_db\n";
  for (const auto &r : rows) {
    s += fmt::format("{},{},{},{},{},{}\n", r.train_size, r.method, r.slice, r.feature, r.kind, num(r.local_psnr));
  }
  return s;
}

ExperimentReport run_experiment(const ExperimentSpec &spec, const std::filesystem::path &out)
{
  spec.validate();
  std::string stage = "setup";
  ExperimentReport report;
  try {
    std::filesystem::create_directories(out / "images");
    std::filesystem::create_directories(out / "recon");
    auto emit = [&](const std::filesystem::path &path, const std::string &text) {
      write_text(path, text);
      report.files.push_back(path);
    };
    emit(out / "spec.json", to_json(spec));

    auto has = [&](const char *m) { return std::find(spec.methods.begin(), spec.methods.end(), m) != spec.methods.end(); };
    const bool need_blind = has("dict-blind") || has("blips-p1") || has("blips-p2");
    const PatchConfig patch;

    stage = "data";
    const std::vector<Slice> test = make_slices(spec, Partition::test);
    std::vector<Slice> train_set;
    if (spec.needs_training()) {
      train_set = make_slices(spec, Partition::train);
    }
    const auto n_test = static_cast<std::ptrdiff_t>(test.size());

    // Parameter-free methods: one reconstruction per test slice.
    stage = "untrained";
    std::map<std::string, std::vector<ComplexImage>> fixed;
    for (const auto &m : spec.methods) {
      if (!is_trained(m)) {
        fixed[m].resize(test.size());
      }
    }
    std::vector<ComplexImage> test_blind(test.size());
    LoopErrors blind_errors;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n_test; ++k) {
      blind_errors.capture(static_cast<std::size_t>(k), [&] {
        const auto i = static_cast<std::size_t>(k);
        const Sample &s = test[i].sample;
        if (fixed.count("zf")) {
          fixed.at("zf")[i] = zero_filled_recon(s.sys, s.y);
        }
        if (fixed.count("cs")) {
          fixed.at("cs")[i] = cs_pdhg_recon(s.sys, s.y, spec.cs);
        }
        if (fixed.count("dict-fixed")) {
          fixed.at("dict-fixed")[i] = fixed_dict_recon(s.sys, s.y, spec.blind, patch);
        }
        if (need_blind) {
          test_blind[i] = blind_recon(s.sys, s.y, spec.blind, patch);
        }
      });
    }
    blind_errors.rethrow();
    if (fixed.count("dict-blind")) {
      fixed["dict-blind"] = test_blind;
    }

    std::vector<ComplexImage> train_blind;
    if (has("blips-p1") || has("blips-p2")) {
      stage = "train-blind";
      train_blind.resize(train_set.size());
      const auto n_train = static_cast<std::ptrdiff_t>(train_set.size());
      LoopErrors train_errors;
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t k = 0; k < n_train; ++k) {
        train_errors.capture(static_cast<std::size_t>(k), [&] {
          const Sample &s = train_set[static_cast<std::size_t>(k)].sample;
          train_blind[static_cast<std::size_t>(k)] = blind_recon(s.sys, s.y, spec.blind, patch);
        });
      }
      train_errors.rethrow();
    }

    auto record = [&](std::size_t size, const std::string &method, const std::vector<ComplexImage> &recons) {
      std::vector<MetricReport> metrics(test.size());
      LoopErrors metric_errors;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t k = 0; k < n_test; ++k) {
        const auto i = static_cast<std::size_t>(k);
        metric_errors.capture(i, [&] { metrics[i] = evaluate(recons[i], test[i].sample.target); });
      }
      metric_errors.rethrow();
      for (std::size_t i = 0; i < test.size(); ++i) {
        report.slices.push_back({size, method, test[i].id, metrics[i]});
        for (std::size_t f = 0; f < test[i].features.size(); ++f) {
          const auto [r, c] = test[i].features[f].centre();
          report.features.push_back({size, method, test[i].id, f, to_string(test[i].features[f].kind),
                                     local_psnr(recons[i], test[i].sample.target, r, c, 11)});
        }
      }
      const std::string tag = is_trained(method) ? fmt::format("{}_n{}", method, size) : method;
      for (std::size_t i = 0; i < std::min(spec.image_slices, test.size()); ++i) {
        const std::string stem = fmt::format("slice{}_{}", test[i].id, tag);
        ctz::write_image(out / "recon" / (stem + ".ctz"), recons[i]);
        ctz::write_magnitude_pgm(out / "images" / (stem + ".pgm"), recons[i]);
        ctz::write_error_pgm(out / "images" / (stem + "_error.pgm"), recons[i], test[i].sample.target);
        report.files.push_back(out / "recon" / (stem + ".ctz"));
      }
    };

    for (std::size_t i = 0; i < std::min(spec.image_slices, test.size()); ++i) {
      const std::string stem = fmt::format("slice{}_reference", test[i].id);
      ctz::write_image(out / "recon" / (stem + ".ctz"), test[i].sample.target);
      ctz::write_magnitude_pgm(out / "images" / (stem + ".pgm"), test[i].sample.target);
      report.files.push_back(out / "recon" / (stem + ".ctz"));
    }

    for (std::size_t size : spec.train_sizes) {
      for (const auto &method : spec.methods) {
        if (!is_trained(method)) {
          record(size, method, fixed.at(method));
          continue;
        }
        stage = fmt::format("train {} n={}", method, size);
        report.trained = true;
        const PipelineKind kind = parse_pipeline_kind(method);
        PipelineSpec pspec = PipelineSpec::make(kind);
        pspec.blind = kind == PipelineKind::p3 ? spec.p3_blind : spec.blind;
        pspec.supervised = spec.supervised;
        pspec.supervised2 = spec.supervised;
        std::vector<Sample> dataset;
        for (std::size_t i = 0; i < size; ++i) {
          dataset.push_back(train_set[i].sample);
        }
        BlindProvider provider;
        if (!train_blind.empty()) {
          provider = [&](std::size_t i, const Sample &) { return train_blind[i]; };
        }
        const TrainResult trained = train(pspec, dataset, spec.train, provider);
        const std::string tag = fmt::format("{}_n{}", method, size);
        report.losses[fmt::format("{}@{}", method, size)] = trained.loss_history;
        emit(out / fmt::format("loss_{}.csv", tag), loss_csv(trained.stage1_loss_history, trained.loss_history));
        ctz::save_params(out / "params" / tag, trained.params.theta);
        if (kind == PipelineKind::p3) {
          ctz::save_params(out / "params" / (tag + "_stage2"), trained.params.theta2);
        }

        stage = fmt::format("reconstruct {} n={}", method, size);
        std::vector<ComplexImage> recons(test.size());
        LoopErrors recon_errors;
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < n_test; ++k) {
          recon_errors.capture(static_cast<std::size_t>(k), [&] {
            const auto i = static_cast<std::size_t>(k);
            const Sample &s = test[i].sample;
            recons[i] = kind == PipelineKind::p1 || kind == PipelineKind::p2
                          ? run_pipeline_from_blind(pspec, trained.params, s.sys, s.y, test_blind[i])
                          : run_pipeline(pspec, trained.params, s.sys, s.y);
          });
        }
        recon_errors.rethrow();
        record(size, method, recons);
        if (kind == PipelineKind::p1 || kind == PipelineKind::p2) {
          for (std::size_t i = 0; i < std::min(spec.image_slices, test.size()); ++i) {
            const ComplexImage contribution = recons[i] - test_blind[i];
            const std::string stem = fmt::format("slice{}_residual_{}", test[i].id, tag);
            ctz::write_image(out / "recon" / (stem + ".ctz"), contribution);
            ctz::write_magnitude_pgm(out / "images" / (stem + ".pgm"), contribution);
            report.files.push_back(out / "recon" / (stem + ".ctz"));
          }
        }
      }
    }

    stage = "report";
    report.aggregate = aggregate(report.slices);
    emit(out / "per_slice.csv", slice_csv(report.slices));
    emit(out / "aggregate.csv", aggregate_csv(report.aggregate));
    if (spec.planted_features) {
      emit(out / "features.csv", feature_csv(report.features));
    }
  } catch (const std::exception &e) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    const json err = {{"stage", stage}, {"error", e.what()}};
    std::ofstream(out / "error.json") << err.dump(2) << '\n';
    throw;
  }
  return report;
}

} // namespace blips
