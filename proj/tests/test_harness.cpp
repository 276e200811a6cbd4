#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "blips/ctz.hpp"
#include "blips/errors.hpp"
#include "blips/experiment.hpp"
#include "blips/fft.hpp"
#include "support.hpp"

using namespace blips;
using testing::max_abs_diff;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name)
{
  const auto dir = fs::temp_directory_path() / ("blips_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentSpec tiny_spec()
{
  auto s = ExperimentSpec::defaults();
  s.name = "tiny";
  s.height = 32;
  s.width = 32;
  s.n_coils = 2;
  s.n_test = 2;
  s.mask.height = 32;
  s.mask.width = 32;
  s.mask.acceleration = 4.0;
  s.mask.acs_lines = 4;
  s.blind.outer_iters = 2;
  s.blind.inner_iters = 1;
  s.blind.n_atoms = 36;
  s.supervised.unrolls = 1;
  s.train.epochs = 1;
  s.train.stage1_epochs = 1;
  s.train.channels = 4;
  s.train.learning_rate = 1e-3;
  s.p3_blind.inner_iters = 1;
  s.p3_blind.n_atoms = 36;
  s.cs.iterations = 5;
  s.seed = 5;
  return s;
}

} // namespace

TEST_SUITE("harness")
{
  TEST_CASE("phantom: zero spec gives zero image")
  {
    PhantomSpec s;
    s.height = 32;
    s.width = 32;
    s.texture_amplitude = 0.0;
    CHECK(make_phantom(s) == ComplexImage(32, 32));
  }

  TEST_CASE("phantom: default 64x64 peak magnitude in [0.8, 1.0], deterministic")
  {
    const auto spec = PhantomSpec::make_default(64, 64, 7);
    REQUIRE(spec.ellipses.size() == 10);
    const auto x = make_phantom(spec);
    CHECK(max_abs(x) >= 0.8);
    CHECK(max_abs(x) <= 1.0);
    CHECK(x == make_phantom(spec));
    CHECK_FALSE(make_phantom(randomized_spec(64, 64, 1)) == make_phantom(randomized_spec(64, 64, 2)));
  }

  TEST_CASE("phantom: spec validation")
  {
    auto s = PhantomSpec::make_default(64, 64, 1);
    s.ellipses[0].intensity = 1.5;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    CHECK_THROWS_AS(PhantomSpec::make_default(16, 64, 1).validate(), InvalidArgument);
  }

  TEST_CASE("coils: single coil has unit magnitude, SoS holds")
  {
    const auto one = make_coils(40, 48, 1, 3);
    for (const auto &v : one[0].data()) {
      CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
    }
    const auto eight = make_coils(40, 48, 8, 3);
    CHECK(eight.n_coils() == 8);
    CHECK(eight.sos_deviation() < 1e-6);
    CHECK_FALSE(eight[0] == eight[1]);
  }

  TEST_CASE("eight coils with full mask: adjoint of forward is the identity")
  {
    const auto x = make_phantom(PhantomSpec::make_default(48, 48, 2));
    const MultiCoilSystem sys(make_coils(48, 48, 8, 4), SamplingMask::full(48, 48));
    CHECK(max_abs_diff(apply_adjoint(sys, apply_forward(sys, x)), x) < 1e-10);
  }

  TEST_CASE("simulate_kspace: noiseless equals forward; noise only where sampled")
  {
    const auto x = make_phantom(PhantomSpec::make_default(32, 32, 3));
    const MultiCoilSystem full(make_coils(32, 32, 2, 5), SamplingMask::full(32, 32));
    const auto y0 = simulate_kspace(x, full, 0.0, 9);
    for (std::size_t c = 0; c < 2; ++c) {
      ComplexImage vx(32, 32);
      for (std::size_t i = 0; i < vx.size(); ++i) {
        vx[i] = full.coils()[c][i] * x[i];
      }
      CHECK(max_abs_diff(y0[c], fft2c(vx)) < 1e-14);
    }
    const auto sys = testing::random_system(32, 32, 3, 0.3, 6);
    const auto y = simulate_kspace(x, sys, 0.05, 10);
    for (const auto &yc : y) {
      for (std::size_t i = 0; i < yc.size(); ++i) {
        if (!sys.mask()[i]) {
          CHECK(yc[i] == cplx{});
        }
      }
    }
  }

  TEST_CASE("simulate_kspace: noise power is 2 sigma^2 per sample")
  {
    const ComplexImage x(32, 32);
    const auto sys = testing::random_system(32, 32, 2, 0.4, 7);
    const double sigma = 0.1;
    double power = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      power += norm2_squared(simulate_kspace(x, sys, sigma, seed));
    }
    const double expect = 100.0 * 2.0 * sigma * sigma * static_cast<double>(2 * sys.mask().count());
    CHECK(std::abs(power / expect - 1.0) < 0.1);
  }

  TEST_CASE("plant_features: disc changes exactly its pixel set")
  {
    const auto x = make_phantom(PhantomSpec::make_default(64, 64, 4));
    CHECK(plant_features(x, {}) == x);
    Feature disc;
    disc.kind = FeatureKind::disc;
    disc.row = 20;
    disc.col = 20;
    disc.size = 3;
    disc.intensity = 0.9;
    const auto y = plant_features(x, {disc});
    std::set<std::pair<std::size_t, std::size_t>> expect;
    for (long dr = -3; dr <= 3; ++dr) {
      for (long dc = -3; dc <= 3; ++dc) {
        if (dr * dr + dc * dc <= 9) {
          expect.insert({static_cast<std::size_t>(20 + dr), static_cast<std::size_t>(20 + dc)});
        }
      }
    }
    CHECK(expect.size() == 29);
    for (std::size_t r = 0; r < 64; ++r) {
      for (std::size_t c = 0; c < 64; ++c) {
        if (expect.count({r, c})) {
          CHECK(std::abs(std::abs(y(r, c)) - 0.9) < 1e-12);
          if (std::abs(x(r, c)) > 0.0) {
            CHECK(std::abs(std::arg(y(r, c)) - std::arg(x(r, c))) < 1e-12);
          }
        } else {
          CHECK(y(r, c) == x(r, c));
        }
      }
    }
  }

  TEST_CASE("plant_features: bars, letters, bounds")
  {
    Feature bar;
    bar.kind = FeatureKind::bar;
    bar.row = 2;
    bar.col = 3;
    bar.size = 5;
    bar.thickness = 2;
    CHECK(bar.pixels(32, 32).size() == 10);
    CHECK(bar.centre() == std::pair<std::size_t, std::size_t>{3, 5});
    Feature letter;
    letter.kind = FeatureKind::letter;
    letter.glyph = 'T';
    letter.size = 1;
    CHECK(letter.pixels(32, 32).size() == 11); // top row of 5 plus a 6-pixel stem
    Feature edge;
    edge.kind = FeatureKind::disc;
    edge.row = 1;
    edge.col = 10;
    edge.size = 3;
    CHECK_THROWS_AS(plant_features(ComplexImage(32, 32), {edge}), InvalidArgument);
    letter.glyph = '?';
    CHECK_THROWS_AS(letter.pixels(32, 32), InvalidArgument);
    CHECK(default_features(64, 64).size() == 3);
    for (auto k : {FeatureKind::disc, FeatureKind::bar, FeatureKind::letter}) {
      CHECK(parse_feature_kind(to_string(k)) == k);
    }
  }

  TEST_CASE("ctz: bit-identical round trips for every tensor kind")
  {
    const auto dir = scratch("ctz");
    Rng rng(11);
    // float32 payloads: start from float-representable values
    ComplexImage img(5, 7);
    for (auto &v : img.data()) {
      v = cplx(static_cast<float>(rng.normal()), static_cast<float>(rng.normal()));
    }
    ctz::write_image(dir / "img.ctz", img);
    CHECK(ctz::read_image(dir / "img.ctz") == img);
    const auto h = ctz::read_header(dir / "img.ctz");
    CHECK(h.version == 1);
    CHECK(h.dtype == ctz::DType::c64);
    CHECK(h.shape == std::vector<std::size_t>{5, 7});
    const std::string text = slurp(dir / "img.ctz");
    CHECK(text.substr(0, text.find('\n')) == R"({"dtype":"c64","shape":[5,7],"version":1})");
    CHECK(text.size() == text.find('\n') + 1 + 35 * 8);

    const std::vector<ComplexImage> stack{img, 2.0 * img};
    ctz::write_stack(dir / "stack.ctz", stack);
    CHECK(ctz::read_stack(dir / "stack.ctz") == stack);

    const auto mask = testing::random_mask(6, 9, 0.4, rng);
    ctz::write_mask(dir / "mask.ctz", mask);
    CHECK(ctz::read_mask(dir / "mask.ctz") == mask);

    Dictionary d;
    d.atoms = Eigen::MatrixXcd::Zero(4, 3);
    d.atoms(1, 2) = cplx(0.5, -0.25);
    ctz::write_dictionary(dir / "dict.ctz", d);
    CHECK(ctz::read_dictionary(dir / "dict.ctz").atoms == d.atoms);

    ctz::write_image(dir / "again.ctz", ctz::read_image(dir / "img.ctz"));
    CHECK(slurp(dir / "again.ctz") == slurp(dir / "img.ctz"));
    fs::remove_all(dir);
  }

  TEST_CASE("ctz: malformed files are rejected")
  {
    const auto dir = scratch("ctz_bad");
    std::ofstream(dir / "trunc.ctz", std::ios::binary) << R"({"dtype":"c64","shape":[2,2],"version":1})" << '\n'
                                                       << "abc";
    CHECK_THROWS_AS(ctz::read_image(dir / "trunc.ctz"), InvalidArgument);
    std::ofstream(dir / "ver.ctz", std::ios::binary) << R"({"dtype":"b8","shape":[1],"version":2})" << '\n' << 'x';
    CHECK_THROWS_AS(ctz::read_b8(dir / "ver.ctz"), InvalidArgument);
    std::ofstream(dir / "long.ctz", std::ios::binary) << R"({"dtype":"b8","shape":[1],"version":1})" << '\n' << "xy";
    CHECK_THROWS_AS(ctz::read_b8(dir / "long.ctz"), InvalidArgument);
    ctz::write_b8(dir / "b.ctz", {3}, {1, 0, 1});
    CHECK_THROWS_AS(ctz::read_c64(dir / "b.ctz"), InvalidArgument);
    CHECK_THROWS_AS(ctz::read_image(dir / "missing.ctz"), InvalidArgument);
    fs::remove_all(dir);
  }

  TEST_CASE("previews: PGM header and windowing, PBM layout")
  {
    const auto dir = scratch("pgm");
    ctz::write_pgm(dir / "a.pgm", {0.0, 0.5, 1.0, 2.0}, 2, 2);
    const std::string pgm = slurp(dir / "a.pgm");
    REQUIRE(pgm.rfind("P5\n2 2\n255\n", 0) == 0);
    const std::string px = pgm.substr(pgm.size() - 4);
    CHECK(static_cast<unsigned char>(px[0]) == 0);
    CHECK(static_cast<unsigned char>(px[3]) == 255);
    CHECK(static_cast<unsigned char>(px[2]) == 128);
    ctz::write_pbm(dir / "m.pbm", SamplingMask(2, 3, {1, 0, 1, 0, 0, 1}));
    CHECK(slurp(dir / "m.pbm") == "P1\n3 2\n1 0 1\n0 0 1\n");
    fs::remove_all(dir);
  }

  TEST_CASE("experiment spec parsing")
  {
    const auto s = parse_experiment_spec(R"({"name":"x","train_sizes":[8,32],"methods":["zf","cs"],
      "mask":{"kind":"equidistant","acceleration":4,"acs_fraction":0.04},"seed":3})");
    CHECK(s.name == "x");
    CHECK(s.train_sizes == std::vector<std::size_t>{8, 32});
    CHECK(s.mask.kind == MaskKind::equidistant_1d);
    CHECK(s.mask.width == 64);
    CHECK_FALSE(s.needs_training());
    CHECK(parse_experiment_spec(to_json(s)).name == "x");
    CHECK(to_json(parse_experiment_spec(to_json(s))) == to_json(s));
    CHECK_THROWS_AS(parse_experiment_spec("{"), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_spec(R"({"methods":["zf","magic"]})"), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_spec(R"({"methods":["zf","zf"]})"), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_spec(R"({"height":16})"), InvalidArgument);
    CHECK_THROWS_AS(parse_experiment_spec(R"({"train_sizes":[]})"), InvalidArgument);
  }

  TEST_CASE("slices: train and test ids are disjoint, data deterministic")
  {
    auto s = tiny_spec();
    s.train_sizes = {3, 5};
    s.n_test = 4;
    const auto train = make_slices(s, Partition::train);
    const auto test = make_slices(s, Partition::test);
    CHECK(train.size() == 5);
    CHECK(test.size() == 4);
    std::set<std::size_t> ids;
    for (const auto &sl : train) {
      ids.insert(sl.id);
    }
    for (const auto &sl : test) {
      CHECK(ids.count(sl.id) == 0);
    }
    CHECK(test[0].id == 5);
    const auto again = make_slices(s, Partition::test);
    for (std::size_t i = 0; i < test.size(); ++i) {
      CHECK(again[i].sample.target == test[i].sample.target);
      CHECK(again[i].sample.y[1] == test[i].sample.y[1]);
    }
    CHECK_FALSE(test[0].sample.target == test[1].sample.target);
    CHECK(slice_seed(1, 2, 0) != slice_seed(1, 2, 1));
  }

  TEST_CASE("experiment: zf only writes zf rows and trains nothing")
  {
    const auto dir = scratch("exp_zf");
    auto s = tiny_spec();
    s.methods = {"zf"};
    const auto report = run_experiment(s, dir);
    CHECK_FALSE(report.trained);
    CHECK(report.slices.size() == 2);
    for (const auto &r : report.slices) {
      CHECK(r.method == "zf");
    }
    CHECK(fs::exists(dir / "per_slice.csv"));
    CHECK(fs::exists(dir / "aggregate.csv"));
    CHECK_FALSE(fs::exists(dir / "params"));
    const std::string csv = slurp(dir / "aggregate.csv");
    CHECK(csv.rfind("train_size,method,n,psnr_mean", 0) == 0);
    fs::remove_all(dir);
  }

  TEST_CASE("experiment: one aggregate row per size and method, files round trip")
  {
    const auto dir = scratch("exp_sizes");
    auto s = tiny_spec();
    s.train_sizes = {8, 32};
    s.methods = {"zf", "supervised"};
    const auto report = run_experiment(s, dir);
    REQUIRE(report.aggregate.size() == 4);
    std::set<std::pair<std::size_t, std::string>> keys;
    for (const auto &a : report.aggregate) {
      keys.insert({a.train_size, a.method});
      CHECK(a.n == 2);
    }
    CHECK(keys.size() == 4);
    CHECK(fs::exists(dir / "loss_supervised_n8.csv"));
    CHECK(fs::exists(dir / "params" / "supervised_n32" / "manifest.json"));
    for (const auto &f : report.files) {
      if (f.extension() == ".ctz") {
        const auto img = ctz::read_image(f);
        ctz::write_image(dir / "copy.ctz", img);
        CHECK(slurp(dir / "copy.ctz") == slurp(f));
      }
    }
    fs::remove_all(dir);
  }

  TEST_CASE("experiment: every CSV reproduces byte for byte")
  {
    auto s = tiny_spec();
    s.methods = {"zf", "cs", "dict-fixed", "dict-blind", "supervised", "blips-p1", "blips-p2", "blips-p3"};
    s.train_sizes = {2};
    s.planted_features = true;
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    run_experiment(s, a);
    run_experiment(s, b);
    std::size_t compared = 0;
    for (const auto &entry : fs::directory_iterator(a)) {
      if (entry.path().extension() == ".csv") {
        CAPTURE(entry.path().filename().string());
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
        ++compared;
      }
    }
    CHECK(compared == 3 + 4); // per_slice, aggregate, features, four loss files
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("experiment: failing stage leaves error.json")
  {
    const auto dir = scratch("exp_fail");
    auto s = tiny_spec();
    s.methods = {"dict-blind"};
    s.blind.nu = 1e308;
    CHECK_THROWS_AS(run_experiment(s, dir), NumericFailure);
    REQUIRE(fs::exists(dir / "error.json"));
    const std::string err = slurp(dir / "error.json");
    CHECK(err.find("\"stage\"") != std::string::npos);
    CHECK(err.find("\"error\"") != std::string::npos);
    fs::remove_all(dir);
  }
}
