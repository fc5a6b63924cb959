#include "fiberbayes/error.hpp"
#include "fiberbayes/io.hpp"
#include "fiberbayes/so3.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace fiberbayes;
using doctest::Approx;

namespace {

const char* kTwoFibers =
    "fiberbayes-curves 1 grid=native connection=ra,rb\n"
    "# comment line\n"
    "\n"
    "s01 1 f1 3 0 0 0 1 0 0 2 0.5 0\n"
    "s01 1 f2 4 0 0 0 0 1 0 0 2 0 0 3 1e-1\n";

FiberDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_fibers(in, "test");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("curve file parsing") {
  const FiberDataset raw = parse(kTwoFibers);
  CHECK(raw.region_a == "ra");
  CHECK(raw.region_b == "rb");
  CHECK(raw.grid_size == 0);
  REQUIRE(raw.fibers.size() == 2);
  CHECK(raw.fibers[1].key() == "s01/1/f2");
  CHECK(raw.fibers[1].curve.size() == 4);
  CHECK(raw.fibers[1].curve.point(3)(2) == 0.1);

  const FiberDataset on_grid = resample_dataset(raw, 100);
  CHECK(on_grid.grid_size == 100);
  for (const FiberRecord& f : on_grid.fibers) CHECK(f.curve.size() == 100);
  CHECK(curve_length(on_grid.fibers[0].curve) == Approx(curve_length(raw.fibers[0].curve)).epsilon(1e-2));
  CHECK((on_grid.fibers[1].curve.point(0) - raw.fibers[1].curve.point(0)).norm() == 0.0);
  CHECK((on_grid.fibers[1].curve.point(99) - raw.fibers[1].curve.point(3)).norm() < 1e-12);

  const std::string one_point = error_of("fiberbayes-curves 1 grid=native connection=a,b\ns 1 lonely 1 0 0 0\n");
  CHECK(one_point.find("lonely") != std::string::npos);
  CHECK(one_point.find("at least 2 points") != std::string::npos);
  CHECK(one_point.rfind("test:2:", 0) == 0);

  CHECK(error_of("fiberbayes-curves 1 grid=native connection=a,b\ns 1 f 2 0 0 0 1 nan 0\n").find("f") !=
        std::string::npos);
  CHECK_FALSE(error_of("fiberbayes-curves 1 grid=native connection=a,b\ns 1 f 2 0 0 0 1 1\n").empty());
  CHECK_FALSE(error_of("fiberbayes-curves 1 grid=native connection=a,b\ns 1 f 2 0 0 0 1 1 1 7\n").empty());
  CHECK_FALSE(error_of("fiberbayes-curves 1 grid=native connection=a,b\ns 1 f 2 0 0 0 1 1 1\ns 1 f 2 0 0 0 1 1 1\n")
                  .empty());
  CHECK_FALSE(error_of("fiberbayes-curves 1 grid=3 connection=a,b\ns 1 f 2 0 0 0 1 1 1\n").empty());
  CHECK_FALSE(error_of("not-a-header\n").empty());
}

TEST_CASE("curve file round trip") {
  fbtest::TempDir dir("io");
  {
    std::ofstream(dir / "raw.txt") << kTwoFibers;
  }
  const FiberDataset loaded = load_fibers(dir / "raw.txt");
  CHECK(loaded.fibers.size() == 2);
  CHECK(loaded.grid_size == 100);
  save_fibers(dir / "a.txt", loaded);
  const FiberDataset again = load_fibers(dir / "a.txt");
  REQUIRE(again.fibers.size() == loaded.fibers.size());
  for (std::size_t i = 0; i < again.fibers.size(); ++i) {
    CHECK(again.fibers[i].key() == loaded.fibers[i].key());
    CHECK((again.fibers[i].curve.points() - loaded.fibers[i].curve.points()).cwiseAbs().maxCoeff() == 0.0);
  }
  save_fibers(dir / "b.txt", again);
  CHECK(fbtest::slurp(dir / "a.txt") == fbtest::slurp(dir / "b.txt"));
  CHECK_THROWS_AS(load_fibers(dir / "missing.txt"), Error);
}

TEST_CASE("scan grouping and fiber-count filter") {
  FiberDataset d = parse(
      "fiberbayes-curves 1 grid=native connection=a,b\n"
      "s1 1 f1 2 0 0 0 1 0 0\n"
      "s2 1 f1 2 0 0 0 1 0 0\n"
      "s1 1 f2 2 0 0 0 1 0 0\n"
      "s1 2 f1 2 0 0 0 1 0 0\n");
  const std::vector<ScanGroup> groups = group_by_scan(d);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0].key() == "s1/1");
  CHECK(groups[0].fibers == std::vector<std::size_t>{0, 2});
  CHECK(groups[1].key() == "s2/1");
  const FiberDataset kept = filter_min_fibers(d, 2);
  REQUIRE(kept.fibers.size() == 2);
  CHECK(kept.fibers[0].scan_key() == "s1/1");
  CHECK(kept.fibers[1].scan_key() == "s1/1");
}

TEST_CASE("basis, decomposition and partition files") {
  fbtest::TempDir dir("io2");
  std::mt19937_64 gen(71);
  const Curve tmpl = fbtest::smooth_curve(gen, 20);
  ShapeBasis basis{tmpl, {fbtest::smooth_curve(gen, 20).points(), fbtest::smooth_curve(gen, 20).points()},
                   Eigen::Vector2d(2.5, 0.1)};
  save_basis(dir / "basis.json", basis);
  const ShapeBasis back = load_basis(dir / "basis.json");
  CHECK(back.size() == 2);
  CHECK((back.template_curve.points() - tmpl.points()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.functions[1] - basis.functions[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.eigenvalues == basis.eigenvalues);
  const auto doc = nlohmann::json::parse(fbtest::slurp(dir / "basis.json"));
  CHECK(doc.at("format") == "fiberbayes-basis");

  std::vector<DecompositionRow> rows;
  for (int i = 0; i < 3; ++i) {
    rows.push_back({"s/1/f" + std::to_string(i),
                    {fbtest::random_vector(gen, 10), Eigen::Vector2d(0.1 * i, -1.0 / 3.0),
                     exp_so3(fbtest::random_vector(gen, 0.5)), WarpingFunction::identity(20), 0.25 * i}});
  }
  save_decompositions(dir / "dec.csv", rows);
  const std::string header = fbtest::slurp(dir / "dec.csv").substr(0, 40);
  CHECK(header.rfind("id,tx,ty,tz,c1,c2,r1,r2,r3,recon_error", 0) == 0);
  const std::vector<DecompositionRow> loaded = load_decompositions(dir / "dec.csv");
  REQUIRE(loaded.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(loaded[i].id == rows[i].id);
    CHECK(loaded[i].decomposition.translation == rows[i].decomposition.translation);
    CHECK(loaded[i].decomposition.shape_coeffs == rows[i].decomposition.shape_coeffs);
    CHECK((loaded[i].decomposition.rotation.matrix() - rows[i].decomposition.rotation.matrix()).norm() < 1e-14);
    CHECK(loaded[i].decomposition.recon_error == rows[i].decomposition.recon_error);
  }

  const std::vector<std::string> ids{"x", "y", "z"};
  save_partition(dir / "p.csv", ids, Partition({4, 4, 1}));
  CHECK(fbtest::slurp(dir / "p.csv") == "id,label\nx,1\ny,1\nz,2\n");
  const auto part = load_partition(dir / "p.csv");
  CHECK(part == std::vector<std::pair<std::string, int>>{{"x", 1}, {"y", 1}, {"z", 2}});

  Eigen::Matrix3d p;
  p << 1, 0.5, 0.1, 0.5, 1, 0.25, 0.1, 0.25, 1;
  save_coclustering(dir / "cc.csv", ids, p);
  const std::string cc = fbtest::slurp(dir / "cc.csv");
  CHECK(cc.rfind("id,x,y,z\nx,1,0.5,0.10000000000000001", 0) == 0);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("chain files use 1-based labels") {
  fbtest::TempDir dir("io3");
  MixtureChain chain;
  chain.draws.push_back({5, {0, 2, 2}, Eigen::Vector3d(0.2, 0.3, 0.5), 2});
  save_chain(dir / "chain.jsonl", chain);
  std::istringstream lines(fbtest::slurp(dir / "chain.jsonl"));
  std::string line;
  std::getline(lines, line);
  const auto rec = nlohmann::json::parse(line);
  CHECK(rec.at("iteration") == 5);
  CHECK(rec.at("assignments") == nlohmann::json::array({1, 3, 3}));
  CHECK(rec.at("occupied") == 2);
}

TEST_CASE("config files") {
  fbtest::TempDir dir("io4");
  {
    std::ofstream(dir / "run.conf") << "# settings\nK = 4\n  seed=12   # trailing\n\ncomponents = shape,rot\n";
  }
  const auto cfg = load_config(dir / "run.conf");
  CHECK(cfg.size() == 3);
  CHECK(cfg.at("K") == "4");
  CHECK(cfg.at("seed") == "12");
  CHECK(cfg.at("components") == "shape,rot");
  {
    std::ofstream(dir / "bad.conf") << "no equals sign\n";
  }
  CHECK_THROWS_AS(load_config(dir / "bad.conf"), ParseError);
}
