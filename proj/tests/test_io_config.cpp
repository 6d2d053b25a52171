#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cht/config.hpp"
#include "cht/io.hpp"
#include "cht/random.hpp"

using namespace cht;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  fs::path p = fs::temp_directory_path() / "cht_io_test";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("snapshot write/read round trip is bit identical") {
  Rng rng(77);
  for (const Grid& g : {Grid::line(17, 2.5), Grid::rect(6, 9, 1.25, 3.5)}) {
    Field f(g);
    for (auto& v : f.values) v = 2.0 * rng.uniform() - 1.0;
    f[0] = 0.1 + 0.2;  // not exactly representable
    const fs::path path = scratch() / "snap.pfc";
    write_snapshot(path.string(), f, 0.7251);
    auto [back, t] = read_snapshot(path.string());
    CHECK(t == 0.7251);
    CHECK(back.grid == g);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
  }
}

TEST_CASE("snapshot rejects bad magic and truncation") {
  const fs::path path = scratch() / "bad.pfc";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE and some garbage";
  }
  CHECK_THROWS(read_snapshot(path.string()));
  {
    std::ofstream out(path, std::ios::binary);
    out << "PFC1";  // header only
  }
  CHECK_THROWS(read_snapshot(path.string()));
  CHECK_THROWS(read_snapshot((scratch() / "missing.pfc").string()));
}

TEST_CASE("format_double survives parse round trip") {
  for (double v : {0.1, -3.25e-17, 1.0 / 3.0, 12345.678901234567, 0.0, 5e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv write then read recovers the series") {
  const fs::path path = scratch() / "series.csv";
  {
    CsvWriter csv(path.string(), {"t", "value"});
    csv.row({0.5, 1.0 / 7.0});
    csv.row({1.0, 2.0 / 7.0});
    csv.row({1.5, 3.0 / 7.0});
  }
  auto [t, v] = read_series_csv(path.string());
  REQUIRE(t.size() == 3);
  CHECK(t[1] == 1.0);
  CHECK(v[2] == 3.0 / 7.0);
}

TEST_CASE("fnv1a64 is stable") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 12638187200555641996ull);
  CHECK(fnv1a64("grid.nx = 8") != fnv1a64("grid.nx = 9"));
}

TEST_CASE("config parses keys, comments, and defaults") {
  Config c = Config::from_text(
      "# a comment\n"
      "grid.nx = 16\n"
      "grid.lx = 2.0  # trailing comment\n"
      "scheme.dt = 1e-3\n"
      "seed = 99\n");
  CHECK(c.integer("grid.nx") == 16);
  CHECK(c.number("grid.lx") == 2.0);
  CHECK(c.number("scheme.kappa", 5.75) == 5.75);
  CHECK(c.seed(1) == 99);
  Grid g = make_grid(c);
  CHECK(g.dim == 1);
  CHECK(g.n[0] == 16);
}

TEST_CASE("config errors carry line numbers") {
  try {
    Config::from_text("grid.nx = 8\nnot-a-known-key = 3\n", "test.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
  }
  try {
    Config::from_text("grid.nx 8\n", "test.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("test.cfg:1") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::from_text("grid.nx = 8\ngrid.nx = 9\n"), ConfigError);
  Config c = Config::from_text("grid.nx = abc\n");
  CHECK_THROWS_AS(c.number("grid.nx"), ConfigError);
  CHECK_THROWS_AS(c.number("grid.ly"), ConfigError);  // missing
}

TEST_CASE("config model validation: assumptions checked at load") {
  Config bad = Config::from_text("model.proliferation = constant:-0.5\ngrid.nx = 8\n");
  CHECK_THROWS_AS(make_model(bad), ConfigError);
  Config bad2 = Config::from_text("model.proliferation = rational:1,1,0\ngrid.nx = 8\n");
  CHECK_THROWS_AS(make_model(bad2), ConfigError);
  Config ok = Config::from_text("model.proliferation = rational:1,1,0.1\ngrid.nx = 8\n");
  ModelSpec m = make_model(ok);
  CHECK(m.proliferation.value(0.0) == doctest::Approx(1.1));
}

TEST_CASE("config cost validation: (C1) all-zero weights rejected") {
  Config c = Config::from_text("grid.nx = 8\ncost.T = 1.0\n");
  CHECK_THROWS_AS(make_cost(c, make_grid(c)), ConfigError);
}

TEST_CASE("control bounds validation: u_min > u_max rejected") {
  Grid g = Grid::line(4, 1.0);
  CHECK_THROWS_AS(Control::tabulated(g, 2, 1.0, 0.0, 1.0, -1.0),
                  std::invalid_argument);
}

TEST_CASE("initial fields are deterministic in the seed") {
  Config c = Config::from_text("grid.nx = 32\ninit.phi = random:0.5,0.1,4\n");
  Grid g = make_grid(c);
  Field a = make_initial_field(c, g, "init.phi", 1234);
  Field b = make_initial_field(c, g, "init.phi", 1234);
  Field d = make_initial_field(c, g, "init.phi", 1235);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    differs = differs || a[i] != d[i];
  }
  CHECK(differs);
}

TEST_CASE("config hash changes with content") {
  Config a = Config::from_text("grid.nx = 8\n");
  Config b = Config::from_text("grid.nx = 9\n");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() == Config::from_text("grid.nx = 8\n").hash());
}
