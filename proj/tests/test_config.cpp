#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "llhomog/config.hpp"
#include "llhomog/io.hpp"

using namespace llh;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("empty file gives defaults") {
  const SimConfig c = parse_config_text("");
  const SimConfig d;
  CHECK(c.alpha == d.alpha);
  CHECK(c.eps == d.eps);
  CHECK(c.J == 0);
  CHECK(c.n_fast == 64);
  CHECK(contains(c.echo(), "alpha = 0.02"));
  CHECK(contains(c.echo(), "[random]"));
}

TEST_CASE("echo parses back to the same config") {
  SimConfig c = parse_config_text("[physics]\neps = 1/10, 1/20\nJ = 2\n[time]\nscheme = imex\n");
  const SimConfig r = parse_config_text(c.echo());
  CHECK(r.echo() == c.echo());
  CHECK(r.eps.size() == 2);
  CHECK(r.scheme == TimeScheme::imex_midpoint_projected);
}

TEST_CASE("alpha outside (0,1] is rejected") {
  const std::string m = message_of("# header\n[physics]\nalpha = 1.5\n");
  CHECK(contains(m, "alpha must lie in (0,1]"));
  CHECK(contains(m, "(A3)"));
  CHECK(contains(m, "line 3"));
  CHECK(contains(message_of("[physics]\nalpha = 0\n"), "alpha must lie in (0,1]"));
}

TEST_CASE("errors carry line numbers") {
  CHECK(contains(message_of("[physics]\n\nalhpa = 0.1\n"), "line 3: unknown key 'physics.alhpa'"));
  CHECK(contains(message_of("[grid]\nn_fast = 6x\n"), "line 2"));
  CHECK(contains(message_of("[grid]\nn_fast = 48\n"), "line 2: n_fast must be a power of two"));
  CHECK(contains(message_of("[physics]\nJ = 3\n"), "line 2: J must be 0, 1 or 2"));
  CHECK(contains(message_of("[physics]\neps = 1/80\n[grid]\nn_fine = 512\n"), "line 4: n_fine = 512 is below"));
  CHECK(contains(message_of("[physics\n"), "line 1: malformed section"));
  CHECK(contains(message_of("[physics]\nalpha\n"), "line 2: expected key = value"));
}

TEST_CASE("real numbers and fractions") {
  CHECK(parse_real("1/80") == doctest::Approx(0.0125).epsilon(1e-15));
  CHECK(parse_real(" 2e-3 ") == 2e-3);
  CHECK_THROWS_AS(parse_real("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_real("abc"), ConfigError);
}

TEST_CASE("shipped fig1 preset") {
  const SimConfig c = parse_config(std::filesystem::path(LLHOMOG_CONFIG_DIR) / "fig1.cfg");
  CHECK(c.single_eps() == doctest::Approx(1.0 / 70.0).epsilon(1e-15));
  CHECK(c.alpha == 0.02);
  CHECK(c.coefficient.family == CoefficientSpec::Family::sine);
  CHECK(c.coefficient.amplitude == 0.5);
}

TEST_CASE("fine grid size") {
  SimConfig c;
  c.points_per_period = 12;
  CHECK(fine_points(c, 1.0 / 10) == 128);
  CHECK(fine_points(c, 1.0 / 80) == 1024);
  c.points_per_period = 8;
  CHECK(fine_points(c, 1.0 / 70) == 1024);
  c.n_fine = 4096;
  CHECK(fine_points(c, 1.0 / 10) == 4096);
}

TEST_CASE("fixed number formatting") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-2.5e-20) == "-2.4999999999999999e-20");
  const auto path = std::filesystem::temp_directory_path() / "llhomog_test.csv";
  {
    CsvWriter csv(path, {"a", "b"});
    csv.row({1.0 / 3.0, 2.0});
  }
  std::ifstream in(path, std::ios::binary);
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(body == "a,b\n0.33333333333333331,2\n");
  std::filesystem::remove(path);
}

TEST_CASE("per-order slope ranges") {
  const SimConfig c = parse_config_text("[tolerance]\nslope_min = 0.5\nslope_max = 1.5\nslope_J2 = 2.5, 3.5\n");
  CHECK(c.slope_range(0) == std::pair{0.5, 1.5});
  CHECK(c.slope_range(2) == std::pair{2.5, 3.5});
  CHECK(parse_config_text(c.echo()).slope_range(2) == std::pair{2.5, 3.5});
  CHECK(contains(message_of("[tolerance]\nslope_J1 = 3, 2\n"), "line 2"));
}
