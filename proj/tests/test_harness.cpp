#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "chaosgame/errors.hpp"
#include "chaosgame/harness.hpp"

using namespace chaosgame;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(schema_version = 1
name = tiny

[ifs]
dim = 1
map = 1/3 ; 0
map = 1/3 ; 2/3

[driver]
kind = champernowne

[sweep]
x0 = 0; 1
eps_a = 1
eps_r = 1/3
eps_m = 2..4

[cloud]
resolution = 1e-4
)";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chaosgame_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config") {
  const auto c = parse_config(kMinimal);
  CHECK(c.name == "tiny");
  const IfsSystem ifs = make_ifs(c.ifs);
  CHECK(ifs.size() == 2);
  CHECK(ifs.lip_max() == doctest::Approx(1.0 / 3.0));
  CHECK(c.sweep.x0.size() == 2);
  const auto eps = c.eps_values();
  REQUIRE(eps.size() == 3);
  CHECK(eps[0] == doctest::Approx(1.0 / 9.0));
  CHECK(eps[2] == doctest::Approx(1.0 / 81.0));
}

TEST_CASE("config round trip") {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const std::string canon = emit_config(c);
    const auto again = parse_config(canon);
    CHECK(again == c);
    CHECK(emit_config(again) == canon);
  }
  const auto c = parse_config(kMinimal);
  CHECK(parse_config(emit_config(c)) == c);
}

TEST_CASE("config errors are collected") {
  CHECK(error_of(std::string(kMinimal) + "[ifs]\nmap = 1.5 ; 0\n").find("not a contraction") !=
        std::string::npos);

  const std::string bad = R"(schema_version = 1
colour = blue
[driver]
kind = zigzag
kind = champernowne
[sweep]
x0 = 0
eps = 0.1; 0.2
[mystery]
x = 1
)";
  const std::string msg = error_of(bad);
  CHECK(msg.find("unknown key 'colour'") != std::string::npos);
  CHECK(msg.find("duplicate key 'driver.kind'") != std::string::npos);
  CHECK(msg.find("unknown driver kind 'zigzag'") != std::string::npos);
  CHECK(msg.find("strictly decreasing") != std::string::npos);
  CHECK(msg.find("unknown section [mystery]") != std::string::npos);
  CHECK(msg.find("missing required field 'ifs.builtin' or 'ifs.map'") != std::string::npos);
  CHECK(msg.find("cloud.resolution") != std::string::npos);

  CHECK(error_of("name = x\n[ifs]\nbuiltin = cantor\n[sweep]\nx0 = 0\neps = 0.1\n[cloud]\nresolution = 1e-3\n")
            .find("schema_version") != std::string::npos);
  CHECK(error_of("schema_version = 2\n[ifs]\nbuiltin = cantor\n[sweep]\nx0 = 0\neps = 0.1\n[cloud]\nresolution = 1e-3\n")
            .find("unsupported schema_version") != std::string::npos);
  CHECK(error_of("schema_version = 1\n[ifs]\nbuiltin = cantor\n[sweep]\nx0 = 0 0\neps = 0.1\n[cloud]\nresolution = 1e-3\n")
            .find("coordinates") != std::string::npos);
  CHECK(error_of("schema_version = 1\n[ifs]\nbuiltin = cantor\n[driver]\nkind = slow\npsi = linear:2\n[sweep]\nx0 = 0\n[cloud]\nresolution = 1e-3\n")
            .find("driver.psi") != std::string::npos);
  CHECK_THROWS_AS(preset("nope"), ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ValidationError);
}

TEST_CASE("comments and whitespace") {
  const auto c = parse_config("# header\nschema_version = 1   # trailing\n\n[ ifs ]\nbuiltin = segment\n"
                              "[sweep]\nx0 = 0.5\neps = 0.1 ; 0.05\ncertify = yes\n[cloud]\ndepth = 6\n");
  CHECK(c.ifs.builtin == "segment");
  CHECK(c.sweep.eps == std::vector<double>{0.1, 0.05});
  CHECK(c.sweep.certify);
  CHECK(c.cloud.depth == 6);
}

TEST_CASE("example4 preset reproduces the closed forms") {
  const auto report = run_experiment(preset("example4-z1"), {.write_files = false});
  REQUIRE(report.records.size() == 20);
  for (const auto& r : report.records) {
    REQUIRE(r.n);
    const int k = static_cast<int>(std::lround(-std::log2(r.eps)));
    const auto kk = static_cast<std::uint64_t>(k);
    const std::uint64_t want = r.x0[0] == 1.0 ? kk * (1ull << k) + kk - 1
                                               : (kk - 1) * (1ull << (k - 1)) + kk - 2;
    CHECK(*r.n == want);
  }
  CHECK(report.key.violations == 0);
  CHECK(report.key.checked == 20);
}

TEST_CASE("runs are deterministic and the cache is transparent") {
  auto cfg = preset("sierpinski-debruijn");
  cfg.cloud.resolution = 5e-3;
  cfg.sweep.m_hi = 6;
  cfg.dimension.m_hi = 6;
  const fs::path cache = scratch("cache"), a = scratch("a"), b = scratch("b"), c = scratch("c");

  run_experiment(cfg, {.out_dir = a});
  run_experiment(cfg, {.out_dir = b, .cache_dir = cache});
  REQUIRE(!fs::is_empty(cache));
  run_experiment(cfg, {.out_dir = c, .cache_dir = cache});
  for (const char* f : {"recovery.csv", "cover.csv", "dimension.csv", "recovery.dat", "dimension.dat",
                        "summary.txt"}) {
    INFO(f);
    const std::string ref = slurp(a / f);
    CHECK(!ref.empty());
    CHECK(slurp(b / f) == ref);
    CHECK(slurp(c / f) == ref);
  }
  CHECK(slurp(a / "recovery.csv").rfind("driver,x0,eps,n,guard,log_rate\n", 0) == 0);
  CHECK(slurp(a / "cover.csv").rfind("eps,lower,upper\n", 0) == 0);
  CHECK(slurp(a / "dimension.csv").rfind("b_m,lower,upper,rate_lower,rate_upper\n", 0) == 0);
  for (const auto& p : {cache, a, b, c}) fs::remove_all(p);
}

TEST_CASE("phase errors carry a label") {
  auto cfg = preset("cantor-champernowne");
  cfg.cloud.resolution = 1e-12;
  cfg.cloud.budget = 1 << 10;
  try {
    run_experiment(cfg, {.write_files = false});
    FAIL("expected a budget error");
  } catch (const BudgetExceeded& e) {
    CHECK(std::string(e.what()).rfind("cloud: ", 0) == 0);
  }

  auto lit = parse_config(kMinimal);
  lit.driver.kind = "literal";
  lit.driver.word = "1,2,1";
  try {
    run_experiment(lit, {.write_files = false});
    FAIL("expected the literal driver to run out");
  } catch (const CapExceeded& e) {
    CHECK(std::string(e.what()).rfind("recovery: ", 0) == 0);
  }
}

TEST_CASE("orbit cap marks records as exceeded") {
  auto cfg = parse_config(kMinimal);
  const auto report = run_experiment(cfg, {.cap = 3, .write_files = false});
  for (const auto& r : report.records) {
    CHECK_FALSE(r.n);
    CHECK(r.cap == 3);
  }
  CHECK(recovery_csv(report.records).find("exceeded") != std::string::npos);
}

TEST_CASE("slow preset schedule") {
  auto cfg = preset("slow-power-z1");
  const auto report = run_experiment(cfg, {.write_files = false});
  REQUIRE(report.schedule);
  CHECK(report.records.size() == cfg.sweep.x0.size() * report.schedule->entries.size());
  CHECK(report.key.violations == 0);
  CHECK(schedule_csv(*report.schedule).rfind("k,m_k,p_k,N_hat_k,v_k\n", 0) == 0);
}
