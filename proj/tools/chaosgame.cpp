#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "chaosgame/cloud.hpp"
#include "chaosgame/constructions.hpp"
#include "chaosgame/errors.hpp"
#include "chaosgame/harness.hpp"
#include "chaosgame/metrics.hpp"
#include "chaosgame/text.hpp"
#include "chaosgame/words.hpp"

namespace cg = chaosgame;

namespace {

enum Exit { kOk = 0, kValidation = 2, kCap = 3, kInvariant = 4 };

// Accepts the same real syntax as config files, including fractions like 1/3.
const CLI::Validator kReal(
    [](std::string& s) {
      try {
        s = cg::format_real(cg::parse_real(s));
        return std::string();
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
    },
    "REAL");

struct IfsArgs {
  std::string name = "cantor";
  std::size_t dim = 0;
  std::vector<std::string> maps;

  void add(CLI::App* app) {
    app->add_option("--ifs", name, "built-in IFS: cantor, segment, example4, sierpinski, single, collapse");
    app->add_option("--dim", dim, "dimension for --map");
    app->add_option("--map", maps, "affine map 'matrix entries ; offset entries' (repeatable)");
  }
  cg::IfsSystem build() const {
    cg::IfsSpec spec;
    if (maps.empty()) {
      spec.builtin = name;
    } else {
      spec.dim = dim;
      for (const auto& m : maps) {
        const auto parts = cg::split(m, ';');
        if (parts.size() != 2) throw cg::ValidationError("--map needs 'matrix ; offset'");
        cg::MapSpec ms;
        ms.matrix = cg::parse_real_list(parts[0]);
        ms.offset = cg::parse_real_list(parts[1]);
        spec.maps.push_back(std::move(ms));
      }
    }
    return cg::make_ifs(spec);
  }
};

struct DriverArgs {
  std::string kind = "champernowne";
  int alphabet = 2;
  double z = 1.0;
  std::uint64_t seed = 0;
  std::string word;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "champernowne, de_bruijn, example4, random, literal");
    app->add_option("--alphabet,-K", alphabet, "alphabet size K");
    app->add_option("--z", z, "exponent for the example4 driver")->transform(kReal);
    app->add_option("--seed", seed, "seed for the random driver");
    app->add_option("--word", word, "comma-separated symbols for the literal driver");
  }
  cg::DriverStream build(int k) const {
    if (kind == "champernowne") return cg::champernowne(k);
    if (kind == "de_bruijn") return cg::infinite_de_bruijn(k);
    if (kind == "example4") return cg::example4_driver(z);
    if (kind == "random") return cg::random_driver(k, seed);
    if (kind == "literal") {
      cg::Word w{{}, k};
      for (auto t : cg::split(word, ',')) w.symbols.push_back(static_cast<int>(cg::parse_integer(t)));
      return cg::literal_driver(std::move(w));
    }
    throw cg::ValidationError("unknown driver kind '" + kind + "'");
  }
};

struct CloudArgs {
  double resolution = 1e-4;
  int depth = -1;
  std::uint64_t budget = cg::kDefaultPointBudget;
  std::string cache;

  void add(CLI::App* app) {
    app->add_option("--resolution", resolution, "target cloud resolution")->transform(kReal);
    app->add_option("--depth", depth, "fixed cloud depth (overrides --resolution)");
    app->add_option("--budget", budget, "point budget");
    app->add_option("--cache", cache, "cloud cache file to read");
  }
  cg::AttractorCloud build(const cg::IfsSystem& ifs) const {
    if (!cache.empty()) return cg::read_cloud_cache(cache, &ifs);
    if (depth >= 0) return cg::build_cloud_at_depth(ifs, depth, budget);
    return cg::build_cloud(ifs, resolution, budget);
  }
};

void print_symbols(cg::DriverStream& d, std::size_t n) {
  const bool digits = d.alphabet() <= 9;
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    const int s = d.next();
    if (!digits && i) line += ',';
    line += std::to_string(s);
  }
  std::cout << line << "\n";
}

void print_stats(const cg::DriverStream& d, int m_max, std::uint64_t cap) {
  std::cout << "m,n_i_m\n";
  for (int m = 1; m <= m_max; ++m) {
    cg::DriverStream copy = d.clone();
    const auto stat = cg::word_coverage(copy, m, cap);
    std::cout << m << "," << (stat.n ? std::to_string(*stat.n) : "exceeded") << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic chaos game: recovery times, drivers and constructions"};
  app.require_subcommand(1);

  // cloud build | info
  auto* cloud_cmd = app.add_subcommand("cloud", "build or inspect attractor point clouds");
  cloud_cmd->require_subcommand(1);
  IfsArgs cloud_ifs;
  CloudArgs cloud_args;
  std::string cloud_out;
  auto* cloud_build = cloud_cmd->add_subcommand("build", "build a cloud and write a cache file");
  cloud_ifs.add(cloud_build);
  cloud_args.add(cloud_build);
  cloud_build->add_option("--out", cloud_out, "cache file to write")->required();
  std::string info_path;
  auto* cloud_info = cloud_cmd->add_subcommand("info", "print a cache file header");
  cloud_info->add_option("path", info_path)->required();

  // driver emit | stats
  auto* driver_cmd = app.add_subcommand("driver", "emit driver symbols or coverage statistics");
  driver_cmd->require_subcommand(1);
  DriverArgs emit_args;
  std::size_t emit_n = 20;
  int emit_stats = 0;
  std::uint64_t driver_cap = cg::kDefaultCoverageCap;
  auto* driver_emit = driver_cmd->add_subcommand("emit", "print the first N symbols");
  emit_args.add(driver_emit);
  driver_emit->add_option("-n,--count", emit_n, "number of symbols");
  driver_emit->add_option("--stats", emit_stats, "append m,n_i_m rows for m = 1..M");
  driver_emit->add_option("--cap", driver_cap, "coverage scan cap");
  DriverArgs stats_args;
  int stats_m = 8;
  auto* driver_stats = driver_cmd->add_subcommand("stats", "print m,n_i_m rows");
  stats_args.add(driver_stats);
  driver_stats->add_option("-m", stats_m, "largest word length");
  driver_stats->add_option("--cap", driver_cap, "coverage scan cap");

  // recover
  auto* recover_cmd = app.add_subcommand("recover", "recovery time of the attractor");
  IfsArgs rec_ifs;
  DriverArgs rec_driver;
  CloudArgs rec_cloud;
  std::vector<std::string> rec_x0{"0"};
  std::vector<double> rec_eps{0.01};
  std::uint64_t rec_cap = cg::kDefaultOrbitCap;
  bool rec_certify = false;
  rec_ifs.add(recover_cmd);
  rec_driver.add(recover_cmd);
  rec_cloud.add(recover_cmd);
  recover_cmd->add_option("--x0", rec_x0, "starting points, coordinates separated by spaces");
  recover_cmd->add_option("--eps", rec_eps, "radii")->transform(kReal);
  recover_cmd->add_option("--cap", rec_cap, "orbit length cap");
  recover_cmd->add_flag("--certify", rec_certify, "also compute the certified recovery time");

  // dim
  auto* dim_cmd = app.add_subcommand("dim", "box dimension estimate");
  IfsArgs dim_ifs;
  CloudArgs dim_cloud;
  double dim_a = 0.5, dim_r = 0.5;
  std::string dim_m = "1..8";
  dim_ifs.add(dim_cmd);
  dim_cloud.add(dim_cmd);
  dim_cmd->add_option("--a", dim_a, "scale prefactor")->transform(kReal);
  dim_cmd->add_option("--r", dim_r, "scale ratio")->transform(kReal);
  dim_cmd->add_option("--m", dim_m, "index range lo..hi");

  // schedule
  auto* sched_cmd = app.add_subcommand("schedule", "slow-driver schedule table");
  IfsArgs sched_ifs;
  CloudArgs sched_cloud;
  std::string sched_psi = "power:1";
  cg::ScheduleOptions sched_opts;
  std::size_t sched_emit = 0;
  sched_ifs.add(sched_cmd);
  sched_cloud.add(sched_cmd);
  sched_cmd->add_option("--psi", sched_psi, "rate function, e.g. power:1 or iterexp:2");
  sched_cmd->add_option("--k-max", sched_opts.k_max, "number of entries");
  sched_cmd->add_option("--step-cap", sched_opts.step_cap, "cap on cumulative block length");
  sched_cmd->add_option("--emit", sched_emit, "print the first N driver symbols");

  // experiment run
  auto* exp_cmd = app.add_subcommand("experiment", "run presets or config files");
  exp_cmd->require_subcommand(1);
  auto* exp_run = exp_cmd->add_subcommand("run", "run a preset name or a config path");
  std::string exp_target;
  std::string exp_out, exp_cache;
  std::optional<std::uint64_t> exp_cap, exp_seed;
  exp_run->add_option("target", exp_target, "preset name or config path")->required();
  exp_run->add_option("--out", exp_out, "output directory");
  exp_run->add_option("--cache", exp_cache, "cloud cache directory");
  exp_run->add_option("--cap", exp_cap, "orbit length cap");
  exp_run->add_option("--seed", exp_seed, "seed override");
  auto* exp_list = exp_cmd->add_subcommand("list", "list presets");
  auto* exp_show = exp_cmd->add_subcommand("show", "print a preset in canonical form");
  std::string show_name;
  exp_show->add_option("name", show_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*cloud_build) {
      const auto ifs = cloud_ifs.build();
      const auto cloud = cloud_args.build(ifs);
      cg::write_cloud_cache(cloud, cloud_out);
      std::cout << "points," << cloud.size() << "\ndepth," << cloud.depth << "\nresolution,"
                << cg::format_real(cloud.resolution) << "\n";
    } else if (*cloud_info) {
      const auto cloud = cg::read_cloud_cache(info_path);
      std::cout << "dim," << cloud.dim() << "\npoints," << cloud.size() << "\ndepth," << cloud.depth
                << "\nresolution," << cg::format_real(cloud.resolution) << "\ndiam_lower,"
                << cg::format_real(cloud.diam_lower) << "\n";
    } else if (*driver_emit) {
      auto d = emit_args.build(emit_args.alphabet);
      const auto start = d.clone();
      print_symbols(d, emit_n);
      if (emit_stats > 0) print_stats(start, emit_stats, driver_cap);
    } else if (*driver_stats) {
      print_stats(stats_args.build(stats_args.alphabet), stats_m, driver_cap);
    } else if (*recover_cmd) {
      const auto ifs = rec_ifs.build();
      const auto cloud = rec_cloud.build(ifs);
      const auto driver = rec_driver.build(ifs.size());
      std::vector<cg::RecoveryRecord> records;
      for (const auto& x : rec_x0) {
        const cg::Point x0 = cg::parse_real_list(x);
        for (double e : rec_eps) records.push_back(cg::recovery_time(ifs, driver, x0, e, cloud, rec_cap, rec_certify));
      }
      std::cout << cg::recovery_csv(records);
      for (const auto& r : records) {
        if (!r.n) {
          std::cerr << "recovery exceeded cap " << r.cap << "\n";
          return kCap;
        }
      }
    } else if (*dim_cmd) {
      const auto ifs = dim_ifs.build();
      const auto cloud = dim_cloud.build(ifs);
      const auto dots = dim_m.find("..");
      if (dots == std::string::npos) throw cg::ValidationError("--m must look like lo..hi");
      const int lo = static_cast<int>(cg::parse_integer(dim_m.substr(0, dots)));
      const int hi = static_cast<int>(cg::parse_integer(dim_m.substr(dots + 2)));
      const auto est = cg::box_dimension(cloud, dim_a, dim_r, lo, hi);
      std::cout << cg::dimension_csv(est);
      std::cerr << "dimension " << cg::format_real(est.value) << "\n";
    } else if (*sched_cmd) {
      const auto ifs = sched_ifs.build();
      const auto cloud = sched_cloud.build(ifs);
      sched_opts.budget = sched_cloud.budget;
      const auto base = cg::choose_base_map(ifs, cloud);
      const auto sched = cg::build_schedule(ifs, cloud, cg::RateFunction::parse(sched_psi), base, sched_opts);
      std::cout << cg::schedule_csv(sched);
      if (sched.truncated) std::cerr << "schedule truncated at " << sched.entries.size() << " entries\n";
      if (sched_emit > 0) {
        auto d = cg::slow_driver(sched);
        print_symbols(d, sched_emit);
      }
    } else if (*exp_run) {
      const auto names = cg::preset_names();
      const bool is_preset = std::find(names.begin(), names.end(), exp_target) != names.end();
      const auto config = is_preset ? cg::preset(exp_target) : cg::load_config(exp_target);
      cg::RunOptions opts;
      if (!exp_out.empty()) opts.out_dir = exp_out;
      if (!exp_cache.empty()) opts.cache_dir = exp_cache;
      opts.cap = exp_cap;
      opts.seed = exp_seed;
      const auto report = cg::run_experiment(config, opts);
      std::cout << "records," << report.records.size() << "\nkey_violations," << report.key.violations
                << "\n";
      for (const auto& [phase, secs] : report.timings) std::cerr << phase << " " << secs << " s\n";
      if (report.key.violations > 0) return kInvariant;
    } else if (*exp_list) {
      for (const auto& n : cg::preset_names()) std::cout << n << "\n";
    } else if (*exp_show) {
      std::cout << cg::emit_config(cg::preset(show_name));
    }
  } catch (const cg::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const cg::CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCap;
  } catch (const cg::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCap;
  } catch (const cg::InvariantViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
  return kOk;
}
