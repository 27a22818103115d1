#include "chaosgame/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "chaosgame/errors.hpp"
#include "chaosgame/rate.hpp"
#include "chaosgame/text.hpp"

namespace chaosgame {

namespace {

const std::map<std::string, std::set<std::string>, std::less<>> kKeys = {
    {"", {"schema_version", "name", "seed"}},
    {"ifs", {"builtin", "dim", "map"}},
    {"driver", {"kind", "z", "seed", "word", "psi", "k_max", "step_cap", "ratio_target"}},
    {"sweep", {"x0", "eps_a", "eps_r", "eps_m", "eps", "certify"}},
    {"cloud", {"resolution", "depth", "budget", "points"}},
    {"caps", {"orbit"}},
    {"dimension", {"a", "r", "m"}},
    {"output", {"dir"}},
};

const std::set<std::string, std::less<>> kDriverKinds = {"champernowne", "de_bruijn", "example4",
                                                         "random",       "slow",      "literal"};

std::vector<Point> parse_points(std::string_view text) {
  std::vector<Point> out;
  for (auto item : split(text, ';')) {
    Point p = parse_real_list(item);
    if (p.empty()) throw ValidationError("empty point in list '" + std::string(text) + "'");
    out.push_back(std::move(p));
  }
  return out;
}

std::pair<int, int> parse_range(std::string_view text) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    const int v = static_cast<int>(parse_integer(text));
    return {v, v};
  }
  return {static_cast<int>(parse_integer(text.substr(0, dots))),
          static_cast<int>(parse_integer(text.substr(dots + 2)))};
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("not a boolean: '" + std::string(text) + "'");
}

std::string join_reals(const std::vector<double>& v, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_real(v[i]);
  }
  return out;
}

std::string join_points(const std::vector<Point>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += "; ";
    out += join_reals(pts[i]);
  }
  return out;
}

template <class F>
auto with_phase(std::string_view phase, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(phase) + ": ";
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const CapExceeded& e) {
    throw CapExceeded(prefix + e.what());
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded(prefix + e.what());
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(prefix + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << text;
}

}  // namespace

std::vector<double> ExperimentConfig::eps_values() const {
  if (!sweep.eps.empty()) return sweep.eps;
  std::vector<double> out;
  if (sweep.a && sweep.r) {
    for (int m = sweep.m_lo; m <= sweep.m_hi; ++m) out.push_back(*sweep.a * std::pow(*sweep.r, m));
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::set<std::string> seen;
  std::string section;
  std::size_t line_no = 0;
  bool have_schema = false;

  std::istringstream is{std::string(text)};
  std::string raw;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "malformed section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty() || !kKeys.contains(section)) {
        errors.push_back(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto known = kKeys.find(section);
    if (known == kKeys.end()) continue;
    const std::string qualified = section.empty() ? key : section + "." + key;
    if (!known->second.contains(key)) {
      errors.push_back(where + "unknown key '" + qualified + "'");
      continue;
    }
    if (qualified != "ifs.map" && !seen.insert(qualified).second) {
      errors.push_back(where + "duplicate key '" + qualified + "'");
      continue;
    }
    try {
      if (qualified == "schema_version") {
        c.schema_version = static_cast<int>(parse_integer(value));
        have_schema = true;
      } else if (qualified == "name") {
        c.name = std::string(value);
      } else if (qualified == "seed") {
        c.seed = parse_unsigned(value);
      } else if (qualified == "ifs.builtin") {
        c.ifs.builtin = std::string(value);
      } else if (qualified == "ifs.dim") {
        c.ifs.dim = parse_unsigned(value);
      } else if (qualified == "ifs.map") {
        const auto parts = split(value, ';');
        if (parts.size() != 2) throw ValidationError("map needs 'matrix entries ; offset entries'");
        c.ifs.maps.push_back({parse_real_list(parts[0]), parse_real_list(parts[1])});
      } else if (qualified == "driver.kind") {
        c.driver.kind = std::string(value);
      } else if (qualified == "driver.z") {
        c.driver.z = parse_real(value);
      } else if (qualified == "driver.seed") {
        c.driver.seed = parse_unsigned(value);
      } else if (qualified == "driver.word") {
        c.driver.word = std::string(value);
      } else if (qualified == "driver.psi") {
        c.driver.psi = std::string(value);
      } else if (qualified == "driver.k_max") {
        c.driver.k_max = static_cast<int>(parse_integer(value));
      } else if (qualified == "driver.step_cap") {
        c.driver.step_cap = parse_unsigned(value);
      } else if (qualified == "driver.ratio_target") {
        c.driver.ratio_target = parse_real(value);
      } else if (qualified == "sweep.x0") {
        c.sweep.x0 = parse_points(value);
      } else if (qualified == "sweep.eps_a") {
        c.sweep.a = parse_real(value);
      } else if (qualified == "sweep.eps_r") {
        c.sweep.r = parse_real(value);
      } else if (qualified == "sweep.eps_m") {
        std::tie(c.sweep.m_lo, c.sweep.m_hi) = parse_range(value);
      } else if (qualified == "sweep.eps") {
        for (auto item : split(value, ';')) c.sweep.eps.push_back(parse_real(item));
      } else if (qualified == "sweep.certify") {
        c.sweep.certify = parse_bool(value);
      } else if (qualified == "cloud.resolution") {
        c.cloud.resolution = parse_real(value);
      } else if (qualified == "cloud.depth") {
        c.cloud.depth = static_cast<int>(parse_integer(value));
      } else if (qualified == "cloud.budget") {
        c.cloud.budget = parse_unsigned(value);
      } else if (qualified == "cloud.points") {
        c.cloud.points = parse_points(value);
      } else if (qualified == "caps.orbit") {
        c.orbit_cap = parse_unsigned(value);
      } else if (qualified == "dimension.a") {
        c.dimension.a = parse_real(value);
      } else if (qualified == "dimension.r") {
        c.dimension.r = parse_real(value);
      } else if (qualified == "dimension.m") {
        std::tie(c.dimension.m_lo, c.dimension.m_hi) = parse_range(value);
      } else if (qualified == "output.dir") {
        c.output_dir = std::string(value);
      }
    } catch (const ValidationError& e) {
      errors.push_back(where + qualified + ": " + e.what());
    }
  }

  // Semantic checks.
  if (!have_schema) errors.push_back("missing required field 'schema_version'");
  else if (c.schema_version != 1) errors.push_back("unsupported schema_version " + std::to_string(c.schema_version));

  std::size_t dim = 0;
  if (c.ifs.builtin.empty() && c.ifs.maps.empty()) {
    errors.push_back("missing required field 'ifs.builtin' or 'ifs.map'");
  } else if (!c.ifs.builtin.empty() && (!c.ifs.maps.empty() || c.ifs.dim != 0)) {
    errors.push_back("ifs.builtin cannot be combined with ifs.dim or ifs.map");
  } else {
    if (c.ifs.builtin.empty() && c.ifs.dim == 0) errors.push_back("missing required field 'ifs.dim'");
    try {
      const IfsSystem ifs = make_ifs(c.ifs);
      dim = ifs.dim();
    } catch (const ValidationError& e) {
      errors.push_back(std::string("ifs: ") + e.what());
    }
  }

  if (!kDriverKinds.contains(c.driver.kind)) {
    errors.push_back("unknown driver kind '" + c.driver.kind + "'");
  }
  if (c.driver.kind == "example4" && !c.driver.z) errors.push_back("driver kind example4 needs 'driver.z'");
  if (c.driver.z && !(*c.driver.z > 0.0)) errors.push_back("driver.z must be > 0");
  if (c.driver.kind == "literal" && c.driver.word.empty()) errors.push_back("driver kind literal needs 'driver.word'");
  if (c.driver.kind == "slow") {
    if (c.driver.psi.empty()) {
      errors.push_back("driver kind slow needs 'driver.psi'");
    } else {
      try {
        RateFunction::parse(c.driver.psi);
      } catch (const ValidationError& e) {
        errors.push_back(std::string("driver.psi: ") + e.what());
      }
    }
  }
  if (c.driver.k_max < 1) errors.push_back("driver.k_max must be >= 1");

  if (c.sweep.x0.empty()) errors.push_back("missing required field 'sweep.x0'");
  for (const auto& p : c.sweep.x0) {
    if (dim != 0 && p.size() != dim) {
      errors.push_back("sweep.x0 point has " + std::to_string(p.size()) + " coordinates, IFS dimension is " + std::to_string(dim));
    }
  }
  const bool geometric = c.sweep.a || c.sweep.r || seen.contains("sweep.eps_m");
  if (geometric && !c.sweep.eps.empty()) errors.push_back("sweep.eps cannot be combined with eps_a/eps_r/eps_m");
  if (geometric && !(c.sweep.a && c.sweep.r && seen.contains("sweep.eps_m"))) {
    errors.push_back("geometric eps schedule needs eps_a, eps_r and eps_m");
  }
  if (c.sweep.a && !(*c.sweep.a > 0.0)) errors.push_back("sweep.eps_a must be > 0");
  if (c.sweep.r && !(*c.sweep.r > 0.0 && *c.sweep.r < 1.0)) errors.push_back("sweep.eps_r must lie in (0, 1)");
  if (geometric && c.sweep.m_lo > c.sweep.m_hi) errors.push_back("sweep.eps_m range is empty");
  if (!geometric && c.sweep.eps.empty() && c.driver.kind != "slow") {
    errors.push_back("missing required eps schedule (sweep.eps or eps_a/eps_r/eps_m)");
  }
  for (std::size_t i = 0; i < c.sweep.eps.size(); ++i) {
    if (!(c.sweep.eps[i] > 0.0)) errors.push_back("sweep.eps values must be > 0");
    if (i > 0 && !(c.sweep.eps[i] < c.sweep.eps[i - 1])) {
      errors.push_back("sweep.eps must be strictly decreasing");
      break;
    }
  }

  if (c.cloud.points.empty() && !c.cloud.resolution && !c.cloud.depth) {
    errors.push_back("missing required field 'cloud.resolution' (or cloud.depth or cloud.points)");
  }
  if (c.cloud.resolution && !(*c.cloud.resolution > 0.0 || (!c.cloud.points.empty() && *c.cloud.resolution >= 0.0))) {
    errors.push_back("cloud.resolution must be > 0");
  }
  if (c.cloud.depth && *c.cloud.depth < 0) errors.push_back("cloud.depth must be >= 0");
  if (c.cloud.depth && c.cloud.resolution && c.cloud.points.empty()) {
    errors.push_back("cloud.depth and cloud.resolution are mutually exclusive");
  }
  for (const auto& p : c.cloud.points) {
    if (dim != 0 && p.size() != dim) {
      errors.push_back("cloud.points entry has the wrong dimension");
      break;
    }
  }
  if (seen.contains("dimension.a") || seen.contains("dimension.r") || seen.contains("dimension.m")) {
    if (!(c.dimension.a > 0.0)) errors.push_back("dimension.a must be > 0");
    if (!(c.dimension.r > 0.0 && c.dimension.r < 1.0)) errors.push_back("dimension.r must lie in (0, 1)");
    if (!seen.contains("dimension.m") || c.dimension.m_lo > c.dimension.m_hi) {
      errors.push_back("dimension.m must be a nonempty range lo..hi");
    }
  }

  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return c;
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "schema_version = " << c.schema_version << "\n";
  if (!c.name.empty()) os << "name = " << c.name << "\n";
  os << "seed = " << c.seed << "\n";

  os << "\n[ifs]\n";
  if (!c.ifs.builtin.empty()) {
    os << "builtin = " << c.ifs.builtin << "\n";
  } else {
    os << "dim = " << c.ifs.dim << "\n";
    for (const auto& m : c.ifs.maps) os << "map = " << join_reals(m.matrix) << " ; " << join_reals(m.offset) << "\n";
  }

  os << "\n[driver]\n";
  os << "kind = " << c.driver.kind << "\n";
  if (c.driver.z) os << "z = " << format_real(*c.driver.z) << "\n";
  if (c.driver.seed) os << "seed = " << *c.driver.seed << "\n";
  if (!c.driver.word.empty()) os << "word = " << c.driver.word << "\n";
  if (!c.driver.psi.empty()) os << "psi = " << c.driver.psi << "\n";
  os << "k_max = " << c.driver.k_max << "\n";
  os << "step_cap = " << c.driver.step_cap << "\n";
  if (c.driver.ratio_target) os << "ratio_target = " << format_real(*c.driver.ratio_target) << "\n";

  os << "\n[sweep]\n";
  os << "x0 = " << join_points(c.sweep.x0) << "\n";
  if (c.sweep.a) {
    os << "eps_a = " << format_real(*c.sweep.a) << "\n";
    os << "eps_r = " << format_real(*c.sweep.r) << "\n";
    os << "eps_m = " << c.sweep.m_lo << ".." << c.sweep.m_hi << "\n";
  } else if (!c.sweep.eps.empty()) {
    os << "eps = " << join_reals(c.sweep.eps, "; ") << "\n";
  }
  os << "certify = " << (c.sweep.certify ? "true" : "false") << "\n";

  os << "\n[cloud]\n";
  if (c.cloud.resolution) os << "resolution = " << format_real(*c.cloud.resolution) << "\n";
  if (c.cloud.depth) os << "depth = " << *c.cloud.depth << "\n";
  os << "budget = " << c.cloud.budget << "\n";
  if (!c.cloud.points.empty()) os << "points = " << join_points(c.cloud.points) << "\n";

  os << "\n[caps]\n";
  os << "orbit = " << c.orbit_cap << "\n";

  if (c.dimension.enabled()) {
    os << "\n[dimension]\n";
    os << "a = " << format_real(c.dimension.a) << "\n";
    os << "r = " << format_real(c.dimension.r) << "\n";
    os << "m = " << c.dimension.m_lo << ".." << c.dimension.m_hi << "\n";
  }
  if (!c.output_dir.empty()) os << "\n[output]\ndir = " << c.output_dir << "\n";
  return os.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string example4_points(int n_max) {
  std::string out = "0";
  for (int n = n_max; n >= 0; --n) out += "; " + format_real(std::ldexp(1.0, -n));
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"cantor-champernowne", "cantor-debruijn", "sierpinski-debruijn", "example4-z1",
          "example4-z05",        "slow-power-z1",   "segment-dimension"};
}

std::string preset_text(std::string_view name) {
  const std::string header = "schema_version = 1\nname = " + std::string(name) + "\nseed = 1\n";
  if (name == "cantor-champernowne" || name == "cantor-debruijn") {
    const std::string kind = name == "cantor-champernowne" ? "champernowne" : "de_bruijn";
    return header +
           "\n[ifs]\nbuiltin = cantor\n"
           "\n[driver]\nkind = " + kind + "\n"
           "\n[sweep]\nx0 = 0; 1; 5\neps_a = 1\neps_r = 1/3\neps_m = " +
           (kind == "champernowne" ? "8..12" : "6..12") +
           "\ncertify = true\n"
           "\n[cloud]\nresolution = 3e-7\n"
           "\n[dimension]\na = 0.51\nr = 1/3\nm = 9..12\n";
  }
  if (name == "sierpinski-debruijn") {
    return header +
           "\n[ifs]\nbuiltin = sierpinski\n"
           "\n[driver]\nkind = de_bruijn\n"
           "\n[sweep]\nx0 = 0 0; 1 1; 0.5 0.2\neps_a = 1\neps_r = 1/2\neps_m = 3..9\ncertify = true\n"
           "\n[cloud]\nresolution = 5e-4\n"
           "\n[dimension]\na = 0.51\nr = 1/2\nm = 4..8\n";
  }
  if (name == "example4-z1" || name == "example4-z05") {
    const bool one = name == "example4-z1";
    const int n_max = one ? 20 : 24;
    return header +
           "\n[ifs]\nbuiltin = example4\n"
           "\n[driver]\nkind = example4\nz = " + (one ? "1" : "0.5") + "\n"
           "\n[sweep]\nx0 = 1; 0\neps_a = 1\neps_r = 1/2\neps_m = " + (one ? "3..12" : "10..16") + "\n"
           "\n[cloud]\nresolution = " + format_real(std::ldexp(1.0, -(n_max + 1))) +
           "\npoints = " + example4_points(n_max) + "\n";
  }
  if (name == "slow-power-z1") {
    return header +
           "\n[ifs]\nbuiltin = cantor\n"
           "\n[driver]\nkind = slow\npsi = power:1\nk_max = 3\nstep_cap = 5000000\n"
           "\n[sweep]\nx0 = 0; 1; 0.5; -1; 2\ncertify = true\n"
           "\n[cloud]\nresolution = 1e-9\n";
  }
  if (name == "segment-dimension") {
    return header +
           "\n[ifs]\nbuiltin = segment\n"
           "\n[driver]\nkind = champernowne\n"
           "\n[sweep]\nx0 = 0\neps = 0.125; 0.0625\n"
           "\n[cloud]\ndepth = 23\n"
           "\n[dimension]\na = 2.98e-7\nr = 0.99\nm = 0..3\n";
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

ExperimentConfig preset(std::string_view name) { return parse_config(preset_text(name)); }

IfsSystem make_ifs(const IfsSpec& spec) {
  if (!spec.builtin.empty()) return named_ifs(spec.builtin);
  std::vector<AffineMap> maps;
  for (const auto& m : spec.maps) maps.emplace_back(spec.dim, m.matrix, m.offset);
  return IfsSystem(std::move(maps));
}

AttractorCloud make_cloud(const ExperimentConfig& config, const IfsSystem& ifs,
                          const std::optional<std::filesystem::path>& cache_dir) {
  const CloudSpec& spec = config.cloud;
  if (!spec.points.empty()) {
    PointSet pts(ifs.dim());
    for (const auto& p : spec.points) pts.push_back(p);
    return AttractorCloud::from_points(std::move(pts), spec.resolution.value_or(0.0));
  }
  std::optional<std::filesystem::path> cache_file;
  if (cache_dir) {
    std::ostringstream key;
    for (const auto& m : ifs.maps()) key << join_reals(m.matrix()) << ";" << join_reals(m.offset()) << "|";
    key << "res=" << (spec.resolution ? format_real(*spec.resolution) : "")
        << "|depth=" << (spec.depth ? std::to_string(*spec.depth) : "") << "|budget=" << spec.budget;
    char name[40];
    std::snprintf(name, sizeof name, "cloud-%016llx.ifsc",
                  static_cast<unsigned long long>(fnv1a(key.str())));
    cache_file = *cache_dir / name;
    if (std::filesystem::exists(*cache_file)) return read_cloud_cache(*cache_file, &ifs);
  }
  AttractorCloud cloud = spec.depth ? build_cloud_at_depth(ifs, *spec.depth, spec.budget)
                                    : build_cloud(ifs, *spec.resolution, spec.budget);
  if (cache_file) {
    std::filesystem::create_directories(*cache_dir);
    write_cloud_cache(cloud, *cache_file);
  }
  return cloud;
}

DriverStream make_driver(const ExperimentConfig& config, const IfsSystem& ifs,
                         const Schedule* schedule) {
  const DriverSpec& d = config.driver;
  const int k = ifs.size();
  if (d.kind == "champernowne") return champernowne(k);
  if (d.kind == "de_bruijn") return infinite_de_bruijn(k);
  if (d.kind == "example4") {
    if (k != 2) throw ValidationError("example4 driver needs a 2-map IFS");
    return example4_driver(*d.z);
  }
  if (d.kind == "random") return random_driver(k, d.seed.value_or(config.seed));
  if (d.kind == "literal") {
    Word w{{}, k};
    for (auto item : split(d.word, ',')) w.symbols.push_back(static_cast<int>(parse_integer(item)));
    return literal_driver(std::move(w));
  }
  if (d.kind == "slow") {
    if (!schedule) throw ValidationError("slow driver needs a schedule");
    return slow_driver(*schedule);
  }
  throw ValidationError("unknown driver kind '" + d.kind + "'");
}

RunReport run_experiment(const ExperimentConfig& input, const RunOptions& options) {
  using Clock = std::chrono::steady_clock;
  RunReport report;
  report.config = input;
  ExperimentConfig& config = report.config;
  if (options.seed) config.seed = *options.seed;
  if (options.cap) config.orbit_cap = *options.cap;

  auto timed = [&](std::string_view phase, auto&& f) {
    const auto t0 = Clock::now();
    auto result = with_phase(phase, f);
    report.timings.emplace_back(std::string(phase),
                                std::chrono::duration<double>(Clock::now() - t0).count());
    return result;
  };

  const IfsSystem ifs = timed("ifs", [&] { return make_ifs(config.ifs); });
  const AttractorCloud cloud = timed("cloud", [&] { return make_cloud(config, ifs, options.cache_dir); });
  report.cloud_points = cloud.size();
  report.cloud_resolution = cloud.resolution;
  report.cloud_depth = cloud.depth;

  if (config.driver.kind == "slow") {
    report.schedule = timed("schedule", [&] {
      const BaseMapChoice base = choose_base_map(ifs, cloud);
      ScheduleOptions opts;
      opts.k_max = config.driver.k_max;
      opts.step_cap = config.driver.step_cap;
      opts.first_ratio_target = config.driver.ratio_target;
      opts.budget = config.cloud.budget;
      Schedule s = build_schedule(ifs, cloud, RateFunction::parse(config.driver.psi), base, opts);
      if (s.entries.empty()) throw CapExceeded("no schedule entry fits within step_cap");
      return s;
    });
  }
  const DriverStream driver = timed("driver", [&] {
    return make_driver(config, ifs, report.schedule ? &*report.schedule : nullptr);
  });
  report.driver_id = driver.id();

  std::vector<double> eps = config.eps_values();
  if (eps.empty() && report.schedule) {
    for (const auto& e : report.schedule->entries) eps.push_back(3.0 * e.c);
  }

  report.covers = timed("cover", [&] {
    std::vector<CoverEstimate> covers;
    for (double e : eps) covers.push_back(covering_estimate(cloud.points, e));
    return covers;
  });

  report.records = timed("recovery", [&] {
    std::vector<RecoveryRecord> records;
    for (const auto& x0 : config.sweep.x0) {
      for (double e : eps) {
        records.push_back(recovery_time(ifs, driver, x0, e, cloud, config.orbit_cap, config.sweep.certify));
      }
    }
    return records;
  });
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    ++report.key.checked;
    if (!key_inequality_check(report.records[i], report.covers[i % eps.size()])) ++report.key.violations;
  }

  if (config.dimension.enabled()) {
    report.dimension = timed("dimension", [&] {
      return box_dimension(cloud, config.dimension.a, config.dimension.r, config.dimension.m_lo,
                           config.dimension.m_hi);
    });
  }

  if (options.write_files) {
    std::filesystem::path dir = options.out_dir ? *options.out_dir
                                : !config.output_dir.empty() ? std::filesystem::path(config.output_dir)
                                                             : std::filesystem::path("out") / (config.name.empty() ? "run" : config.name);
    with_phase("output", [&] {
      write_report(report, dir);
      return 0;
    });
  }
  return report;
}

std::string recovery_csv(const std::vector<RecoveryRecord>& records) {
  std::string out = "driver,x0,eps,n,guard,log_rate\n";
  for (const auto& r : records) {
    out += csv_field(r.driver_id) + "," + join_reals(r.x0) + "," + format_real(r.eps) + ",";
    out += r.n ? std::to_string(*r.n) : "exceeded";
    out += "," + format_real(r.guard) + ",";
    if (r.n && r.eps < 1.0) {
      if (auto lr = log_rate(*r.n, r.eps)) out += format_real(*lr);
    }
    out += "\n";
  }
  return out;
}

std::string cover_csv(const std::vector<CoverEstimate>& covers) {
  std::string out = "eps,lower,upper\n";
  for (const auto& c : covers) {
    out += format_real(c.eps) + "," + std::to_string(c.lower) + "," + std::to_string(c.upper) + "\n";
  }
  return out;
}

std::string dimension_csv(const DimensionEstimate& est) {
  std::string out = "b_m,lower,upper,rate_lower,rate_upper\n";
  for (const auto& s : est.samples) {
    out += format_real(s.b) + "," + std::to_string(s.lower) + "," + std::to_string(s.upper) + "," +
           format_real(s.rate_lower) + "," + format_real(s.rate_upper) + "\n";
  }
  return out;
}

std::string schedule_csv(const Schedule& schedule) {
  std::string out = "k,m_k,p_k,N_hat_k,v_k\n";
  for (std::size_t k = 0; k < schedule.entries.size(); ++k) {
    const auto& e = schedule.entries[k];
    out += std::to_string(k + 1) + "," + std::to_string(e.m) + "," + std::to_string(e.p) + "," +
           std::to_string(e.n_hat) + "," + std::to_string(e.v) + "\n";
  }
  return out;
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "recovery.csv", recovery_csv(report.records));
  write_text(dir / "cover.csv", cover_csv(report.covers));
  if (report.dimension) write_text(dir / "dimension.csv", dimension_csv(*report.dimension));
  if (report.schedule) write_text(dir / "schedule.csv", schedule_csv(*report.schedule));

  // gnuplot: one block per x0, separated by two blank lines.
  std::string dat = "# eps n n_certified log_rate\n";
  const auto& recs = report.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (i == 0 || recs[i].x0 != recs[i - 1].x0) {
      if (i) dat += "\n\n";
      dat += "# x0 = " + join_reals(recs[i].x0) + "\n";
    }
    const auto& r = recs[i];
    const auto lr = r.n && r.eps < 1.0 ? log_rate(*r.n, r.eps) : std::nullopt;
    dat += format_real(r.eps) + " " + (r.n ? std::to_string(*r.n) : "NaN") + " " +
           (r.n_certified ? std::to_string(*r.n_certified) : "NaN") + " " +
           (lr ? format_real(*lr) : "NaN") + "\n";
  }
  write_text(dir / "recovery.dat", dat);
  if (report.dimension) {
    std::string d = "# ln(1/b) ln(lower) ln(upper)\n";
    for (const auto& s : report.dimension->samples) {
      d += format_real(std::log(1.0 / s.b)) + " " + format_real(std::log(double(s.lower))) + " " +
           format_real(std::log(double(s.upper))) + "\n";
    }
    write_text(dir / "dimension.dat", d);
  }

  std::ostringstream os;
  os << "name: " << report.config.name << "\n";
  os << "cloud: " << report.cloud_points << " points, depth " << report.cloud_depth
     << ", resolution " << format_real(report.cloud_resolution) << "\n";
  os << "driver: " << report.driver_id << "\n";
  std::size_t exceeded = 0;
  for (const auto& r : recs) exceeded += r.n ? 0 : 1;
  os << "records: " << recs.size() << " (" << exceeded << " exceeded cap)\n";
  os << "key inequality: " << report.key.checked << " checked, " << report.key.violations
     << " violations\n";
  if (report.dimension) {
    os << "dimension: " << format_real(report.dimension->value) << " (lower curve "
       << format_real(report.dimension->liminf_proxy) << ")\n";
  }
  if (report.schedule) {
    os << "schedule: " << report.schedule->entries.size() << " entries"
       << (report.schedule->truncated ? ", truncated" : "") << "\n";
  }
  os << "\n# config\n" << emit_config(report.config);
  write_text(dir / "summary.txt", os.str());
}

}  // namespace chaosgame
