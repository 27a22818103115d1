#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chaosgame/constructions.hpp"
#include "chaosgame/errors.hpp"
#include "chaosgame/harness.hpp"
#include "chaosgame/metrics.hpp"

namespace py = pybind11;
using namespace chaosgame;

namespace {

py::array_t<double> to_array(const PointSet& ps) {
  py::array_t<double> out({ps.size(), ps.dim()});
  std::copy(ps.coords().begin(), ps.coords().end(), out.mutable_data());
  return out;
}

PointSet from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() == 1) return PointSet(1, {a.data(), a.data() + a.size()});
  if (a.ndim() != 2) throw ValidationError("points must be a 1-d or 2-d array");
  return PointSet(static_cast<std::size_t>(a.shape(1)), {a.data(), a.data() + a.size()});
}

py::dict record_dict(const RecoveryRecord& r) {
  py::dict d;
  d["eps"] = r.eps;
  d["n"] = r.n ? py::cast(*r.n) : py::none();
  d["n_certified"] = r.n_certified ? py::cast(*r.n_certified) : py::none();
  d["x0"] = r.x0;
  d["driver"] = r.driver_id;
  d["guard"] = r.guard;
  d["cap"] = r.cap;
  return d;
}

ExperimentConfig config_from(const std::string& name_or_text) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_text) != names.end()) return preset(name_or_text);
  if (name_or_text.find('\n') == std::string::npos && std::filesystem::exists(name_or_text))
    return load_config(name_or_text);
  return parse_config(name_or_text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic chaos game: drivers, attractor clouds, recovery times";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", PyExc_RuntimeError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::class_<IfsSystem>(m, "Ifs")
      .def(py::init([](std::size_t dim, const std::vector<std::pair<std::vector<double>, std::vector<double>>>& maps) {
             std::vector<AffineMap> fs;
             for (const auto& [mat, off] : maps) fs.emplace_back(dim, mat, off);
             return IfsSystem(std::move(fs));
           }),
           py::arg("dim"), py::arg("maps"))
      .def_static("named", &named_ifs, py::arg("name"))
      .def_property_readonly("dim", &IfsSystem::dim)
      .def_property_readonly("size", &IfsSystem::size)
      .def_property_readonly("lip", &IfsSystem::lip_max)
      .def("fixed_point", [](const IfsSystem& s, int symbol) { return fixed_point(s.map(symbol)); });

  py::class_<DriverStream>(m, "Driver")
      .def_property_readonly("id", &DriverStream::id)
      .def_property_readonly("alphabet", &DriverStream::alphabet)
      .def_property_readonly("position", &DriverStream::position)
      .def("take", [](DriverStream& d, std::size_t n) { return d.take(n).symbols; })
      .def("clone", &DriverStream::clone);

  m.def("champernowne", &champernowne, py::arg("alphabet"));
  m.def("de_bruijn", &infinite_de_bruijn, py::arg("alphabet"));
  m.def("example4", &example4_driver, py::arg("z"));
  m.def("random_driver", &random_driver, py::arg("alphabet"), py::arg("seed"));
  m.def("literal", [](std::vector<int> symbols, int alphabet) { return literal_driver(Word{std::move(symbols), alphabet}); },
        py::arg("symbols"), py::arg("alphabet"));
  m.def("de_bruijn_word", [](int k, int order) { return de_bruijn_word(k, order).symbols; },
        py::arg("alphabet"), py::arg("order"));
  m.def("word_coverage", [](const DriverStream& d, int length, std::uint64_t cap) -> std::optional<std::uint64_t> {
          DriverStream c = d.clone();
          return word_coverage(c, length, cap).n;
        },
        py::arg("driver"), py::arg("length"), py::arg("cap") = kDefaultCoverageCap);

  py::class_<AttractorCloud>(m, "Cloud")
      .def_property_readonly("points", [](const AttractorCloud& c) { return to_array(c.points); })
      .def_readonly("resolution", &AttractorCloud::resolution)
      .def_readonly("depth", &AttractorCloud::depth)
      .def_readonly("diam_lower", &AttractorCloud::diam_lower)
      .def_readonly("diam_upper", &AttractorCloud::diam_upper)
      .def("__len__", &AttractorCloud::size)
      .def_static("from_points", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                                    double res) { return AttractorCloud::from_points(from_array(a), res); },
                  py::arg("points"), py::arg("resolution"));

  m.def("build_cloud", &build_cloud, py::arg("ifs"), py::arg("resolution"),
        py::arg("budget") = kDefaultPointBudget);
  m.def("build_cloud_at_depth", &build_cloud_at_depth, py::arg("ifs"), py::arg("depth"),
        py::arg("budget") = kDefaultPointBudget);

  m.def("run_orbit", [](const IfsSystem& ifs, DriverStream& d, const Point& x0, std::size_t n) {
          return to_array(run_orbit(ifs, d, x0, n).points);
        },
        py::arg("ifs"), py::arg("driver"), py::arg("x0"), py::arg("n"));

  m.def("recovery_time", [](const IfsSystem& ifs, const DriverStream& d, const Point& x0, double eps,
                            const AttractorCloud& cloud, std::uint64_t cap, bool certify) {
          return record_dict(recovery_time(ifs, d, x0, eps, cloud, cap, certify));
        },
        py::arg("ifs"), py::arg("driver"), py::arg("x0"), py::arg("eps"), py::arg("cloud"),
        py::arg("cap") = kDefaultOrbitCap, py::arg("certify") = false);

  m.def("covering_estimate", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double eps) {
          const auto c = covering_estimate(from_array(a), eps);
          return std::make_pair(c.lower, c.upper);
        },
        py::arg("points"), py::arg("eps"));

  m.def("box_dimension", [](const AttractorCloud& cloud, double a, double r, int m_lo, int m_hi) {
          const auto est = box_dimension(cloud, a, r, m_lo, m_hi);
          py::dict d;
          d["value"] = est.value;
          d["liminf_proxy"] = est.liminf_proxy;
          d["bracket_width"] = est.bracket_width;
          py::list samples;
          for (const auto& s : est.samples) samples.append(py::make_tuple(s.b, s.lower, s.upper));
          d["samples"] = samples;
          return d;
        },
        py::arg("cloud"), py::arg("a"), py::arg("r"), py::arg("m_lo"), py::arg("m_hi"));

  m.def("log_rate", &log_rate, py::arg("n"), py::arg("eps"));
  m.def("iterated_log_rate", &iterated_log_rate, py::arg("n"), py::arg("eps"), py::arg("order"));

  py::class_<RateFunction>(m, "Rate")
      .def(py::init(&RateFunction::parse), py::arg("text"))
      .def("__call__", &RateFunction::operator(), py::arg("eps"))
      .def("__str__", &RateFunction::to_string);
  m.def("rate_ratio", &rate_ratio, py::arg("n"), py::arg("psi"), py::arg("eps"));

  py::class_<Schedule>(m, "Schedule")
      .def_property_readonly("entries", [](const Schedule& s) {
        py::list out;
        for (const auto& e : s.entries) {
          py::dict d;
          d["m"] = e.m;
          d["p"] = e.p;
          d["n_hat"] = e.n_hat;
          d["v"] = e.v;
          d["c"] = e.c;
          d["psi"] = e.psi;
          d["sigma"] = e.sigma.symbols;
          out.append(d);
        }
        return out;
      })
      .def_property_readonly("i_star", [](const Schedule& s) { return s.base.i_star; })
      .def_property_readonly("delta", [](const Schedule& s) { return s.base.delta; })
      .def_readonly("truncated", &Schedule::truncated)
      .def("v_before", &Schedule::v_before, py::arg("k"));

  m.def("build_schedule", [](const IfsSystem& ifs, const AttractorCloud& cloud, const RateFunction& psi,
                             int k_max, std::uint64_t step_cap) {
          ScheduleOptions o;
          o.k_max = k_max;
          o.step_cap = step_cap;
          return build_schedule(ifs, cloud, psi, choose_base_map(ifs, cloud), o);
        },
        py::arg("ifs"), py::arg("cloud"), py::arg("psi"), py::arg("k_max") = 3, py::arg("step_cap") = 5'000'000);
  m.def("slow_driver", py::overload_cast<const Schedule&>(&slow_driver), py::arg("schedule"));

  m.def("preset_names", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));
  m.def("canonical_config", [](const std::string& text) { return emit_config(parse_config(text)); },
        py::arg("text"));

  m.def("run_experiment",
        [](const std::string& config, std::optional<std::filesystem::path> out_dir,
           std::optional<std::filesystem::path> cache_dir) {
          RunOptions opts;
          opts.out_dir = out_dir;
          opts.cache_dir = cache_dir;
          opts.write_files = out_dir.has_value();
          const RunReport rep = run_experiment(config_from(config), opts);
          py::dict d;
          d["name"] = rep.config.name;
          d["driver"] = rep.driver_id;
          d["cloud_points"] = rep.cloud_points;
          d["cloud_resolution"] = rep.cloud_resolution;
          py::list recs;
          for (const auto& r : rep.records) recs.append(record_dict(r));
          d["records"] = recs;
          py::list covers;
          for (const auto& c : rep.covers) covers.append(py::make_tuple(c.eps, c.lower, c.upper));
          d["covers"] = covers;
          d["key_checked"] = rep.key.checked;
          d["key_violations"] = rep.key.violations;
          d["dimension"] = rep.dimension ? py::cast(rep.dimension->value) : py::none();
          return d;
        },
        py::arg("config"), py::arg("out_dir") = py::none(), py::arg("cache_dir") = py::none());
}
