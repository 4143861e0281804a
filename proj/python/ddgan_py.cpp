#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ddgan/bench.hpp"
#include "ddgan/error.hpp"

namespace py = pybind11;
using namespace ddgan;

namespace {

Eigen::MatrixXd states_matrix(const std::vector<PhaseState>& states) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()), 6);
  for (std::size_t i = 0; i < states.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = states[i].packed().transpose();
  return m;
}

std::vector<PhaseState> states_from(const Eigen::MatrixXd& m) {
  if (m.cols() != 6) throw InvalidInput("expected an n x 6 array of (e_xx, e_yy, g_xy, s_xx, s_yy, s_xy)");
  std::vector<PhaseState> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(PhaseState::unpack(m.row(i).transpose()));
  return out;
}

Eigen::MatrixXd points_matrix(const std::vector<Point2>& pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) << pts[i].x, pts[i].y;
  return m;
}

std::vector<Point2> points_from(const Eigen::MatrixXd& m) {
  if (m.cols() != 2) throw InvalidInput("expected an n x 2 array of points");
  std::vector<Point2> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back({m(i, 0), m(i, 1)});
  return out;
}

MaterialParams params_from(const py::kwargs& kw) {
  MaterialParams mp;
  if (kw.contains("E")) mp.E = kw["E"].cast<double>();
  if (kw.contains("nu")) mp.nu = kw["nu"].cast<double>();
  if (kw.contains("a")) mp.a = kw["a"].cast<double>();
  if (kw.contains("p")) mp.p = kw["p"].cast<double>();
  return mp;
}

RunConfig config_from(const py::dict& overrides) {
  RunConfig c;
  for (const auto& [k, v] : overrides) c.set(py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
  c.validate();
  return c;
}

py::dict summary_dict(const EvaluationSummary& s) {
  py::dict d;
  d["points"] = s.points;
  d["max_abs_u_x"] = s.max_abs_u_x;
  d["max_abs_u_x_at"] = py::make_tuple(s.max_abs_u_x_at.x, s.max_abs_u_x_at.y);
  d["max_abs_u_y"] = s.max_abs_u_y;
  d["max_abs_u_y_at"] = py::make_tuple(s.max_abs_u_y_at.x, s.max_abs_u_y_at.y);
  d["residual_mean_sq"] = s.residual_mean_sq;
  d["residual_max"] = s.residual_max;
  d["physics_loss"] = s.physics_loss;
  d["mean_distance"] = s.mean_distance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ddgan, m) {
  m.doc() = "Physics-informed adversarial solver for data-driven elasticity";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<DatasetError>(m, "DatasetError", PyExc_IOError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  m.def(
      "derive_constants",
      [](const py::kwargs& kw) {
        const DerivedConstants dc = derive_constants(params_from(kw));
        py::dict d;
        d["lambda"] = dc.lambda;
        d["mu"] = dc.mu;
        d["lambda_bar"] = dc.lambda_bar;
        d["c11"] = dc.c11;
        d["g_perp"] = dc.g_perp;
        d["g_par"] = dc.g_par;
        return d;
      },
      "Lame and orthotropic constants; keyword arguments E, nu, a, p override the defaults.");
  m.def(
      "elasticity_matrix",
      [](const py::kwargs& kw) {
        const MaterialParams mp = params_from(kw);
        return Eigen::Matrix3d(build_elasticity_matrix(derive_constants(mp), mp.nu).c());
      },
      "3 x 3 plane-strain stiffness used as the phase-space metric.");
  m.def(
      "stress_from_strain",
      [](const Eigen::Vector3d& strain, const py::kwargs& kw) {
        return Eigen::Vector3d(stress_from_strain(StrainVoigt::from(strain), params_from(kw)).vec());
      },
      py::arg("strain"), "Stress (s_xx, s_yy, s_xy) of a Voigt strain (e_xx, e_yy, g_xy).");
  m.def(
      "metric_sq_distance",
      [](const Eigen::Matrix<double, 6, 1>& a, const Eigen::Matrix<double, 6, 1>& b, const Eigen::Matrix3d& c) {
        return metric_sq_distance(PhaseState::unpack(a), PhaseState::unpack(b), MetricMatrix(c));
      },
      py::arg("a"), py::arg("b"), py::arg("c"));
  m.def(
      "whiten",
      [](const Eigen::Matrix<double, 6, 1>& z, const Eigen::Matrix3d& c) {
        return Vector6d(whiten(PhaseState::unpack(z), MetricMatrix(c)));
      },
      py::arg("z"), py::arg("c"));

  py::class_<MaterialDatabase>(m, "MaterialDatabase")
      .def(py::init([](const Eigen::MatrixXd& states, const Eigen::Matrix3d& c) {
             return MaterialDatabase(states_from(states), MetricMatrix(c));
           }),
           py::arg("states"), py::arg("c"))
      .def("__len__", &MaterialDatabase::size)
      .def_property_readonly("states", [](const MaterialDatabase& db) { return states_matrix(db.states()); })
      .def_property_readonly("metric", [](const MaterialDatabase& db) { return Eigen::Matrix3d(db.metric().c()); })
      .def(
          "nearest",
          [](const MaterialDatabase& db, const Eigen::Matrix<double, 6, 1>& z) {
            const NearestResult r = db.nearest(PhaseState::unpack(z));
            return py::make_tuple(r.index, Vector6d(r.state.packed()), r.sq_dist);
          },
          "(index, state, squared distance) of the closest stored state.")
      .def(
          "nearest_batch",
          [](const MaterialDatabase& db, const Eigen::MatrixXd& zs) {
            const auto results = db.nearest_batch(states_from(zs));
            std::vector<std::size_t> idx;
            std::vector<double> d;
            for (const auto& r : results) {
              idx.push_back(r.index);
              d.push_back(r.sq_dist);
            }
            return py::make_tuple(idx, d);
          })
      .def(
          "nearest_brute_force",
          [](const MaterialDatabase& db, const Eigen::Matrix<double, 6, 1>& z) {
            const NearestResult r = db.nearest_brute_force(PhaseState::unpack(z));
            return py::make_tuple(r.index, Vector6d(r.state.packed()), r.sq_dist);
          })
      .def("save", [](const MaterialDatabase& db, const std::filesystem::path& p) { save_dataset(db, p); });

  m.def(
      "synthesize_dataset",
      [](std::size_t n, double strain_std, std::uint64_t seed, const py::kwargs& kw) {
        return synthesize_dataset(n, strain_std, seed, params_from(kw));
      },
      py::arg("n"), py::arg("strain_std") = 0.005, py::arg("seed") = 0);
  m.def("load_dataset", [](const std::filesystem::path& p) { return load_dataset(p); });

  m.def("sobol_2d", [](std::size_t n, std::size_t skip) { return points_matrix(sobol_2d(n, skip)); }, py::arg("n"),
        py::arg("skip") = 0);
  m.def(
      "sample_interior",
      [](std::size_t n) {
        const InteriorSample s = sample_interior(n);
        return py::make_tuple(points_matrix(s.points), s.candidates);
      },
      py::arg("n"), "(points, candidates drawn) for n accepted Sobol points outside the hole.");
  m.def("sample_test", [](std::size_t n, std::uint64_t seed) { return points_matrix(sample_test(n, seed)); },
        py::arg("n"), py::arg("seed") = 1);
  m.def("traction", [](double y) { return traction(y); });

  py::class_<Generator>(m, "Generator")
      .def(py::init([](int hidden_layers, int units, std::uint64_t seed, bool zero) {
             GeneratorSpec spec;
             spec.net.hidden_layers = hidden_layers;
             spec.net.units = units;
             return zero ? Generator(spec) : Generator::initialized(spec, seed);
           }),
           py::arg("hidden_layers") = 4, py::arg("units") = 64, py::arg("seed") = 0, py::arg("zero") = false)
      .def_property_readonly("parameter_count", &Generator::parameter_count)
      .def("parameters", &Generator::flatten)
      .def("set_parameters", [](Generator& g, const Eigen::VectorXd& th) { g.unflatten(th); })
      .def(
          "evaluate",
          [](const Generator& g, const Eigen::MatrixXd& pts) {
            const auto out = g.evaluate(points_from(pts));
            Eigen::MatrixXd m(static_cast<Eigen::Index>(out.size()), 10);
            for (std::size_t i = 0; i < out.size(); ++i) {
              const auto& o = out[i];
              m.row(static_cast<Eigen::Index>(i)) << o.u_x, o.u_y, o.strain.e_xx, o.strain.e_yy, o.strain.g_xy,
                  o.stress.s_xx, o.stress.s_yy, o.stress.s_xy, o.equilibrium_residual[0], o.equilibrium_residual[1];
            }
            return m;
          },
          "Rows (u_x, u_y, e_xx, e_yy, g_xy, s_xx, s_yy, s_xy, r_x, r_y) per point.")
      .def(
          "physics_loss",
          [](const Generator& g, const Eigen::MatrixXd& interior, std::size_t boundary_per_edge) {
            const SoftBoundary sb = SoftBoundary::from(sample_boundary(boundary_per_edge), g.spec());
            const PhysicsLoss l = physics_loss(g, points_from(interior), sb, true);
            return py::make_tuple(l.value(), l.gradient);
          },
          py::arg("interior"), py::arg("boundary_per_edge") = 64, "(L_C, parameter gradient).");

  auto run = [](auto cmd) {
    return [cmd](const py::dict& overrides) {
      const RunConfig c = config_from(overrides);
      std::ostringstream out;
      return cmd(c, out);
    };
  };
  m.def("synthesize", [](const py::dict& o) {
    const RunConfig c = config_from(o);
    std::ostringstream out;
    cmd_synthesize(c, out);
    return out.str();
  });
  m.def("train", [](const py::dict& o) {
    const RunConfig c = config_from(o);
    std::ostringstream out;
    return TrainingLog(cmd_train(c, out)).to_csv();
  }, "Runs training; returns the log as CSV text.");
  m.def("evaluate", [run](const py::dict& o) { return summary_dict(run(cmd_evaluate)(o)); });
  m.def("full", [run](const py::dict& o) { return summary_dict(run(cmd_full)(o)); },
        "synthesize, train and evaluate; keys as in the config file (e.g. {'out': 'run', 'train.epochs': 5}).");
}
