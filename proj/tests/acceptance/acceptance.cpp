// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ddgan/bench.hpp"
#include "ddgan/dataset.hpp"
#include "ddgan/error.hpp"
#include "ddgan/generator.hpp"
#include "ddgan/geometry.hpp"
#include "ddgan/material.hpp"
#include "ddgan/rng.hpp"
#include "ddgan/trainer.hpp"
#include "support.hpp"

using namespace ddgan;
using ddgan::testing::central_difference;
using ddgan::testing::relative_error;
using ddgan::testing::scratch_dir;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double elapsed_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Eigen::VectorXd normal_vector(Eigen::Index n, std::uint64_t seed, std::uint64_t stream, double scale) {
  const CounterRng rng(seed, stream);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * rng.normal(static_cast<std::uint64_t>(i));
  return v;
}

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t stream) {
  const Eigen::VectorXd v = normal_vector(rows * cols, seed, stream, 1.0);
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

// 1 ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  double worst_l2 = 0, worst_phys = 0, worst_gp = 0;

  for (std::uint64_t s = 0; s < 3; ++s) {
    const MlpSpec spec{3, 2, 3, 8, {Activation::hardswish, 0}};
    Mlp net(spec);
    net.unflatten(normal_vector(static_cast<Eigen::Index>(net.parameter_count()), s, 1, 0.5));
    const Eigen::MatrixXd x = normal_matrix(3, 6, s, 2);
    const LossAndGradient lg = loss_gradient(net, x, {}, [](const MlpTape& t, Eigen::MatrixXd& adj, auto&) {
      adj = t.output;
      return 0.5 * t.output.squaredNorm();
    });
    Mlp probe(spec);
    const Eigen::VectorXd fd = central_difference(
        [&](const Eigen::VectorXd& th) {
          probe.unflatten(th);
          return 0.5 * probe.record(x).output.squaredNorm();
        },
        net.flatten());
    worst_l2 = std::max(worst_l2, relative_error(lg.gradient, fd));
  }

  for (std::uint64_t s = 0; s < 3; ++s) {
    GeneratorSpec spec;
    spec.net = {2, 1, 2, 4, {Activation::hardswish, 0}};
    Generator g(spec);
    g.unflatten(normal_vector(static_cast<Eigen::Index>(g.parameter_count()), s, 3, 0.5));
    const auto interior = sample_test(5, 20 + s);
    const SoftBoundary sb = SoftBoundary::from(sample_boundary(3), spec);
    const PhysicsLoss l = physics_loss(g, interior, sb, true);
    Generator probe(spec);
    const Eigen::VectorXd fd = central_difference(
        [&](const Eigen::VectorXd& th) {
          probe.unflatten(th);
          return physics_loss(probe, interior, sb, false).value();
        },
        g.flatten());
    worst_phys = std::max(worst_phys, relative_error(l.gradient, fd));
  }

  for (std::uint64_t s = 0; s < 3; ++s) {
    CriticSpec spec;
    spec.net = {6, 1, 3, 8, {Activation::leaky_relu, 0.2}};
    Critic c = Critic::initialized(spec, s);
    c.net().unflatten(c.net().flatten() + normal_vector(static_cast<Eigen::Index>(c.net().parameter_count()), s, 4, 0.2));
    const Eigen::MatrixXd real = normal_matrix(6, 7, s, 5), fake = normal_matrix(6, 7, s, 6);
    const auto deltas = draw_deltas(7, s, 1);
    const CriticObjective o = wgan_gp_objective(c, real, fake, deltas, 10.0, true);
    Critic probe = c;
    const Eigen::VectorXd fd = central_difference(
        [&](const Eigen::VectorXd& th) {
          probe.net().unflatten(th);
          return wgan_gp_objective(probe, real, fake, deltas, 10.0, false).total;
        },
        c.net().flatten());
    worst_gp = std::max(worst_gp, relative_error(o.gradient, fd));
  }

  const double secs = elapsed_since(t0);
  return {worst_l2 < 1e-4 && worst_phys < 1e-4 && worst_gp < 1e-4 && secs < 10.0,
          fmt("max rel err L2 %.2e, physics %.2e, WGAN-GP %.2e (tol 1e-4); %.2f s (limit 10 s)", worst_l2, worst_phys,
              worst_gp, secs)};
}

// 2 ---------------------------------------------------------------------------

PhaseState random_state(const CounterRng& rng, std::uint64_t k) {
  Vector6d v;
  for (int j = 0; j < 3; ++j) v[j] = 0.005 * rng.normal(6 * k + j);
  for (int j = 3; j < 6; ++j) v[j] = 50.0 * rng.normal(6 * k + j);
  return PhaseState::unpack(v);
}

Outcome metric_and_search() {
  const auto t0 = Clock::now();
  const MetricMatrix m = build_elasticity_matrix(derive_constants(MaterialParams{}), MaterialParams{}.nu);
  const CounterRng rng(2, 0);
  double worst = 0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const PhaseState a = random_state(rng, 2 * k), b = random_state(rng, 2 * k + 1);
    const Eigen::Vector3d de = a.strain.vec() - b.strain.vec();
    const Eigen::Vector3d ds = a.stress.vec() - b.stress.vec();
    const double direct = 0.5 * de.dot(m.c() * de) + 0.5 * ds.dot(m.c().inverse() * ds);
    const double euclid = (whiten(a, m) - whiten(b, m)).squaredNorm();
    worst = std::max(worst, std::abs(euclid - direct) / direct);
  }

  const MaterialDatabase db = synthesize_dataset(10000, 0.005, 7, {});
  const CounterRng qrng(3, 0);
  std::size_t mismatches = 0;
  for (std::uint64_t q = 0; q < 1000; ++q) {
    // Queries near the data manifold and off it.
    const PhaseState z = q % 2 == 0 ? random_state(qrng, q) : db.states()[q * 7 % db.size()];
    if (db.nearest(z).index != db.nearest_brute_force(z).index) ++mismatches;
  }
  const double secs = elapsed_since(t0);
  return {worst < 1e-9 && mismatches == 0 && secs < 5.0,
          fmt("whitening max rel err %.2e on 1e4 pairs (tol 1e-9); %.0f/1000 index mismatches; %.2f s (limit 5 s)",
              worst, static_cast<double>(mismatches), secs)};
}

// 3 ---------------------------------------------------------------------------

Outcome hard_boundaries() {
  GeneratorSpec spec;
  spec.net = {2, 1, 2, 8, {Activation::hardswish, 0}};
  const BoundarySets b = sample_boundary(100);
  double worst[5] = {0, 0, 0, 0, 0};
  for (std::uint64_t draw = 0; draw < 1000; ++draw) {
    Generator g(spec);
    g.unflatten(normal_vector(static_cast<Eigen::Index>(g.parameter_count()), draw, 9, 1.0));
    for (const auto& o : g.evaluate(b.left)) worst[0] = std::max(worst[0], std::abs(o.u_x));
    for (const auto& o : g.evaluate(b.bottom)) worst[1] = std::max(worst[1], std::abs(o.u_y));
    for (const auto& o : g.evaluate(b.top)) worst[2] = std::max(worst[2], std::abs(o.stress.s_yy));
    for (const auto& o : g.evaluate(b.hole)) worst[3] = std::max(worst[3], std::abs(o.stress.s_xy));
    for (const auto& o : g.evaluate(b.right)) {
      worst[4] = std::max(worst[4], std::abs(o.stress.s_xx - traction(o.point.y)));
    }
  }
  const double max_all = *std::max_element(worst, worst + 5);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "1000 draws x 100 pts/edge: |u_x|@x=0 %.1e, |u_y|@y=0 %.1e, |s_yy|@y=1 %.1e, |s_xy|@hole %.1e, "
                "|s_xx-t|@x=1 %.1e (tol 1e-12)",
                worst[0], worst[1], worst[2], worst[3], worst[4]);
  return {max_all <= 1e-12, buf};
}

// 4 ---------------------------------------------------------------------------

// The material law expanded by hand from E and nu, independent of the library.
Eigen::Vector3d expanded_stress(const Eigen::Vector3d& e, double E, double nu, double a, double p) {
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda_bar = (2.0 * nu * nu + 1.0) / (15.0 - 20.0 * nu * nu) * E;
  const double c11 = 4.6875 * E;
  const double c12 = 2.0 * nu * (lambda_bar + 0.3 * E);
  const double c22 = lambda_bar + 0.6 * E;
  const double c33 = 0.2 * E;
  const double tr = e[0] + e[1];
  const double sgn = tr > 0 ? 1.0 : (tr < 0 ? -1.0 : 0.0);
  const double g = (std::pow(std::abs(tr) + a, p) - std::pow(a, p)) * sgn;
  return {lambda * g + mu * e[0] + c11 * e[0] + c12 * e[1], lambda * g + mu * e[1] + c12 * e[0] + c22 * e[1],
          0.5 * mu * e[2] + c33 * e[2]};
}

Outcome constitutive() {
  const MaterialParams mp;
  const CounterRng rng(4, 0);
  double worst = 0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const Eigen::Vector3d e(0.005 * rng.normal(3 * k), 0.005 * rng.normal(3 * k + 1), 0.005 * rng.normal(3 * k + 2));
    const Eigen::Vector3d s = stress_from_strain(StrainVoigt::from(e), mp).vec();
    const Eigen::Vector3d o = expanded_stress(e, mp.E, mp.nu, mp.a, mp.p);
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(s[j] - o[j]) / std::abs(o[j]));
  }
  const DerivedConstants dc = derive_constants(mp);
  const double lambda_err = std::abs(dc.lambda - 1e4 * 0.3 / (1.3 * 0.4)) / dc.lambda;
  const bool constants_ok = lambda_err < 1e-12 && std::abs(dc.lambda - 5769.23) < 0.005 && dc.c11 == 46875.0;
  return {worst < 1e-12 && constants_ok,
          fmt("max rel err %.2e on 1e4 strains (tol 1e-12); lambda %.6f, C11 %.1f", worst, dc.lambda, dc.c11)};
}

// 5 ---------------------------------------------------------------------------

RunConfig toy_config(const std::filesystem::path& out) {
  RunConfig c;
  c.out_dir = out;
  c.dataset_size = 10000;
  c.collocation = 16 * 16;
  c.train.epochs = 30;
  c.train.batch_size = 16;
  c.train.seed = 0;
  c.data_seed = 0;
  return c;
}

Outcome training_trend() {
  const auto t0 = Clock::now();
  const RunConfig cfg = toy_config(scratch_dir("acceptance_toy"));
  std::ostringstream sink;
  cmd_synthesize(cfg, sink);

  // L_C of the untrained generator on the same collocation and boundary sets.
  const Generator init = Generator::initialized(cfg.generator, cfg.train.seed);
  const auto interior = sample_interior(cfg.collocation).points;
  const SoftBoundary sb = SoftBoundary::from(sample_boundary(cfg.boundary_per_edge), cfg.generator);
  const double phys_init = physics_loss(init, interior, sb, false).value();

  const TrainingLog log = cmd_train(cfg, sink);
  const EvaluationSummary summary = cmd_evaluate(cfg, sink);
  const double secs = elapsed_since(t0);

  bool finite = std::isfinite(phys_init);
  for (const EpochRecord& r : log.epochs) {
    for (double v : {r.d_loss_mean, r.d_loss_min, r.d_loss_max, r.g_loss_mean, r.g_loss_min, r.g_loss_max,
                     r.physics_loss, r.mean_distance}) {
      finite = finite && std::isfinite(v);
    }
  }
  const EpochRecord& first = log.epochs.front();
  const EpochRecord& last = log.epochs.back();
  const double dist_ratio = last.mean_distance / first.mean_distance;
  const double phys_ratio = last.physics_loss / first.physics_loss;
  const Point2 at = summary.max_abs_u_x_at;
  const bool location_ok = at.x >= 0.9 && at.y <= 0.25;

  const bool pass = log.epochs.size() == 30 && finite && dist_ratio < 0.5 && phys_ratio < 0.1 && location_ok &&
                    secs < 600.0;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "distance %.4g -> %.4g (ratio %.3g, need < 0.5); physics %.4g -> %.4g (ratio %.3g, need < 0.1; "
                "untrained L_C %.4g, ratio %.3g); finite %s; max|u_x| at (%.3f, %.3f) (need x >= 0.9, y <= 0.25); "
                "%.1f s (limit 600 s)",
                first.mean_distance, last.mean_distance, dist_ratio, first.physics_loss, last.physics_loss, phys_ratio,
                phys_init, last.physics_loss / phys_init, finite ? "yes" : "no", at.x, at.y, secs);
  return {pass, buf};
}

// 6 ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  std::vector<std::string> files[2];
  for (int run = 0; run < 2; ++run) {
    RunConfig c = toy_config(scratch_dir("acceptance_det" + std::to_string(run)));
    c.dataset_size = 5000;
    c.train.epochs = 3;
    c.train.batch_size = 32;
    c.generator.net.hidden_layers = 2;
    c.generator.net.units = 16;
    c.train.seed = 42;
    c.data_seed = 42;
    std::ostringstream sink;
    cmd_synthesize(c, sink);
    cmd_train(c, sink);
    for (const auto& p : {c.data_file(), c.log_file(), c.checkpoint_file()}) files[run].push_back(slurp(p));
  }
  const char* names[] = {"dataset", "log", "checkpoint"};
  std::string detail;
  bool pass = true;
  for (int i = 0; i < 3; ++i) {
    const bool same = !files[0][i].empty() && files[0][i] == files[1][i];
    pass = pass && same;
    detail += std::string(names[i]) + " " + std::to_string(files[0][i].size()) + " bytes " +
              (same ? "identical" : "DIFFERENT") + (i < 2 ? "; " : "");
  }
  return {pass, detail};
}

// 7 ---------------------------------------------------------------------------

Outcome sobol() {
  std::ifstream in(DDGAN_TEST_DATA "/sobol_first64.csv");
  if (!in) return {false, "golden file missing"};
  std::string line;
  std::getline(in, line);
  const auto pts = sobol_2d(64);
  std::size_t rows = 0, mismatches = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string x, y;
    std::getline(row, x, ',');
    std::getline(row, y);
    if (rows >= pts.size() || pts[rows].x != std::stod(x) || pts[rows].y != std::stod(y)) ++mismatches;
    ++rows;
  }
  const InteriorSample s = sample_interior(100000);
  const double target = 1.0 - std::numbers::pi / 16.0;
  const double rel = std::abs(s.acceptance() - target) / target;
  return {rows == 64 && mismatches == 0 && rel < 0.01,
          fmt("%.0f/64 golden points differ; acceptance %.5f vs %.5f (rel %.2e, tol 1e-2)",
              static_cast<double>(mismatches), s.acceptance(), target, rel)};
}

}  // namespace

int main() {
  report(1, "gradient fidelity", gradient_fidelity);
  report(2, "metric and nearest neighbour", metric_and_search);
  report(3, "hard boundary conditions", hard_boundaries);
  report(4, "constitutive model", constitutive);
  report(5, "training trend", training_trend);
  report(6, "determinism", determinism);
  report(7, "Sobol sequence", sobol);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
