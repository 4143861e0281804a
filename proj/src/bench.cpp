#include "ddgan/bench.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

#include "ddgan/error.hpp"
#include "detail/bytes.hpp"

namespace ddgan {
namespace {

using nlohmann::json;

json metric_json(const MetricMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m.c()(i, 0), m.c()(i, 1), m.c()(i, 2)});
  return rows;
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (!detail::write_file(path, j.dump(2) + "\n")) throw IoError("cannot write " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

MaterialDatabase load_data(const RunConfig& config) {
  const auto path = config.data_file();
  if (!std::filesystem::exists(path)) throw IoError("dataset file not found: " + path.string());
  return load_dataset(path);
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidInput*>(&e)) return kExitConfig;
  if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const DatasetError*>(&e)) return kExitIo;
  return kExitIo;
}

void cmd_synthesize(const RunConfig& config, std::ostream& out) {
  config.validate();
  ensure_dir(config.out_dir);
  const auto path = config.data_file();
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  const MaterialDatabase db = synthesize_dataset(config.dataset_size, config.dataset_std, config.data_seed, config.material);
  save_dataset(db, path);

  const json sidecar = {
      {"count", db.size()},
      {"seed", config.data_seed},
      {"strain_std", config.dataset_std},
      {"material", {{"E", config.material.E}, {"nu", config.material.nu}, {"a", config.material.a}, {"p", config.material.p}}},
      {"metric", metric_json(db.metric())},
  };
  write_json(std::filesystem::path(path).concat(".json"), sidecar);

  out << "wrote " << db.size() << " strain-stress states to " << path.string() << '\n';
  out << "metric C [MPa]:\n" << std::setprecision(10);
  for (int i = 0; i < 3; ++i) {
    out << "  " << db.metric().c()(i, 0) << ' ' << db.metric().c()(i, 1) << ' ' << db.metric().c()(i, 2) << '\n';
  }
}

TrainingLog cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate();
  ensure_dir(config.out_dir);
  const MaterialDatabase db = load_data(config);

  Generator gen = Generator::initialized(config.generator, config.train.seed);
  Critic critic = Critic::initialized(config.critic, config.train.seed);
  const InteriorSample interior = sample_interior(config.collocation, config.generator.plate);
  const BoundarySets edges = sample_boundary(config.boundary_per_edge, config.generator.plate);
  const SoftBoundary boundary = SoftBoundary::from(edges, config.generator);
  if (config.dump_points) {
    write_points_csv(config.out_dir / "collocation.csv", interior.points);
    std::vector<Point2> all;
    for (const auto* edge : {&edges.left, &edges.bottom, &edges.right, &edges.top, &edges.hole}) {
      all.insert(all.end(), edge->begin(), edge->end());
    }
    write_points_csv(config.out_dir / "boundary.csv", all);
  }

  out << "training on " << interior.points.size() << " collocation points, " << db.size() << " data states, "
      << config.train.epochs << " epochs\n";
  const TrainingLog log = train(config.train, gen, critic, db, interior.points, boundary, [&out](const EpochRecord& r) {
    out << "epoch " << r.epoch << "  d_loss " << r.d_loss_mean << "  g_loss " << r.g_loss_mean << "  phys "
        << r.physics_loss << "  dist " << r.mean_distance << '\n';
  });
  log.write_csv(config.log_file());
  const auto ck = config.checkpoint_file();
  if (ck.has_parent_path()) ensure_dir(ck.parent_path());
  save_training_checkpoint(ck, config.train.seed, config.train.epochs, gen, critic);
  out << "wrote " << config.log_file().string() << " and " << ck.string() << '\n';
  return log;
}

EvaluationSummary cmd_evaluate(const RunConfig& config, std::ostream& out) {
  config.validate();
  ensure_dir(config.out_dir);
  const TrainingCheckpoint ck = load_training_checkpoint(config.checkpoint_file(), config.generator, config.critic);
  const MaterialDatabase db = load_data(config);

  const std::vector<Point2> points = sample_test(config.test_points, config.test_seed, config.generator.plate);
  const std::vector<GeneratorOutput> fields = ck.generator.evaluate(points);
  write_fields_csv(config.fields_file(), fields);

  EvaluationSummary s;
  s.points = fields.size();
  double residual_sum = 0.0;
  for (const GeneratorOutput& g : fields) {
    if (std::abs(g.u_x) > s.max_abs_u_x) {
      s.max_abs_u_x = std::abs(g.u_x);
      s.max_abs_u_x_at = g.point;
    }
    if (std::abs(g.u_y) > s.max_abs_u_y) {
      s.max_abs_u_y = std::abs(g.u_y);
      s.max_abs_u_y_at = g.point;
    }
    const double r2 = g.equilibrium_residual.squaredNorm();
    residual_sum += r2;
    s.residual_max = std::max(s.residual_max, std::sqrt(r2));
  }
  s.residual_mean_sq = residual_sum / static_cast<double>(fields.size());
  const SoftBoundary boundary =
      SoftBoundary::from(sample_boundary(config.boundary_per_edge, config.generator.plate), config.generator);
  s.physics_loss = physics_loss(ck.generator, points, boundary, false).value();
  s.mean_distance = mean_distance(ck.generator, db, points);

  const json summary = {
      {"checkpoint", {{"seed", ck.header.seed}, {"epoch", ck.header.epoch}}},
      {"points", s.points},
      {"max_abs_u_x", {{"value", s.max_abs_u_x}, {"x", s.max_abs_u_x_at.x}, {"y", s.max_abs_u_x_at.y}}},
      {"max_abs_u_y", {{"value", s.max_abs_u_y}, {"x", s.max_abs_u_y_at.x}, {"y", s.max_abs_u_y_at.y}}},
      {"residual_mean_sq", s.residual_mean_sq},
      {"residual_max", s.residual_max},
      {"physics_loss", s.physics_loss},
      {"mean_distance", s.mean_distance},
  };
  write_json(config.summary_file(), summary);

  out << std::setprecision(6) << "evaluated " << s.points << " test points\n"
      << "  max |u_x| = " << s.max_abs_u_x << " at (" << s.max_abs_u_x_at.x << ", " << s.max_abs_u_x_at.y << ")\n"
      << "  max |u_y| = " << s.max_abs_u_y << " at (" << s.max_abs_u_y_at.x << ", " << s.max_abs_u_y_at.y << ")\n"
      << "  mean |div sigma|^2 = " << s.residual_mean_sq << ", max |div sigma| = " << s.residual_max << '\n'
      << "  physics loss = " << s.physics_loss << '\n'
      << "  mean distance to data = " << s.mean_distance << '\n';
  return s;
}

EvaluationSummary cmd_full(const RunConfig& config, std::ostream& out) {
  cmd_synthesize(config, out);
  cmd_train(config, out);
  return cmd_evaluate(config, out);
}

}  // namespace ddgan
