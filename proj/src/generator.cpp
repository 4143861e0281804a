#include "ddgan/generator.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "ddgan/error.hpp"
#include "ddgan/rng.hpp"
#include "detail/bytes.hpp"

namespace ddgan {

double Traction::operator()(double y) const { return amplitude * std::cos(0.5 * std::numbers::pi * y); }

double Traction::derivative(double y) const {
  return -0.5 * std::numbers::pi * amplitude * std::sin(0.5 * std::numbers::pi * y);
}

double traction(double y) { return Traction{}(y); }

FieldBatch FieldBatch::zeros(Eigen::Index batch) {
  FieldBatch f;
  for (Eigen::RowVectorXd* v : {&f.u_x, &f.u_y, &f.s_xx, &f.s_yy, &f.s_xy, &f.u_x_x, &f.u_x_y, &f.u_y_x, &f.u_y_y,
                                &f.s_xx_x, &f.s_xx_y, &f.s_yy_x, &f.s_yy_y, &f.s_xy_x, &f.s_xy_y}) {
    v->setZero(batch);
  }
  return f;
}

StrainVoigt FieldBatch::strain(Eigen::Index i) const {
  Eigen::Matrix2d grad;
  grad << u_x_x[i], u_x_y[i], u_y_x[i], u_y_y[i];
  return voigt_pack(grad);
}

StressVoigt FieldBatch::stress(Eigen::Index i) const { return {s_xx[i], s_yy[i], s_xy[i]}; }

Eigen::Vector2d FieldBatch::equilibrium_residual(Eigen::Index i) const {
  return {s_xx_x[i] + s_xy_y[i], s_xy_x[i] + s_yy_y[i]};
}

void FieldBatch::add_state_adjoint(Eigen::Index i, const Vector6d& z_bar) {
  u_x_x[i] += z_bar[0];
  u_y_y[i] += z_bar[1];
  u_x_y[i] += z_bar[2];
  u_y_x[i] += z_bar[2];
  s_xx[i] += z_bar[3];
  s_yy[i] += z_bar[4];
  s_xy[i] += z_bar[5];
}

Generator::Generator(GeneratorSpec spec)
    : spec_(spec), nets_{Mlp(spec.net), Mlp(spec.net), Mlp(spec.net), Mlp(spec.net), Mlp(spec.net)} {
  if (spec.net.input_dim != 2 || spec.net.output_dim != 1) {
    throw InvalidInput("generator networks must map 2 inputs to 1 output");
  }
}

Generator Generator::initialized(GeneratorSpec spec, std::uint64_t seed) {
  Generator gen(spec);
  for (int f = 0; f < kFieldCount; ++f) {
    gen.nets_[f] = Mlp::glorot(spec.net, seed, (rng_streams::init << 8) | static_cast<std::uint64_t>(f));
  }
  return gen;
}

std::size_t Generator::parameter_count() const {
  std::size_t n = 0;
  for (const Mlp& net : nets_) n += net.parameter_count();
  return n;
}

Eigen::VectorXd Generator::flatten() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index pos = 0;
  for (const Mlp& net : nets_) {
    const auto n = static_cast<Eigen::Index>(net.parameter_count());
    theta.segment(pos, n) = net.flatten();
    pos += n;
  }
  return theta;
}

void Generator::unflatten(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
    throw InvalidInput("generator unflatten: parameter count mismatch");
  }
  Eigen::Index pos = 0;
  for (Mlp& net : nets_) {
    const auto n = static_cast<Eigen::Index>(net.parameter_count());
    net.unflatten(theta.segment(pos, n));
    pos += n;
  }
}

Generator::Pass Generator::forward(std::span<const Point2> points) const {
  const auto batch = static_cast<Eigen::Index>(points.size());
  Pass pass;
  pass.coords.resize(2, batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    pass.coords(0, i) = points[static_cast<std::size_t>(i)].x;
    pass.coords(1, i) = points[static_cast<std::size_t>(i)].y;
  }
  const auto seeds = unit_seeds(2, batch);
  for (int f = 0; f < kFieldCount; ++f) pass.tapes[f] = nets_[f].record(pass.coords, seeds);

  const auto x = pass.coords.row(0).array();
  const auto y = pass.coords.row(1).array();
  auto value = [&](Field f) { return pass.tapes[static_cast<int>(f)].output.row(0).array(); };
  auto d_dx = [&](Field f) { return pass.tapes[static_cast<int>(f)].output_tangents[0].row(0).array(); };
  auto d_dy = [&](Field f) { return pass.tapes[static_cast<int>(f)].output_tangents[1].row(0).array(); };

  const Eigen::ArrayXXd t = y.unaryExpr([this](double v) { return spec_.traction(v); });
  const Eigen::ArrayXXd dt = y.unaryExpr([this](double v) { return spec_.traction.derivative(v); });
  const double r2 = spec_.plate.hole_radius * spec_.plate.hole_radius;
  const Eigen::ArrayXXd phi = x * y * (x * x + y * y - r2);
  const Eigen::ArrayXXd phi_x = y * (3.0 * x * x + y * y - r2);
  const Eigen::ArrayXXd phi_y = x * (x * x + 3.0 * y * y - r2);

  FieldBatch& fb = pass.fields;
  fb.u_x = x * value(Field::u_x);
  fb.u_x_x = value(Field::u_x) + x * d_dx(Field::u_x);
  fb.u_x_y = x * d_dy(Field::u_x);

  fb.u_y = y * value(Field::u_y);
  fb.u_y_x = y * d_dx(Field::u_y);
  fb.u_y_y = value(Field::u_y) + y * d_dy(Field::u_y);

  fb.s_xx = x * t + (1.0 - x) * value(Field::s_xx);
  fb.s_xx_x = t - value(Field::s_xx) + (1.0 - x) * d_dx(Field::s_xx);
  fb.s_xx_y = x * dt + (1.0 - x) * d_dy(Field::s_xx);

  fb.s_yy = (1.0 - y) * value(Field::s_yy);
  fb.s_yy_x = (1.0 - y) * d_dx(Field::s_yy);
  fb.s_yy_y = -value(Field::s_yy) + (1.0 - y) * d_dy(Field::s_yy);

  fb.s_xy = phi * value(Field::s_xy);
  fb.s_xy_x = phi_x * value(Field::s_xy) + phi * d_dx(Field::s_xy);
  fb.s_xy_y = phi_y * value(Field::s_xy) + phi * d_dy(Field::s_xy);
  return pass;
}

Eigen::VectorXd Generator::backward(const Pass& pass, const FieldBatch& adj) const {
  const Eigen::Index batch = pass.coords.cols();
  if (adj.size() != batch) throw InvalidInput("generator backward: adjoint batch mismatch");
  const auto x = pass.coords.row(0).array();
  const auto y = pass.coords.row(1).array();
  const double r2 = spec_.plate.hole_radius * spec_.plate.hole_radius;
  const Eigen::ArrayXXd phi = x * y * (x * x + y * y - r2);
  const Eigen::ArrayXXd phi_x = y * (3.0 * x * x + y * y - r2);
  const Eigen::ArrayXXd phi_y = x * (x * x + 3.0 * y * y - r2);

  // Adjoints of (N, dN/dx, dN/dy) for each raw network output.
  std::array<Eigen::MatrixXd, kFieldCount> v_bar, dx_bar, dy_bar;
  v_bar[0] = x * adj.u_x.array() + adj.u_x_x.array();
  dx_bar[0] = x * adj.u_x_x.array();
  dy_bar[0] = x * adj.u_x_y.array();

  v_bar[1] = y * adj.u_y.array() + adj.u_y_y.array();
  dx_bar[1] = y * adj.u_y_x.array();
  dy_bar[1] = y * adj.u_y_y.array();

  v_bar[2] = (1.0 - x) * adj.s_xx.array() - adj.s_xx_x.array();
  dx_bar[2] = (1.0 - x) * adj.s_xx_x.array();
  dy_bar[2] = (1.0 - x) * adj.s_xx_y.array();

  v_bar[3] = (1.0 - y) * adj.s_yy.array() - adj.s_yy_y.array();
  dx_bar[3] = (1.0 - y) * adj.s_yy_x.array();
  dy_bar[3] = (1.0 - y) * adj.s_yy_y.array();

  v_bar[4] = phi * adj.s_xy.array() + phi_x * adj.s_xy_x.array() + phi_y * adj.s_xy_y.array();
  dx_bar[4] = phi * adj.s_xy_x.array();
  dy_bar[4] = phi * adj.s_xy_y.array();

  Eigen::VectorXd grad(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index pos = 0;
  for (int f = 0; f < kFieldCount; ++f) {
    const auto n = static_cast<Eigen::Index>(nets_[f].parameter_count());
    if (v_bar[f].isZero(0.0) && dx_bar[f].isZero(0.0) && dy_bar[f].isZero(0.0)) {
      grad.segment(pos, n).setZero();
    } else {
      const std::array<Eigen::MatrixXd, 2> tangents{dx_bar[f], dy_bar[f]};
      grad.segment(pos, n) = nets_[f].backward(pass.tapes[f], v_bar[f], tangents).params;
    }
    pos += n;
  }
  return grad;
}

GeneratorOutput Generator::evaluate(const Point2& p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !spec_.plate.contains(p)) {
    std::ostringstream msg;
    msg << "generator: point (" << p.x << ", " << p.y << ") lies outside the domain";
    throw InvalidInput(msg.str());
  }
  return evaluate(std::span<const Point2>(&p, 1)).front();
}

std::vector<GeneratorOutput> Generator::evaluate(std::span<const Point2> points) const {
  for (const Point2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !spec_.plate.contains(p)) {
      throw InvalidInput("generator: point outside the domain");
    }
  }
  const Pass pass = forward(points);
  const FieldBatch& fb = pass.fields;
  std::vector<GeneratorOutput> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out[i] = {points[i], fb.u_x[c], fb.u_y[c], fb.strain(c), fb.stress(c), fb.equilibrium_residual(c)};
  }
  return out;
}

SoftBoundary SoftBoundary::from(const BoundarySets& sets, const GeneratorSpec& spec) {
  SoftBoundary b;
  for (const Point2& p : sets.right) {
    b.points.push_back(p);
    b.normals.emplace_back(1.0, 0.0);
    b.tractions.emplace_back(spec.traction(p.y), 0.0);
    b.normal_only.push_back(0);
  }
  for (const Point2& p : sets.top) {
    b.points.push_back(p);
    b.normals.emplace_back(0.0, 1.0);
    b.tractions.emplace_back(0.0, 0.0);
    b.normal_only.push_back(0);
  }
  // Outward normal of the body points into the hole.
  for (const Point2& p : sets.hole) {
    const double r = std::hypot(p.x, p.y);
    b.points.push_back(p);
    b.normals.emplace_back(-p.x / r, -p.y / r);
    b.tractions.emplace_back(0.0, 0.0);
    b.normal_only.push_back(1);
  }
  return b;
}

PhysicsTerms accumulate_physics_loss(const FieldBatch& f, Eigen::Index n_interior, const SoftBoundary& boundary,
                                     FieldBatch* adjoint, double scale) {
  const auto n_boundary = static_cast<Eigen::Index>(boundary.size());
  if (n_interior <= 0) throw InvalidInput("physics loss: empty interior point set");
  if (f.size() < n_interior + n_boundary) throw InvalidInput("physics loss: field batch too small");

  PhysicsTerms terms;
  const double w_in = 1.0 / static_cast<double>(n_interior);
  for (Eigen::Index i = 0; i < n_interior; ++i) {
    const double r1 = f.s_xx_x[i] + f.s_xy_y[i];
    const double r2 = f.s_xy_x[i] + f.s_yy_y[i];
    terms.interior += w_in * (r1 * r1 + r2 * r2);
    if (adjoint) {
      const double g1 = scale * 2.0 * w_in * r1;
      const double g2 = scale * 2.0 * w_in * r2;
      adjoint->s_xx_x[i] += g1;
      adjoint->s_xy_y[i] += g1;
      adjoint->s_xy_x[i] += g2;
      adjoint->s_yy_y[i] += g2;
    }
  }
  if (n_boundary > 0) {
    const double w_b = 1.0 / static_cast<double>(n_boundary);
    for (Eigen::Index j = 0; j < n_boundary; ++j) {
      const Eigen::Index i = n_interior + j;
      const Eigen::Vector2d& n = boundary.normals[static_cast<std::size_t>(j)];
      const Eigen::Vector2d& t = boundary.tractions[static_cast<std::size_t>(j)];
      const double r1 = f.s_xx[i] * n[0] + f.s_xy[i] * n[1] - t[0];
      const double r2 = f.s_xy[i] * n[0] + f.s_yy[i] * n[1] - t[1];
      if (boundary.normal_only[static_cast<std::size_t>(j)]) {
        const double rn = r1 * n[0] + r2 * n[1];
        terms.boundary += w_b * rn * rn;
        if (adjoint) {
          const double g = scale * 2.0 * w_b * rn;
          adjoint->s_xx[i] += g * n[0] * n[0];
          adjoint->s_xy[i] += g * 2.0 * n[0] * n[1];
          adjoint->s_yy[i] += g * n[1] * n[1];
        }
        continue;
      }
      terms.boundary += w_b * (r1 * r1 + r2 * r2);
      if (adjoint) {
        const double g1 = scale * 2.0 * w_b * r1;
        const double g2 = scale * 2.0 * w_b * r2;
        adjoint->s_xx[i] += g1 * n[0];
        adjoint->s_xy[i] += g1 * n[1] + g2 * n[0];
        adjoint->s_yy[i] += g2 * n[1];
      }
    }
  }
  return terms;
}

PhysicsLoss physics_loss(const Generator& gen, std::span<const Point2> interior, const SoftBoundary& boundary,
                         bool with_gradient) {
  if (interior.empty()) throw InvalidInput("physics loss: empty interior point set");
  std::vector<Point2> points(interior.begin(), interior.end());
  points.insert(points.end(), boundary.points.begin(), boundary.points.end());
  const Generator::Pass pass = gen.forward(points);
  PhysicsLoss out;
  const auto n_in = static_cast<Eigen::Index>(interior.size());
  if (!with_gradient) {
    out.terms = accumulate_physics_loss(pass.fields, n_in, boundary, nullptr);
    return out;
  }
  FieldBatch adjoint = FieldBatch::zeros(pass.fields.size());
  out.terms = accumulate_physics_loss(pass.fields, n_in, boundary, &adjoint);
  out.gradient = gen.backward(pass, adjoint);
  return out;
}

void write_fields_csv(const std::filesystem::path& path, std::span<const GeneratorOutput> fields) {
  std::ostringstream out;
  out << "x,y,u_x,u_y,s_xx,s_yy,s_xy\n" << std::setprecision(17);
  for (const GeneratorOutput& g : fields) {
    out << g.point.x << ',' << g.point.y << ',' << g.u_x << ',' << g.u_y << ',' << g.stress.s_xx << ','
        << g.stress.s_yy << ',' << g.stress.s_xy << '\n';
  }
  if (!detail::write_file(path, out.str())) throw IoError("cannot write " + path.string());
}

}  // namespace ddgan
