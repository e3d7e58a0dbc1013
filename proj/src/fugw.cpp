#include "braindec/fugw.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "braindec/errors.hpp"

namespace braindec {

namespace {

void validate_config(const FugwConfig& c) {
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ValidationError("fugw: alpha must lie in [0,1]");
  if (!(c.rho > 0.0)) throw ValidationError("fugw: rho must be positive");
  if (!(c.epsilon > 0.0)) throw ValidationError("fugw: epsilon must be positive");
  if (c.bcd_iters < 1) throw ValidationError("fugw: bcd_iters must be >= 1");
  if (c.sinkhorn_iters < 1) throw ValidationError("fugw: sinkhorn_iters must be >= 1");
}

Vector safe_log(const Vector& w) {
  return w.unaryExpr([](double x) {
    return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
  });
}

// Row-wise log-sum-exp of (offsets^T broadcast) - scaled_cost.
Vector row_lse(const Matrix& neg_scaled_cost, const Vector& col_offsets) {
  Matrix shifted = neg_scaled_cost;
  shifted.rowwise() += col_offsets.transpose();
  const Vector row_max = shifted.rowwise().maxCoeff();
  const Vector sums = (shifted.colwise() - row_max).array().exp().matrix().rowwise().sum();
  return row_max.array() + sums.array().log();
}

}  // namespace

TransportPlan make_transport_plan(Matrix plan, FugwConfig config) {
  if (!plan.allFinite() || (plan.array() < 0.0).any()) {
    throw ValidationError("transport plan entries must be finite and nonnegative");
  }
  TransportPlan tp;
  tp.marginal_out = plan.rowwise().sum();
  tp.marginal_ref = plan.colwise().sum();
  tp.plan = std::move(plan);
  tp.config = config;
  if (!(tp.plan.sum() > 0.0)) throw ValidationError("transport plan must carry positive total mass");
  return tp;
}

void validate_problem(const FugwProblem& p) {
  validate_config(p.config);
  if (p.X_out.rows() != p.X_ref.rows()) {
    throw ValidationError("fugw: X_out and X_ref must share the same number of time-locked rows");
  }
  if (p.X_out.rows() < 1) throw ValidationError("fugw: need at least one sample row");
  validate_geometry(p.geom_out);
  validate_geometry(p.geom_ref);
  if (p.X_out.cols() != p.geom_out.num_vertices()) {
    throw ValidationError("fugw: X_out column count does not match geom_out vertices");
  }
  if (p.X_ref.cols() != p.geom_ref.num_vertices()) {
    throw ValidationError("fugw: X_ref column count does not match geom_ref vertices");
  }
}

Matrix feature_cost(const Matrix& X_out, const Matrix& X_ref) {
  if (X_out.rows() != X_ref.rows()) {
    throw ValidationError("feature_cost: shape error, row counts " + std::to_string(X_out.rows()) +
                          " vs " + std::to_string(X_ref.rows()));
  }
  const Vector sq_out = X_out.colwise().squaredNorm();
  const Vector sq_ref = X_ref.colwise().squaredNorm();
  Matrix cost = -2.0 * (X_out.transpose() * X_ref);
  cost.colwise() += sq_out;
  cost.rowwise() += sq_ref.transpose();
  return cost.cwiseMax(0.0);
}

Matrix gromov_cost(const Matrix& D_out, const Matrix& D_ref, const Matrix& coupling) {
  if (D_out.rows() != D_out.cols() || D_ref.rows() != D_ref.cols()) {
    throw ValidationError("gromov_cost: distance matrices must be square");
  }
  if (coupling.rows() != D_out.rows() || coupling.cols() != D_ref.rows()) {
    throw ValidationError("gromov_cost: coupling shape does not conform with distance matrices");
  }
  if ((coupling.array() < 0.0).any()) throw ValidationError("gromov_cost: negative coupling entry");

  const Vector q_row = coupling.rowwise().sum();
  const Vector q_col = coupling.colwise().sum();
  const Vector a = D_out.array().square().matrix() * q_row;  // sum_k D_out[i][k]^2 q_row[k]
  const Vector b = D_ref.array().square().matrix() * q_col;  // sum_l D_ref[j][l]^2 q_col[l]
  Matrix g = -2.0 * (D_out * coupling * D_ref.transpose());
  g.colwise() += a;
  g.rowwise() += b.transpose();
  return g;
}

double kl_kronecker_squared(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ValidationError("kl_kronecker_squared: size mismatch");
  double core = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0 || b[i] < 0.0) throw ValidationError("kl_kronecker_squared: negative entry");
    if (a[i] > 0.0) {
      if (b[i] == 0.0) return std::numeric_limits<double>::infinity();
      core += a[i] * std::log(a[i] / b[i]);
    }
  }
  const double mass_a = a.sum();
  const double mass_b = b.sum();
  return 2.0 * mass_a * core - mass_a * mass_a + mass_b * mass_b;
}

double plan_entropy(const Matrix& plan) {
  double h = 0.0;
  for (Index j = 0; j < plan.cols(); ++j) {
    for (Index i = 0; i < plan.rows(); ++i) {
      const double p = plan(i, j);
      if (p > 0.0) h += p * (std::log(p) - 1.0);
    }
  }
  return h;
}

FugwLossTerms fugw_loss(const Matrix& plan, const FugwProblem& problem) {
  if (plan.rows() != problem.geom_out.num_vertices() || plan.cols() != problem.geom_ref.num_vertices()) {
    throw ValidationError("fugw_loss: plan shape does not conform with the problem");
  }
  const FugwConfig& c = problem.config;

  FugwLossTerms terms;
  const Matrix feat = feature_cost(problem.X_out, problem.X_ref);
  terms.wasserstein = (feat.array() * plan.array()).sum();
  const Matrix grom = gromov_cost(problem.geom_out.distances, problem.geom_ref.distances, plan);
  terms.gromov = (grom.array() * plan.array()).sum();
  const Vector m1 = plan.rowwise().sum();
  const Vector m2 = plan.colwise().sum();
  terms.marginal_kl =
      kl_kronecker_squared(m1, problem.geom_out.weights) + kl_kronecker_squared(m2, problem.geom_ref.weights);
  terms.entropy = plan_entropy(plan);
  terms.total = (1.0 - c.alpha) * terms.wasserstein + c.alpha * terms.gromov + c.rho * terms.marginal_kl +
                c.epsilon * terms.entropy;
  return terms;
}

Matrix unbalanced_sinkhorn(const Matrix& cost, const Vector& w_out, const Vector& w_ref,
                           double rho, double epsilon, int iters) {
  if (!cost.allFinite()) throw ValidationError("unbalanced_sinkhorn: cost must be finite");
  if (cost.rows() != w_out.size() || cost.cols() != w_ref.size()) {
    throw ValidationError("unbalanced_sinkhorn: weight lengths do not match the cost shape");
  }
  if ((w_out.array() < 0.0).any() || (w_ref.array() < 0.0).any() || !(w_out.sum() > 0.0) || !(w_ref.sum() > 0.0)) {
    throw ValidationError("unbalanced_sinkhorn: weights must be nonnegative with positive mass");
  }
  if (!(rho > 0.0) || !(epsilon > 0.0)) throw ValidationError("unbalanced_sinkhorn: rho and epsilon must be positive");
  if (iters < 1) throw ValidationError("unbalanced_sinkhorn: need at least one iteration");

  const double damp = rho / (rho + epsilon);
  const Matrix neg_scaled = -cost / epsilon;
  const Vector log_out = safe_log(w_out);
  const Vector log_ref = safe_log(w_ref);

  Vector f = Vector::Zero(cost.rows());
  Vector g = Vector::Zero(cost.cols());
  for (int it = 0; it < iters; ++it) {
    f = -(damp * epsilon) * row_lse(neg_scaled, log_ref + g / epsilon);
    g = -(damp * epsilon) * row_lse(neg_scaled.transpose(), log_out + f / epsilon);
    if (!f.allFinite() || !g.allFinite()) {
      throw NumericalError("unbalanced_sinkhorn: non-finite potential at iteration " + std::to_string(it));
    }
  }

  Matrix log_plan = neg_scaled;
  log_plan.colwise() += (log_out + f / epsilon);
  log_plan.rowwise() += (log_ref + g / epsilon).transpose();
  Matrix plan = log_plan.array().exp();
  if (!plan.allFinite()) throw NumericalError("unbalanced_sinkhorn: non-finite plan after final scaling");
  return plan;
}

namespace {

double normalized_total(const FugwLossTerms& raw, const FugwConfig& c, double scale_w, double scale_g) {
  return (1.0 - c.alpha) * raw.wasserstein / scale_w + c.alpha * raw.gromov / scale_g +
         c.rho * raw.marginal_kl + c.epsilon * raw.entropy;
}

}  // namespace

TransportPlan solve_fugw(const FugwProblem& problem) {
  validate_problem(problem);
  const FugwConfig& c = problem.config;
  const Vector& w_out = problem.geom_out.weights;
  const Vector& w_ref = problem.geom_ref.weights;
  const Matrix& D_out = problem.geom_out.distances;
  const Matrix& D_ref = problem.geom_ref.distances;

  const Matrix feat = feature_cost(problem.X_out, problem.X_ref);
  Matrix plan_p = w_out * w_ref.transpose();  // product coupling
  Matrix plan_q = plan_p;

  // Cost normalizers fixed at initialization so alpha weighs comparable
  // magnitudes; disabled via normalize_costs.
  double scale_w = 1.0;
  double scale_g = 1.0;
  if (c.normalize_costs) {
    const double feat_max = feat.maxCoeff();
    const double grom_max = gromov_cost(D_out, D_ref, plan_p).maxCoeff();
    if (feat_max > 0.0) scale_w = feat_max;
    if (grom_max > 0.0) scale_g = grom_max;
  }
  const Matrix feat_weighted = ((1.0 - c.alpha) / scale_w) * feat;

  std::vector<FugwTraceEntry> trace;
  trace.reserve(static_cast<std::size_t>(c.bcd_iters) + 1);
  const auto record = [&](const Matrix& plan) {
    FugwTraceEntry entry;
    entry.raw = fugw_loss(plan, problem);
    entry.normalized_total = normalized_total(entry.raw, c, scale_w, scale_g);
    trace.push_back(entry);
  };
  record(plan_p);

  for (int it = 0; it < c.bcd_iters; ++it) {
    try {
      const Matrix cost_p = feat_weighted + (c.alpha / scale_g) * gromov_cost(D_out, D_ref, plan_q);
      plan_p = unbalanced_sinkhorn(cost_p, w_out, w_ref, c.rho, c.epsilon, c.sinkhorn_iters);
      const Matrix cost_q = feat_weighted + (c.alpha / scale_g) * gromov_cost(D_out, D_ref, plan_p);
      plan_q = unbalanced_sinkhorn(cost_q, w_out, w_ref, c.rho, c.epsilon, c.sinkhorn_iters);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (BCD iteration " + std::to_string(it) + ")");
    }
    record(0.5 * (plan_p + plan_q));
  }

  TransportPlan result = make_transport_plan(0.5 * (plan_p + plan_q), c);
  result.loss_trace = std::move(trace);
  result.scale_wasserstein = scale_w;
  result.scale_gromov = scale_g;
  return result;
}

double diagonal_mass_fraction(const Matrix& plan) {
  if (plan.rows() != plan.cols()) {
    throw ValidationError("diagonal_mass_fraction: plan must be square");
  }
  const double mass = plan.sum();
  if (!(mass > 0.0)) throw ValidationError("diagonal_mass_fraction: plan has no mass");
  return plan.diagonal().sum() / mass;
}

PlanDiagnostics plan_diagnostics(const TransportPlan& plan, const Geometry& geom_out, const Geometry& geom_ref) {
  const Matrix& p = plan.plan;
  if (p.rows() != geom_out.num_vertices() || p.cols() != geom_ref.num_vertices()) {
    throw ValidationError("plan_diagnostics: plan shape does not match geometries");
  }

  PlanDiagnostics d;
  d.mass = p.sum();
  d.marginal_l1_out = (p.rowwise().sum() - geom_out.weights).cwiseAbs().sum();
  d.marginal_l1_ref = (p.colwise().sum().transpose() - geom_ref.weights).cwiseAbs().sum();
  if (p.rows() == p.cols()) {
    d.diagonal_mass_fraction = diagonal_mass_fraction(p);
    // How far mass lands from the anatomically matching reference vertex.
    d.mean_displacement = (p.array() * geom_ref.distances.array()).sum() / d.mass;
  }
  return d;
}

}  // namespace braindec
