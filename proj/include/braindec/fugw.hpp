#pragma once

#include <optional>
#include <vector>

#include "braindec/geometry.hpp"
#include "braindec/types.hpp"

namespace braindec {

struct FugwConfig {
  double alpha = 0.5;      // feature vs geometry balance
  double rho = 1.0;        // marginal KL weight
  double epsilon = 1e-4;   // entropic regularization
  int bcd_iters = 10;
  int sinkhorn_iters = 1000;
  bool normalize_costs = true;  // divide each cost block by its max at init
};

// All four terms of the alignment objective, evaluated exactly on the raw
// (unnormalized) costs, plus their weighted total.
struct FugwLossTerms {
  double wasserstein = 0.0;
  double gromov = 0.0;
  double marginal_kl = 0.0;
  double entropy = 0.0;
  double total = 0.0;
};

struct FugwTraceEntry {
  FugwLossTerms raw;
  double normalized_total = 0.0;  // same weighting on max-normalized costs
};

// Soft vertex correspondence between two subjects with cached marginals and
// solver provenance.
struct TransportPlan {
  Matrix plan;          // v_out x v_ref, nonnegative
  Vector marginal_out;  // row sums
  Vector marginal_ref;  // column sums
  std::vector<FugwTraceEntry> loss_trace;
  FugwConfig config;
  double scale_wasserstein = 1.0;  // cost normalizers used by the solver
  double scale_gromov = 1.0;
};

TransportPlan make_transport_plan(Matrix plan, FugwConfig config);

struct FugwProblem {
  Matrix X_out;  // n x v_out, time-locked with X_ref
  Matrix X_ref;  // n x v_ref
  Geometry geom_out;
  Geometry geom_ref;
  FugwConfig config;
};

void validate_problem(const FugwProblem& problem);

/// C[i][j] = squared Euclidean distance between voxel time-courses
/// (column i of X_out, column j of X_ref).
Matrix feature_cost(const Matrix& X_out, const Matrix& X_ref);

/// G[i][j] = sum_{k,l} (D_out[i][k] - D_ref[j][l])^2 Q[k][l], computed via the
/// marginal expansion instead of the quartic loop.
Matrix gromov_cost(const Matrix& D_out, const Matrix& D_ref, const Matrix& coupling);

/// Generalized KL divergence of Kronecker squares:
/// KL(a (x) a | b (x) b) = 2 (sum a) sum_i a_i log(a_i/b_i) - (sum a)^2 + (sum b)^2.
double kl_kronecker_squared(const Vector& a, const Vector& b);

/// Entropy term: sum P (log P - 1) with 0 log 0 = 0.
double plan_entropy(const Matrix& plan);

FugwLossTerms fugw_loss(const Matrix& plan, const FugwProblem& problem);

/// Log-domain scaling iterations for the KL-relaxed marginal problem. The
/// soft-min updates are damped by rho/(rho+epsilon); potentials start at zero
/// and the returned plan is
///   P_ij = w_out_i w_ref_j exp((f_i + g_j - cost_ij)/epsilon).
Matrix unbalanced_sinkhorn(const Matrix& cost, const Vector& w_out, const Vector& w_ref,
                           double rho, double epsilon, int iters);

/// Block coordinate descent on two coupled plans, each step linearizing the
/// geometry term around the other plan and solving with unbalanced_sinkhorn.
/// Returns the averaged plan with its marginals and the per-iteration trace.
TransportPlan solve_fugw(const FugwProblem& problem);

struct PlanDiagnostics {
  double mass = 0.0;
  double marginal_l1_out = 0.0;
  double marginal_l1_ref = 0.0;
  std::optional<double> diagonal_mass_fraction;  // square plans only
  std::optional<double> mean_displacement;       // square plans only
};

/// Fraction of total mass on the diagonal. Throws for non-square plans.
double diagonal_mass_fraction(const Matrix& plan);

PlanDiagnostics plan_diagnostics(const TransportPlan& plan, const Geometry& geom_out, const Geometry& geom_ref);

}  // namespace braindec
