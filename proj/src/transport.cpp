#include "braindec/transport.hpp"

#include <string>

#include "braindec/errors.hpp"

namespace braindec {

Matrix apply_plan(const TransportPlan& plan, const Matrix& features, bool allow_dead_vertices) {
  if (features.cols() != plan.plan.rows()) {
    throw ValidationError("apply_plan: features have " + std::to_string(features.cols()) +
                          " columns but the plan expects " + std::to_string(plan.plan.rows()));
  }

  std::string dead;
  int dead_count = 0;
  for (Index j = 0; j < plan.marginal_ref.size(); ++j) {
    if (plan.marginal_ref[j] == 0.0) {
      if (dead_count < 8) dead += (dead.empty() ? "" : ", ") + std::to_string(j);
      ++dead_count;
    }
  }
  if (dead_count > 0 && !allow_dead_vertices) {
    throw ValidationError("apply_plan: " + std::to_string(dead_count) +
                          " reference vertices receive zero mass (" + dead +
                          (dead_count > 8 ? ", ..." : "") + "); pass allow_dead_vertices to zero-fill them");
  }

  Matrix out = features * plan.plan;
  for (Index j = 0; j < out.cols(); ++j) {
    const double m = plan.marginal_ref[j];
    if (m == 0.0) {
      out.col(j).setZero();
    } else {
      out.col(j) /= m;
    }
  }
  return out;
}

Matrix transport_colormap(const TransportPlan& plan, const Matrix& rgb, bool allow_dead_vertices) {
  if (rgb.cols() != 3) throw ValidationError("transport_colormap: expected a v x 3 color matrix");
  if ((rgb.array() < 0.0).any() || (rgb.array() > 1.0).any()) {
    throw ValidationError("transport_colormap: color entries must lie in [0,1]");
  }
  // Each channel is a 1-row feature over vertices.
  const Matrix transported = apply_plan(plan, rgb.transpose(), allow_dead_vertices).transpose();
  return transported.cwiseMax(0.0).cwiseMin(1.0);
}

TransportPlan transpose_plan(const TransportPlan& plan) {
  TransportPlan t;
  t.plan = plan.plan.transpose();
  t.marginal_out = plan.marginal_ref;
  t.marginal_ref = plan.marginal_out;
  t.loss_trace = plan.loss_trace;
  t.config = plan.config;
  t.scale_wasserstein = plan.scale_wasserstein;
  t.scale_gromov = plan.scale_gromov;
  return t;
}

}  // namespace braindec
