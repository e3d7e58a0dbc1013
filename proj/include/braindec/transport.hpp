#pragma once

#include "braindec/fugw.hpp"
#include "braindec/types.hpp"

namespace braindec {

/// Barycentric projection of features from the left-out subject's vertex
/// space into the reference space:
///   out[t][j] = sum_i P[i][j] X[t][i] / P_ref[j].
/// Reference vertices with zero incoming mass raise an error naming them;
/// with allow_dead_vertices their output columns are zero-filled instead.
Matrix apply_plan(const TransportPlan& plan, const Matrix& features, bool allow_dead_vertices = false);

/// Channel-wise transport of a v_out x 3 color matrix with entries in [0,1];
/// the result is clipped back into [0,1].
Matrix transport_colormap(const TransportPlan& plan, const Matrix& rgb, bool allow_dead_vertices = false);

/// Plan with rows and columns swapped, for reverse transport.
TransportPlan transpose_plan(const TransportPlan& plan);

}  // namespace braindec
