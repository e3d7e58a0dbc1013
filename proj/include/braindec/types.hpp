#pragma once

#include <Eigen/Dense>

namespace braindec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace braindec
