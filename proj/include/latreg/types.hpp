#pragma once

#include <Eigen/Core>

namespace latreg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

}  // namespace latreg
