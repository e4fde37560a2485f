#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace trom {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct Pose {
  Vec3 position{Vec3::Zero()};
  Quat orientation{Quat::Identity()};
};

}  // namespace trom
