#pragma once

#include "liftmatch/tensor.hpp"

namespace liftmatch {

/// Depth maps are kept in double precision: pseudo-label quality depends on
/// differences of neighboring values, which float32 storage would quantize.
using DepthMap = TensorT<double>;

struct GradientPair {
  MatXd du;  // H x W, depth difference along u (columns)
  MatXd dv;  // H x W, depth difference along v (rows)
};

/// Un-halved central differences: du = Z(u+1,v) - Z(u-1,v) and
/// dv = Z(u,v+1) - Z(u,v-1) in the interior (no 1/2 factor). Border pixels
/// use one-sided differences doubled so a global linear ramp yields the same
/// gradient everywhere.
GradientPair depth_gradients(const DepthMap& z);

/// Per-pixel n = (-du, -dv, 1) normalized. The z component is strictly
/// positive everywhere since the un-normalized z is 1.
Tensor normals_from_depth(const DepthMap& z);

/// Throws DataError naming the first offending pixel if any depth value is
/// nonpositive or non-finite.
void validate_depth(const DepthMap& z);

}  // namespace liftmatch
