#include "ivl/groupact.hpp"

#include "ivl/common.hpp"
#include "ivl/kernels.hpp"

namespace ivl::group {

Tensor<float> rotate_image(const Tensor<float>& img, const GroupElement& g) {
  IVL_CHECK(img.shape.size() == 2, "rotate_image expects [h,w], got %s", shape_str(img.shape).c_str());
  IVL_CHECK(g.is_unit(), "group element (%g, %g) is not unit norm", g.c, g.s);
  Tensor<float> out(img.shape);
  kernels::rotate_fwd<float>(img.ptr(), float(g.c), float(g.s), out.ptr(), img.shape[0], img.shape[1]);
  return out;
}

}  // namespace ivl::group
