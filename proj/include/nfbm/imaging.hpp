#pragma once

#include "nfbm/linops.hpp"
#include "nfbm/vec.hpp"

namespace nfbm {

/// Grayscale image, nominal range [0,255], row-major pixels.
struct Image {
  int width = 0;
  int height = 0;
  Vec px;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), px(static_cast<std::size_t>(w) * h, fill) {}
  double& at(int row, int col) { return px[idx(row, col)]; }
  double at(int row, int col) const { return px[idx(row, col)]; }
  std::size_t idx(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  std::size_t size() const { return px.size(); }
};

/// Stacked forward differences: dx holds the horizontal differences (zero
/// last column), dy the vertical ones (zero last row).
struct GradField {
  int width = 0;
  int height = 0;
  Vec dx;
  Vec dy;

  GradField() = default;
  GradField(int w, int h)
      : width(w),
        height(h),
        dx(static_cast<std::size_t>(w) * h, 0.0),
        dy(static_cast<std::size_t>(w) * h, 0.0) {}
  std::size_t size() const { return dx.size() + dy.size(); }
};

/// Nonnegative taps summing to one, applied by correlation with symmetric
/// (half-sample reflective) boundary handling.
struct BlurKernel {
  int size = 0;
  Vec taps;  // size x size, row-major

  static BlurKernel average(int k);
};

Image project_box(const Image& img, double lo = 0.0, double hi = 255.0);

GradField grad(const Image& img);
Image grad_adjoint(const GradField& g);

Image blur(const Image& img, const BlurKernel& k);
Image blur_adjoint(const Image& img, const BlurKernel& k);

/// Entrywise soft threshold by `weight` on both difference components.
GradField prox_l1(const GradField& v, double weight);

/// Entrywise clamp of both components to [-radius, radius].
GradField project_linf(const GradField& v, double radius);

/// 10 log10(peak^2 * #pixels / ||x - ref||^2); +infinity when identical.
double psnr(const Image& x, const Image& ref, double peak = 255.0);

double rel_error(const Image& x_next, const Image& x_curr);

/// Operator views for norm estimation and adjoint testing.
LinOp grad_linop(int width, int height);
LinOp blur_linop(int width, int height, const BlurKernel& k);

Vec grad_to_vec(const GradField& g);
GradField vec_to_grad(const Vec& v, int width, int height);

}  // namespace nfbm
