#include "nfbm/imaging.hpp"

#include <cmath>

namespace nfbm {

BlurKernel BlurKernel::average(int k) {
  if (k < 1 || k % 2 == 0)
    throw parameter_error("blur kernel size must be odd and positive");
  BlurKernel b;
  b.size = k;
  b.taps.assign(static_cast<std::size_t>(k) * k,
                1.0 / (static_cast<double>(k) * k));
  return b;
}

Image project_box(const Image& img, double lo, double hi) {
  if (!(lo < hi)) throw parameter_error("project_box: lo < hi");
  Image out = img;
  for (auto& v : out.px) v = std::min(hi, std::max(lo, v));
  return out;
}

GradField grad(const Image& img) {
  const int w = img.width, h = img.height;
  GradField g(w, h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w - 1; ++j)
      g.dx[img.idx(i, j)] = img.at(i, j + 1) - img.at(i, j);
    // last column stays zero (Neumann)
  }
  for (int i = 0; i < h - 1; ++i)
    for (int j = 0; j < w; ++j)
      g.dy[img.idx(i, j)] = img.at(i + 1, j) - img.at(i, j);
  return g;
}

Image grad_adjoint(const GradField& g) {
  const int w = g.width, h = g.height;
  Image out(w, h, 0.0);
  // adjoint of the horizontal differences; the last column of dx is
  // structurally ignored
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w - 1; ++j) {
      const double v = g.dx[out.idx(i, j)];
      out.at(i, j) -= v;
      out.at(i, j + 1) += v;
    }
  }
  for (int i = 0; i < h - 1; ++i) {
    for (int j = 0; j < w; ++j) {
      const double v = g.dy[out.idx(i, j)];
      out.at(i, j) -= v;
      out.at(i + 1, j) += v;
    }
  }
  return out;
}

namespace {

// Half-sample reflection (edge pixels duplicated), iterated until the index
// lands inside [0, n).
int fold(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

Image blur(const Image& img, const BlurKernel& k) {
  if (k.size > img.width || k.size > img.height)
    throw parameter_error("blur kernel larger than image");
  const int w = img.width, h = img.height;
  const int c = k.size / 2;
  Image out(w, h, 0.0);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double s = 0.0;
      for (int a = 0; a < k.size; ++a) {
        const int ii = fold(i + a - c, h);
        for (int b = 0; b < k.size; ++b) {
          const int jj = fold(j + b - c, w);
          s += k.taps[static_cast<std::size_t>(a) * k.size + b] *
               img.at(ii, jj);
        }
      }
      out.at(i, j) = s;
    }
  }
  return out;
}

Image blur_adjoint(const Image& img, const BlurKernel& k) {
  if (k.size > img.width || k.size > img.height)
    throw parameter_error("blur kernel larger than image");
  const int w = img.width, h = img.height;
  const int c = k.size / 2;
  Image out(w, h, 0.0);
  // exact transpose of pad-then-correlate: scatter each output contribution
  // back to the padded source position
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double v = img.at(i, j);
      for (int a = 0; a < k.size; ++a) {
        const int ii = fold(i + a - c, h);
        for (int b = 0; b < k.size; ++b) {
          const int jj = fold(j + b - c, w);
          out.at(ii, jj) +=
              k.taps[static_cast<std::size_t>(a) * k.size + b] * v;
        }
      }
    }
  }
  return out;
}

GradField prox_l1(const GradField& v, double weight) {
  if (!(weight > 0.0)) throw parameter_error("prox_l1: weight > 0");
  GradField out = v;
  auto soft = [weight](double t) {
    if (t > weight) return t - weight;
    if (t < -weight) return t + weight;
    return 0.0;
  };
  for (auto& t : out.dx) t = soft(t);
  for (auto& t : out.dy) t = soft(t);
  return out;
}

GradField project_linf(const GradField& v, double radius) {
  if (!(radius > 0.0)) throw parameter_error("project_linf: radius > 0");
  GradField out = v;
  for (auto& t : out.dx) t = std::min(radius, std::max(-radius, t));
  for (auto& t : out.dy) t = std::min(radius, std::max(-radius, t));
  return out;
}

double psnr(const Image& x, const Image& ref, double peak) {
  check_dim(x.px, ref.px, "psnr");
  double err2 = 0.0;
  for (std::size_t i = 0; i < x.px.size(); ++i) {
    const double d = x.px[i] - ref.px[i];
    err2 += d * d;
  }
  if (err2 == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 *
         std::log10(peak * peak * static_cast<double>(x.px.size()) / err2);
}

double rel_error(const Image& x_next, const Image& x_curr) {
  return relative_error(x_next.px, x_curr.px);
}

LinOp grad_linop(int width, int height) {
  LinOp op;
  op.domain_dim = width * height;
  op.range_dim = 2 * width * height;
  op.apply = [width, height](const Vec& v) {
    Image img;
    img.width = width;
    img.height = height;
    img.px = v;
    return grad_to_vec(grad(img));
  };
  op.adjoint_apply = [width, height](const Vec& v) {
    return grad_adjoint(vec_to_grad(v, width, height)).px;
  };
  return op;
}

LinOp blur_linop(int width, int height, const BlurKernel& k) {
  LinOp op;
  op.domain_dim = width * height;
  op.range_dim = width * height;
  op.apply = [width, height, k](const Vec& v) {
    Image img;
    img.width = width;
    img.height = height;
    img.px = v;
    return blur(img, k).px;
  };
  op.adjoint_apply = [width, height, k](const Vec& v) {
    Image img;
    img.width = width;
    img.height = height;
    img.px = v;
    return blur_adjoint(img, k).px;
  };
  return op;
}

Vec grad_to_vec(const GradField& g) {
  Vec v;
  v.reserve(g.size());
  v.insert(v.end(), g.dx.begin(), g.dx.end());
  v.insert(v.end(), g.dy.begin(), g.dy.end());
  return v;
}

GradField vec_to_grad(const Vec& v, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (v.size() != 2 * n)
    throw dimension_error(v.size(), 2 * n, "vec_to_grad");
  GradField g(width, height);
  std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n),
            g.dx.begin());
  std::copy(v.begin() + static_cast<std::ptrdiff_t>(n), v.end(),
            g.dy.begin());
  return g;
}

}  // namespace nfbm
