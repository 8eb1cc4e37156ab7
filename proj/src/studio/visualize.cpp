// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/studio/visualize.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "vgan/diffcore/ops.hpp"
#include "vgan/diffcore/tape.hpp"

namespace vgan {

MixGrid style_mix(const Generator& g, const std::vector<Tensor>& structural_codes,
                  const std::vector<Tensor>& textural_codes, const CameraPose& pose) {
  if (structural_codes.empty() || textural_codes.empty()) throw Error("style_mix: empty grid");
  NoGradScope ng;
  MixGrid out;
  RenderRequest req;
  req.poses = {pose};
  for (const Tensor& zs : structural_codes)
    for (const Tensor& zt : textural_codes) {
      const Tensor img = g.forward(CodeBundle{zs, zt, zt}, req).image;
      out.cells.push_back(img.alias({3, img.size(2), img.size(3)}));
    }
  const auto h = out.cells[0].size(1), w = out.cells[0].size(2);
  const int cols = static_cast<int>(textural_codes.size());
  const int rows = static_cast<int>(structural_codes.size());
  out.image.width = static_cast<int>(w) * cols;
  out.image.height = static_cast<int>(h) * rows;
  out.image.rgb.assign(static_cast<std::size_t>(out.image.width) * out.image.height * 3, 0);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const Image tile = tensor_to_image(out.cells[static_cast<std::size_t>(i * cols + j)]);
      for (std::int64_t y = 0; y < h; ++y)
        std::copy_n(tile.rgb.begin() + y * w * 3, w * 3,
                    out.image.rgb.begin() + ((i * h + y) * out.image.width + j * w) * 3);
    }
  return out;
}

Pca pca3(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw Error("pca3: no rows");
  Pca p;
  p.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd c = x.rowwise() - p.mean.transpose();
  const Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(std::max<Eigen::Index>(1, x.rows()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::Index d = x.cols();
  const double top = std::max(0.0, es.eigenvalues()(d - 1));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = d - 1; i >= 0 && static_cast<int>(keep.size()) < 3; --i)
    if (es.eigenvalues()(i) > 1e-12 * std::max(top, 1e-300)) keep.push_back(i);
  p.components.resize(static_cast<Eigen::Index>(keep.size()), d);
  p.variances.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    p.components.row(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]).transpose();
    p.variances(static_cast<Eigen::Index>(k)) = es.eigenvalues()(keep[k]);
  }
  p.projected = Eigen::MatrixXd::Zero(x.rows(), 3);
  if (!keep.empty()) p.projected.leftCols(p.components.rows()) = c * p.components.transpose();
  return p;
}

DescriptorPca descriptor_pca(const Generator& g, const CodeBundle& codes, const CameraPose& pose) {
  if (codes.batch() != 1) throw Error("descriptor_pca takes a single code bundle");
  NoGradScope ng;
  RenderRequest req;
  req.poses = {pose};
  const GeneratorOutput out = g.forward(codes, req);
  const auto rays = out.weights.size(1), n = out.weights.size(2), c = out.descriptors.size(2);
  const auto w = out.weights.values(), v = out.descriptors.values();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rays, c);
  for (std::int64_t r = 0; r < rays; ++r)
    for (std::int64_t k = 0; k < n; ++k) {
      const double wk = w[static_cast<std::size_t>(r * n + k)];
      for (std::int64_t j = 0; j < c; ++j) acc(r, j) += wk * v[static_cast<std::size_t>((r * n + k) * c + j)];
    }
  DescriptorPca res;
  res.pca = pca3(acc);
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rays))));
  res.image.width = res.image.height = side;
  res.image.rgb.assign(static_cast<std::size_t>(rays) * 3, 0);
  for (int ch = 0; ch < 3; ++ch) {
    const auto col = res.pca.projected.col(ch);
    const double lo = col.minCoeff(), hi = col.maxCoeff();
    if (!(hi > lo)) continue;
    for (std::int64_t r = 0; r < rays; ++r)
      res.image.rgb[static_cast<std::size_t>(r * 3 + ch)] =
          static_cast<std::uint8_t>(std::lround(255.0 * (col(r) - lo) / (hi - lo)));
  }
  return res;
}

}  // namespace vgan
