#include "lpdpl/hog.hpp"

#include <cmath>

#include "lpdpl/errors.hpp"

namespace lpdpl {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void HogConfig::validate() const {
  if (cell_size < 1) throw Error("HogConfig: cell_size must be >= 1");
  if (num_bins < 2) throw Error("HogConfig: num_bins must be >= 2");
}

Eigen::MatrixXd glyph_to_matrix(const NormalizedGlyph& glyph) {
  const int n = NormalizedGlyph::side;
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = static_cast<double>(glyph.at(r, c));
  return m;
}

GradientField gradients(const Eigen::MatrixXd& image) {
  const Eigen::Index rows = image.rows(), cols = image.cols();
  GradientField g;
  g.gx.resize(rows, cols);
  g.gy.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index cl = c > 0 ? c - 1 : c;
      const Eigen::Index cr = c + 1 < cols ? c + 1 : c;
      const Eigen::Index ru = r > 0 ? r - 1 : r;
      const Eigen::Index rd = r + 1 < rows ? r + 1 : r;
      g.gx(r, c) = image(r, cr) - image(r, cl);
      g.gy(r, c) = image(rd, c) - image(ru, c);
    }
  }
  return g;
}

GradientField gradients(const NormalizedGlyph& glyph) {
  return gradients(glyph_to_matrix(glyph));
}

CellHistograms cell_histograms(const GradientField& grads, const HogConfig& cfg) {
  cfg.validate();
  const int rows = static_cast<int>(grads.gx.rows());
  const int cols = static_cast<int>(grads.gx.cols());
  const int cells_y = rows / cfg.cell_size;
  const int cells_x = cols / cfg.cell_size;

  CellHistograms out;
  out.cells_y = cells_y;
  out.cells_x = cells_x;
  out.num_bins = cfg.num_bins;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells_y) * cells_x * cfg.num_bins);

  const double range = cfg.signed_orientations ? 360.0 : 180.0;
  const double bin_width = range / cfg.num_bins;

  for (int r = 0; r < cells_y * cfg.cell_size; ++r) {
    const int cy = r / cfg.cell_size;
    for (int c = 0; c < cells_x * cfg.cell_size; ++c) {
      const int cx = c / cfg.cell_size;
      const double gx = grads.gx(r, c);
      const double gy = grads.gy(r, c);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;

      double angle = std::atan2(gy, gx) * 180.0 / kPi; // (-180, 180]
      angle = std::fmod(angle + 360.0, range);          // fold into [0, range)

      if (cfg.soft_binning) {
        // Bin centers sit at (b + 0.5) * bin_width; orientation wraps.
        const double t = angle / bin_width - 0.5;
        int b0 = static_cast<int>(std::floor(t));
        const double frac = t - b0;
        int b1 = b0 + 1;
        b0 = ((b0 % cfg.num_bins) + cfg.num_bins) % cfg.num_bins;
        b1 = ((b1 % cfg.num_bins) + cfg.num_bins) % cfg.num_bins;
        out.at(cy, cx, b0) += mag * (1.0 - frac);
        out.at(cy, cx, b1) += mag * frac;
      } else {
        int b = static_cast<int>(angle / bin_width);
        if (b >= cfg.num_bins) b = cfg.num_bins - 1;
        out.at(cy, cx, b) += mag;
      }
    }
  }
  return out;
}

FeatureVector normalize_features(const CellHistograms& hists, const HogConfig& cfg) {
  FeatureVector out = hists.values;
  if (out.size() == 0) return out;

  if (cfg.normalization == HogNormalization::global_minmax) {
    const double lo = out.minCoeff();
    const double hi = out.maxCoeff();
    if (hi > lo) {
      out = (out.array() - lo) / (hi - lo);
    } else {
      out.setZero();
    }
  } else {
    for (int cy = 0; cy < hists.cells_y; ++cy) {
      for (int cx = 0; cx < hists.cells_x; ++cx) {
        const Eigen::Index base = (static_cast<Eigen::Index>(cy) * hists.cells_x + cx) * hists.num_bins;
        auto cell = out.segment(base, hists.num_bins);
        const double lo = cell.minCoeff();
        const double hi = cell.maxCoeff();
        if (hi > lo) {
          cell = (cell.array() - lo) / (hi - lo);
        } else {
          cell.setZero();
        }
      }
    }
  }
  return out;
}

FeatureVector extract(const NormalizedGlyph& glyph, const HogConfig& cfg) {
  return extract_real(glyph_to_matrix(glyph), cfg);
}

FeatureVector extract_real(const Eigen::MatrixXd& image, const HogConfig& cfg) {
  const GradientField g = gradients(image);
  const CellHistograms h = cell_histograms(g, cfg);
  return normalize_features(h, cfg);
}

} // namespace lpdpl
