#pragma once

// Evaluation metrics: per-frame bounding-box IoU over mask videos and
// background-masked SSIM over frame videos.
//
// SSIM follows the standard formulation: 11x11 Gaussian window with
// sigma = 1.5, C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2, computed on luma.
// Only windows fully inside the image contribute, and of those only windows
// whose center pixel is background after dilating the foreground mask by
// 5 px (Chebyshev radius).

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "trajpair/camera.hpp"
#include "trajpair/error.hpp"
#include "trajpair/render.hpp"

namespace trajpair {

using MaskVideo = std::vector<MaskFrame>;

inline std::optional<Bbox2D> bbox_from_mask(const MaskFrame& mask) {
  Bbox2D box{mask.width, mask.height, -1, -1};
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) == kMaskForeground) {
        box.x_min = std::min(box.x_min, x);
        box.y_min = std::min(box.y_min, y);
        box.x_max = std::max(box.x_max, x);
        box.y_max = std::max(box.y_max, y);
      }
    }
  }
  if (box.x_max < 0) return std::nullopt;
  return box;
}

// Intersection over union with the inclusive-coordinate area convention.
inline double iou(const Bbox2D& a, const Bbox2D& b) {
  const int ix_min = std::max(a.x_min, b.x_min);
  const int iy_min = std::max(a.y_min, b.y_min);
  const int ix_max = std::min(a.x_max, b.x_max);
  const int iy_max = std::min(a.y_max, b.y_max);
  const long long iw = ix_max - ix_min + 1;
  const long long ih = iy_max - iy_min + 1;
  if (iw <= 0 || ih <= 0) return 0.0;
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Temporal mean of per-frame box IoU. Frames where the ground truth has no
// box are excluded; frames where only the prediction is empty score 0.
inline double iou_traj(const MaskVideo& pred, const MaskVideo& gt) {
  if (pred.size() != gt.size()) throw Error("iou_traj: length mismatch");
  if (pred.empty()) throw Error("iou_traj: empty videos");
  double sum = 0.0;
  int valid = 0;
  for (size_t i = 0; i < gt.size(); ++i) {
    if (pred[i].width != gt[i].width || pred[i].height != gt[i].height) {
      throw Error("iou_traj: resolution mismatch at frame " + std::to_string(i));
    }
    const auto gt_box = bbox_from_mask(gt[i]);
    if (!gt_box) continue;
    ++valid;
    const auto pred_box = bbox_from_mask(pred[i]);
    if (pred_box) sum += iou(*pred_box, *gt_box);
  }
  if (valid == 0) throw Error("iou_traj: no frames with a ground-truth box");
  return sum / valid;
}

namespace detail {

inline constexpr int kSsimWindow = 11;
inline constexpr int kSsimMargin = kSsimWindow / 2;
inline constexpr double kSsimC1 = (0.01 * 255.0) * (0.01 * 255.0);
inline constexpr double kSsimC2 = (0.03 * 255.0) * (0.03 * 255.0);
inline constexpr int kMaskDilationPx = 5;

inline const std::array<double, kSsimWindow>& ssim_kernel() {
  static const std::array<double, kSsimWindow> kKernel = [] {
    std::array<double, kSsimWindow> k{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      const double d = i - kSsimMargin;
      k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
  }();
  return kKernel;
}

inline std::vector<double> to_luma(const FrameBuffer& frame) {
  std::vector<double> luma(static_cast<size_t>(frame.width) * frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const uint8_t* px = frame.at(x, y);
      luma[static_cast<size_t>(y) * frame.width + x] =
          0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
  }
  return luma;
}

// Separable Gaussian filter; output is valid only in the interior margin.
inline std::vector<double> gaussian_filter(const std::vector<double>& img, int w, int h) {
  const auto& kernel = ssim_kernel();
  std::vector<double> tmp(img.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = kSsimMargin; x < w - kSsimMargin; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) {
        acc += kernel[k] * img[static_cast<size_t>(y) * w + x + k - kSsimMargin];
      }
      tmp[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  std::vector<double> out(img.size(), 0.0);
  for (int y = kSsimMargin; y < h - kSsimMargin; ++y) {
    for (int x = kSsimMargin; x < w - kSsimMargin; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) {
        acc += kernel[k] * tmp[static_cast<size_t>(y + k - kSsimMargin) * w + x];
      }
      out[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

// Chebyshev dilation of the foreground (value 0) region.
inline std::vector<uint8_t> dilate_foreground(const MaskFrame& mask, int radius) {
  const int w = mask.width, h = mask.height;
  std::vector<uint8_t> row(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool fg = false;
      for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius); ++k) {
        if (mask.at(k, y) == kMaskForeground) {
          fg = true;
          break;
        }
      }
      row[static_cast<size_t>(y) * w + x] = fg ? 1 : 0;
    }
  }
  std::vector<uint8_t> out(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool fg = false;
      for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius); ++k) {
        if (row[static_cast<size_t>(k) * w + x] != 0) {
          fg = true;
          break;
        }
      }
      out[static_cast<size_t>(y) * w + x] = fg ? 1 : 0;
    }
  }
  return out;
}

}  // namespace detail

// Mean SSIM over background windows. `foreground_mask` marks the object with
// value 0; it is dilated before taking the complement.
inline double masked_ssim(const FrameBuffer& frame_a, const FrameBuffer& frame_b,
                          const MaskFrame& foreground_mask) {
  const int w = frame_a.width, h = frame_a.height;
  if (frame_b.width != w || frame_b.height != h || foreground_mask.width != w ||
      foreground_mask.height != h) {
    throw Error("masked_ssim: dimension mismatch");
  }
  const std::vector<double> a = detail::to_luma(frame_a);
  const std::vector<double> b = detail::to_luma(frame_b);
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const std::vector<double> mu_a = detail::gaussian_filter(a, w, h);
  const std::vector<double> mu_b = detail::gaussian_filter(b, w, h);
  const std::vector<double> e_aa = detail::gaussian_filter(aa, w, h);
  const std::vector<double> e_bb = detail::gaussian_filter(bb, w, h);
  const std::vector<double> e_ab = detail::gaussian_filter(ab, w, h);
  const std::vector<uint8_t> dilated =
      detail::dilate_foreground(foreground_mask, detail::kMaskDilationPx);

  double sum = 0.0;
  long long count = 0;
  for (int y = detail::kSsimMargin; y < h - detail::kSsimMargin; ++y) {
    for (int x = detail::kSsimMargin; x < w - detail::kSsimMargin; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (dilated[i] != 0) continue;
      const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + detail::kSsimC1) *
                         (2.0 * cov + detail::kSsimC2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + detail::kSsimC1) *
                         (var_a + var_b + detail::kSsimC2);
      sum += num / den;
      ++count;
    }
  }
  if (count == 0) throw Error("masked_ssim: no background windows");
  return sum / count;
}

// Temporal mean of masked SSIM; the per-frame foreground is the union of the
// ground-truth mask and the prediction-side mask when one is available.
inline double ssim_bg_video(const std::vector<FrameBuffer>& pred,
                            const std::vector<FrameBuffer>& gt, const MaskVideo& gt_fg_masks,
                            const MaskVideo* pred_fg_masks = nullptr) {
  if (pred.size() != gt.size() || gt_fg_masks.size() != gt.size() ||
      (pred_fg_masks != nullptr && pred_fg_masks->size() != gt.size())) {
    throw Error("ssim_bg_video: length mismatch");
  }
  if (pred.empty()) throw Error("ssim_bg_video: empty videos");
  double sum = 0.0;
  for (size_t i = 0; i < gt.size(); ++i) {
    MaskFrame fg = gt_fg_masks[i];
    if (pred_fg_masks != nullptr) {
      const MaskFrame& extra = (*pred_fg_masks)[i];
      if (extra.width != fg.width || extra.height != fg.height) {
        throw Error("ssim_bg_video: mask resolution mismatch at frame " + std::to_string(i));
      }
      for (size_t k = 0; k < fg.value.size(); ++k) {
        fg.value[k] = std::min(fg.value[k], extra.value[k]);
      }
    }
    sum += masked_ssim(pred[i], gt[i], fg);
  }
  return sum / static_cast<double>(gt.size());
}

}  // namespace trajpair
