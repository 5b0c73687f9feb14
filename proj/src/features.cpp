#include "mcvl/features.hpp"

#include <cmath>

namespace mcvl::features {

std::size_t grid_count(int image_extent, int region_width, int spacing) {
  if (image_extent < region_width) return 0;
  return static_cast<std::size_t>((image_extent - region_width) / spacing) + 1;
}

std::size_t descriptor_count(int width, int height, const FeatureConfig& cfg) {
  std::size_t m = 0;
  for (int w : cfg.region_widths) {
    m += grid_count(width, w, cfg.spacing) * grid_count(height, w, cfg.spacing);
  }
  return m;
}

namespace {

struct GradientField {
  std::vector<float> magnitude;
  std::vector<float> orientation;  // radians in [0, 2pi)
};

GradientField compute_gradients(const GrayImage& img) {
  const int w = img.width, h = img.height;
  GradientField g;
  g.magnitude.assign(static_cast<std::size_t>(w) * h, 0.0f);
  g.orientation.assign(static_cast<std::size_t>(w) * h, 0.0f);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float gx = 0.5f * (img.at(x + 1, y) - img.at(x - 1, y));
      const float gy = 0.5f * (img.at(x, y + 1) - img.at(x, y - 1));
      const float m = std::sqrt(gx * gx + gy * gy);
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      g.magnitude[idx] = m;
      if (m > 0.0f) {
        float th = std::atan2(gy, gx);
        if (th < 0.0f) th += 2.0f * static_cast<float>(M_PI);
        g.orientation[idx] = th;
      }
    }
  }
  return g;
}

// Gaussian window over region-local pixel offsets, sigma = width/2.
std::vector<float> gaussian_window(int width) {
  std::vector<float> win(static_cast<std::size_t>(width) * width);
  const float c = 0.5f * (width - 1);
  const float sigma = 0.5f * width;
  const float inv = 1.0f / (2.0f * sigma * sigma);
  for (int y = 0; y < width; ++y) {
    for (int x = 0; x < width; ++x) {
      const float dx = x - c, dy = y - c;
      win[static_cast<std::size_t>(y) * width + x] = std::exp(-(dx * dx + dy * dy) * inv);
    }
  }
  return win;
}

}  // namespace

DescriptorSet extract_dense(const GrayImage& img, const FeatureConfig& cfg) {
  if (descriptor_count(img.width, img.height, cfg) == 0) {
    throw ImageTooSmall("extract_dense: no region fits inside the image");
  }
  const int cells = cfg.cells;
  const int obins = cfg.orientation_bins;
  const std::size_t dim = static_cast<std::size_t>(cells) * cells * obins;

  DescriptorSet out;
  out.dim = dim;
  out.data.reserve(descriptor_count(img.width, img.height, cfg) * dim);
  out.keypoints.reserve(descriptor_count(img.width, img.height, cfg));

  const GradientField grad = compute_gradients(img);
  const float obin_scale = obins / (2.0f * static_cast<float>(M_PI));

  std::vector<float> hist(dim);
  for (int rw : cfg.region_widths) {
    const std::size_t nx = grid_count(img.width, rw, cfg.spacing);
    const std::size_t ny = grid_count(img.height, rw, cfg.spacing);
    if (nx == 0 || ny == 0) continue;
    const std::vector<float> win = gaussian_window(rw);
    const float cell = static_cast<float>(rw) / cells;
    for (std::size_t gy = 0; gy < ny; ++gy) {
      const int y0 = static_cast<int>(gy) * cfg.spacing;
      for (std::size_t gx = 0; gx < nx; ++gx) {
        const int x0 = static_cast<int>(gx) * cfg.spacing;
        std::fill(hist.begin(), hist.end(), 0.0f);
        for (int py = 0; py < rw; ++py) {
          const float* mrow = grad.magnitude.data() + static_cast<std::size_t>(y0 + py) * img.width + x0;
          const float* orow = grad.orientation.data() + static_cast<std::size_t>(y0 + py) * img.width + x0;
          const float* wrow = win.data() + static_cast<std::size_t>(py) * rw;
          const float cy = (py + 0.5f) / cell - 0.5f;
          const int iy = static_cast<int>(std::floor(cy));
          const float fy = cy - iy;
          for (int px = 0; px < rw; ++px) {
            const float m = mrow[px] * wrow[px];
            if (m == 0.0f) continue;
            const float cx = (px + 0.5f) / cell - 0.5f;
            const int ix = static_cast<int>(std::floor(cx));
            const float fx = cx - ix;
            const float ob = orow[px] * obin_scale;
            const int io = static_cast<int>(ob);  // orow in [0, 2pi)
            const float fo = ob - io;
            // Trilinear spread over 2 cells per spatial axis, 2 orientation bins.
            for (int dy = 0; dy < 2; ++dy) {
              const int ycell = iy + dy;
              if (ycell < 0 || ycell >= cells) continue;
              const float wy = dy ? fy : 1.0f - fy;
              for (int dx = 0; dx < 2; ++dx) {
                const int xcell = ix + dx;
                if (xcell < 0 || xcell >= cells) continue;
                const float wxy = m * wy * (dx ? fx : 1.0f - fx);
                float* base = hist.data() + (static_cast<std::size_t>(ycell) * cells + xcell) * obins;
                base[io % obins] += wxy * (1.0f - fo);
                base[(io + 1) % obins] += wxy * fo;
              }
            }
          }
        }
        out.data.insert(out.data.end(), hist.begin(), hist.end());
        out.keypoints.push_back({x0 + 0.5f * (rw - 1), y0 + 0.5f * (rw - 1),
                                 static_cast<float>(rw)});
      }
    }
  }
  return out;
}

void root_sift_inplace(DescriptorSet& ds) {
  const std::size_t m = ds.count();
  for (std::size_t i = 0; i < m; ++i) {
    root_sift_row(ds.data.data() + i * ds.dim, ds.dim);
  }
}

DescriptorSet root_sift(const DescriptorSet& ds) {
  DescriptorSet out = ds;
  root_sift_inplace(out);
  return out;
}

}  // namespace mcvl::features
