#include "gpcam/undistort.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace gpcam {

namespace {

int thread_count() {
  if (const char* env = std::getenv("GP_PINHOLE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int begin, int end, const std::function<void(int, int)>& fn) {
  const int n = end - begin;
  const int threads = std::min(thread_count(), std::max(n, 1));
  if (threads <= 1 || n < 2) {
    fn(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(lo + chunk, end);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

UndistortResult undistort_image(const VirtualCameraMap& map,
                                const RasterImage& src,
                                const UndistortOptions& opts) {
  if (!src.valid()) throw Error("undistort_image: malformed source raster");
  if (!(opts.scale > 0)) throw Error("undistort_image: scale must be > 0");

  // Frame: the reference lattice bounding box plus a margin.
  const double ext_x = map.reference_cols() - 1;
  const double ext_y = map.reference_rows() - 1;
  const double origin_x = -opts.margin * ext_x;
  const double origin_y = -opts.margin * ext_y;
  const int out_w =
      static_cast<int>(std::ceil(ext_x * (1 + 2 * opts.margin) * opts.scale)) +
      1;
  const int out_h =
      static_cast<int>(std::ceil(ext_y * (1 + 2 * opts.margin) * opts.scale)) +
      1;

  const int ch = src.channels;
  const size_t n_out = static_cast<size_t>(out_w) * out_h;
  std::vector<double> acc(n_out * ch, 0.0);
  std::vector<int> count(n_out, 0);
  std::vector<double> min_sigma(n_out, std::numeric_limits<double>::infinity());

  // Forward map in row blocks; each block is a batched GP prediction.
  std::mutex merge_mutex;
  // Cap the rows per GP batch so the kernel matrices stay small.
  const int max_rows = std::max(1, 65536 / src.width);
  parallel_for(0, src.height, [&](int range_lo, int range_hi) {
    for (int row_lo = range_lo; row_lo < range_hi; row_lo += max_rows) {
      const int row_hi = std::min(row_lo + max_rows, range_hi);
      const int rows = row_hi - row_lo;
      geometry::Points2 uv(static_cast<Eigen::Index>(rows) * src.width, 2);
      for (int y = row_lo; y < row_hi; ++y)
        for (int x = 0; x < src.width; ++x) {
          const Eigen::Index i =
              static_cast<Eigen::Index>(y - row_lo) * src.width + x;
          uv(i, 0) = x + 0.5;
          uv(i, 1) = y + 0.5;
        }
      const MappedPoints mapped = map.map_points(uv);

      std::lock_guard<std::mutex> lock(merge_mutex);
      for (int y = row_lo; y < row_hi; ++y)
        for (int x = 0; x < src.width; ++x) {
          const Eigen::Index i =
              static_cast<Eigen::Index>(y - row_lo) * src.width + x;
          const long ox = std::lround((mapped.xy(i, 0) - origin_x) * opts.scale);
          const long oy = std::lround((mapped.xy(i, 1) - origin_y) * opts.scale);
          if (ox < 0 || ox >= out_w || oy < 0 || oy >= out_h) continue;
          const size_t o = static_cast<size_t>(oy) * out_w + ox;
          for (int c = 0; c < ch; ++c) acc[o * ch + c] += src.at(x, y, c);
          ++count[o];
          min_sigma[o] = std::min(min_sigma[o], mapped.sigma[i]);
        }
    }
  });

  UndistortResult res;
  res.image = RasterImage::create(out_w, out_h, ch, 0);
  res.coverage_mask = RasterImage::create(out_w, out_h, 1, 0);
  for (size_t o = 0; o < n_out; ++o) {
    if (count[o] == 0) continue;
    ++res.covered_count;
    for (int c = 0; c < ch; ++c)
      res.image.data[o * ch + c] = static_cast<std::uint8_t>(
          std::clamp(acc[o * ch + c] / count[o], 0.0, 255.0));
    res.coverage_mask.data[o] = 255;
  }
  if (res.covered_count == 0)
    throw EmptyOutput("undistort_image: no source pixel lands in the output "
                      "frame (bad scale?)");

  // Interior = between written pixels both along its row and its column.
  std::vector<int> row_first(out_h, out_w), row_last(out_h, -1);
  std::vector<int> col_first(out_w, out_h), col_last(out_w, -1);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x)
      if (count[static_cast<size_t>(y) * out_w + x] > 0) {
        row_first[y] = std::min(row_first[y], x);
        row_last[y] = std::max(row_last[y], x);
        col_first[x] = std::min(col_first[x], y);
        col_last[x] = std::max(col_last[x], y);
      }
  auto interior = [&](int x, int y) {
    return x >= row_first[y] && x <= row_last[y] && y >= col_first[x] &&
           y <= col_last[x];
  };

  // Iterated median fill over interior holes.
  std::vector<bool> filled(n_out, false);
  for (size_t o = 0; o < n_out; ++o) filled[o] = count[o] > 0;
  const int rad = std::max(opts.fill_window_radius, 1);
  while (true) {
    struct Fill {
      size_t o;
      std::array<std::uint8_t, 3> value;
      double sigma;
    };
    std::vector<Fill> batch;
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) {
        const size_t o = static_cast<size_t>(y) * out_w + x;
        if (filled[o] || !interior(x, y)) continue;
        std::array<std::vector<std::uint8_t>, 3> neigh;
        double sig = std::numeric_limits<double>::infinity();
        for (int dy = -rad; dy <= rad; ++dy)
          for (int dx = -rad; dx <= rad; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= out_w || ny < 0 || ny >= out_h) continue;
            const size_t no = static_cast<size_t>(ny) * out_w + nx;
            if (!filled[no]) continue;
            for (int c = 0; c < ch; ++c)
              neigh[static_cast<size_t>(c)].push_back(
                  res.image.data[no * ch + c]);
            sig = std::min(sig, min_sigma[no]);
          }
        if (neigh[0].empty()) continue;
        Fill f;
        f.o = o;
        f.sigma = sig;
        for (int c = 0; c < ch; ++c) {
          auto& v = neigh[static_cast<size_t>(c)];
          std::sort(v.begin(), v.end());
          f.value[static_cast<size_t>(c)] = v[(v.size() - 1) / 2];
        }
        batch.push_back(f);
      }
    if (batch.empty()) break;
    for (const Fill& f : batch) {
      filled[f.o] = true;
      for (int c = 0; c < ch; ++c)
        res.image.data[f.o * ch + c] = f.value[static_cast<size_t>(c)];
      res.coverage_mask.data[f.o] = 255;
      min_sigma[f.o] = f.sigma;
    }
  }
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const size_t o = static_cast<size_t>(y) * out_w + x;
      if (!filled[o] && interior(x, y)) ++res.hole_count;
    }

  if (opts.sigma_threshold) {
    for (size_t o = 0; o < n_out; ++o) {
      if (!filled[o]) continue;
      if (min_sigma[o] > *opts.sigma_threshold) {
        res.coverage_mask.data[o] = 0;
        for (int c = 0; c < ch; ++c) res.image.data[o * ch + c] = 0;
      }
    }
  }
  return res;
}

std::vector<geometry::Points2> sample_edges(const RasterImage& img,
                                            double threshold) {
  const RasterImage g = img.to_gray();

  struct EdgePoint {
    double along;   // coordinate along the scan line
    double across;  // scan-line index
  };

  // Transition points with non-maximum suppression along the scan.
  auto scan = [&](bool horizontal) {
    const int n_lines = horizontal ? g.height : g.width;
    const int len = horizontal ? g.width : g.height;
    std::vector<std::vector<EdgePoint>> lines(static_cast<size_t>(n_lines));
    for (int line = 0; line < n_lines; ++line) {
      std::vector<double> diff(static_cast<size_t>(len - 1));
      for (int i = 0; i + 1 < len; ++i) {
        const int a = horizontal ? g.at(i, line) : g.at(line, i);
        const int b = horizontal ? g.at(i + 1, line) : g.at(line, i + 1);
        diff[static_cast<size_t>(i)] = std::abs(b - a);
      }
      for (int i = 0; i + 1 < len; ++i) {
        const double d = diff[static_cast<size_t>(i)];
        if (d <= threshold) continue;
        if (i > 0 && diff[static_cast<size_t>(i - 1)] > d) continue;
        if (i + 2 < len && diff[static_cast<size_t>(i + 1)] >= d) continue;
        lines[static_cast<size_t>(line)].push_back(
            {i + 0.5, static_cast<double>(line)});
      }
    }
    return lines;
  };

  std::vector<geometry::Points2> chains;
  auto chain = [&](const std::vector<std::vector<EdgePoint>>& lines,
                   bool horizontal) {
    // Greedy linking to the nearest point on the next scan line.
    std::vector<std::vector<EdgePoint>> open, done;
    for (const auto& line : lines) {
      std::vector<bool> used(line.size(), false);
      std::vector<std::vector<EdgePoint>> still_open;
      for (auto& c : open) {
        const double want = c.back().along;
        int best = -1;
        double best_d = 1.6;
        for (size_t i = 0; i < line.size(); ++i) {
          if (used[i]) continue;
          const double d = std::abs(line[i].along - want);
          if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
          }
        }
        if (best >= 0) {
          used[static_cast<size_t>(best)] = true;
          c.push_back(line[static_cast<size_t>(best)]);
          still_open.push_back(std::move(c));
        } else {
          done.push_back(std::move(c));
        }
      }
      for (size_t i = 0; i < line.size(); ++i)
        if (!used[i]) still_open.push_back({line[i]});
      open = std::move(still_open);
    }
    for (auto& c : open) done.push_back(std::move(c));

    for (const auto& c : done) {
      if (c.size() < 5) continue;
      geometry::Points2 pts(static_cast<Eigen::Index>(c.size()), 2);
      for (size_t i = 0; i < c.size(); ++i) {
        const double x = horizontal ? c[i].along : c[i].across;
        const double y = horizontal ? c[i].across : c[i].along;
        pts(static_cast<Eigen::Index>(i), 0) = x;
        pts(static_cast<Eigen::Index>(i), 1) = y;
      }
      chains.push_back(std::move(pts));
    }
  };

  chain(scan(true), true);
  chain(scan(false), false);
  return chains;
}

}  // namespace gpcam
