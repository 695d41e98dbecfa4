// Copyright 2026 The devafuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "devafuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "devafuse/assignment.hpp"

namespace devafuse {
namespace {

// A tube is one track of one class.
struct TubeKey {
  SegmentId id = 0;
  ClassId cls = 0;
  auto operator<=>(const TubeKey&) const = default;
};

// Stuff regions get ids that cannot collide with track ids.
constexpr SegmentId kStuffIdBase = std::numeric_limits<SegmentId>::min() / 2;

struct Item {
  TubeKey key;
  BinaryMask mask;
};

std::vector<Item> Normalize(const Segmentation& seg,
                            const MetricOptions& options) {
  std::vector<Item> items;
  std::map<ClassId, BinaryMask> stuff;
  for (const auto& s : seg.segments) {
    if (s.mask.empty()) continue;
    const ClassId cls = s.class_label.value_or(0);
    if (options.stuff_classes.count(cls) != 0) {
      auto [it, inserted] = stuff.try_emplace(cls, s.mask);
      if (!inserted) it->second = Union(it->second, s.mask);
      continue;
    }
    items.push_back(Item{TubeKey{s.id, cls}, s.mask});
  }
  for (auto& [cls, mask] : stuff) {
    items.push_back(Item{TubeKey{kStuffIdBase + cls, cls}, std::move(mask)});
  }
  return items;
}

// Areas and pairwise intersections of one frame.
struct FrameStats {
  std::vector<TubeKey> pred_keys;
  std::vector<int64_t> pred_area;
  std::vector<TubeKey> gt_keys;
  std::vector<int64_t> gt_area;
  std::map<std::pair<int, int>, int64_t> inter;  // (pred idx, gt idx)
};

FrameStats ComputeFrameStats(const Segmentation& pred, const Segmentation& gt,
                             const MetricOptions& options) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw std::invalid_argument("prediction and ground truth differ in size");
  }
  const auto p_items = Normalize(pred, options);
  const auto g_items = Normalize(gt, options);
  FrameStats st;
  const size_t pixels = static_cast<size_t>(gt.width) * gt.height;
  std::vector<int32_t> owner(pixels, -1);
  for (size_t i = 0; i < p_items.size(); ++i) {
    st.pred_keys.push_back(p_items[i].key);
    st.pred_area.push_back(p_items[i].mask.area());
    p_items[i].mask.ForEachSpan([&](int64_t start, int64_t len) {
      std::fill_n(owner.begin() + start, len, static_cast<int32_t>(i));
    });
  }
  for (size_t j = 0; j < g_items.size(); ++j) {
    st.gt_keys.push_back(g_items[j].key);
    st.gt_area.push_back(g_items[j].mask.area());
    g_items[j].mask.ForEachSpan([&](int64_t start, int64_t len) {
      for (int64_t k = start; k < start + len; ++k) {
        if (owner[k] >= 0) ++st.inter[{owner[k], static_cast<int>(j)}];
      }
    });
  }
  return st;
}

std::vector<FrameStats> ComputeVideoStats(const TrackedVideo& pred,
                                          const TrackedVideo& gt,
                                          const MetricOptions& options) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("prediction has " +
                                std::to_string(pred.size()) +
                                " frames, ground truth " +
                                std::to_string(gt.size()));
  }
  std::vector<FrameStats> stats;
  stats.reserve(gt.size());
  for (size_t t = 0; t < gt.size(); ++t) {
    stats.push_back(ComputeFrameStats(pred[t], gt[t], options));
  }
  return stats;
}

// Tube areas and intersections accumulated over a window.
struct TubeStats {
  std::map<TubeKey, int64_t> pred_area;
  std::map<TubeKey, int64_t> gt_area;
  std::map<std::pair<TubeKey, TubeKey>, int64_t> inter;

  void Add(const FrameStats& f) {
    for (size_t i = 0; i < f.pred_keys.size(); ++i) {
      pred_area[f.pred_keys[i]] += f.pred_area[i];
    }
    for (size_t j = 0; j < f.gt_keys.size(); ++j) {
      gt_area[f.gt_keys[j]] += f.gt_area[j];
    }
    for (const auto& [ij, n] : f.inter) {
      inter[{f.pred_keys[ij.first], f.gt_keys[ij.second]}] += n;
    }
  }
};

std::optional<double> PqFromTubes(const TubeStats& st) {
  struct ClassAcc {
    double iou_sum = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
  };
  std::map<ClassId, ClassAcc> classes;
  std::set<TubeKey> matched_pred, matched_gt;
  for (const auto& [pg, n] : st.inter) {
    const auto& [p, g] = pg;
    if (p.cls != g.cls) continue;
    const int64_t uni = st.pred_area.at(p) + st.gt_area.at(g) - n;
    const double iou = static_cast<double>(n) / static_cast<double>(uni);
    if (iou <= 0.5) continue;
    auto& acc = classes[g.cls];
    acc.iou_sum += iou;
    ++acc.tp;
    matched_pred.insert(p);
    matched_gt.insert(g);
  }
  for (const auto& [p, area] : st.pred_area) {
    if (area > 0 && matched_pred.count(p) == 0) ++classes[p.cls].fp;
  }
  for (const auto& [g, area] : st.gt_area) {
    if (area > 0 && matched_gt.count(g) == 0) ++classes[g.cls].fn;
  }
  if (classes.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& [cls, acc] : classes) {
    const double denom = acc.tp + 0.5 * acc.fp + 0.5 * acc.fn;
    total += denom > 0.0 ? acc.iou_sum / denom : 0.0;
  }
  return total / static_cast<double>(classes.size());
}

std::optional<double> WindowedPq(const std::vector<FrameStats>& stats,
                                 int window) {
  const int n = static_cast<int>(stats.size());
  if (window < 0) throw std::invalid_argument("window must be >= 0");
  if (n == 0) return std::nullopt;
  const int k = (window == kWholeVideo || window > n) ? n : window;
  double sum = 0.0;
  int count = 0;
  for (int start = 0; start + k <= n; ++start) {
    TubeStats tubes;
    for (int t = start; t < start + k; ++t) tubes.Add(stats[t]);
    if (auto pq = PqFromTubes(tubes)) {
      sum += *pq;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

StqResult StqFromStats(const std::vector<FrameStats>& stats,
                       const MetricOptions& options) {
  // Semantic IoU per class over the whole video.
  std::map<ClassId, int64_t> cls_inter, cls_pred, cls_gt;
  std::map<TubeKey, int64_t> pred_area, gt_area;
  std::map<std::pair<TubeKey, TubeKey>, int64_t> inter;
  for (const auto& f : stats) {
    for (size_t i = 0; i < f.pred_keys.size(); ++i) {
      cls_pred[f.pred_keys[i].cls] += f.pred_area[i];
      pred_area[f.pred_keys[i]] += f.pred_area[i];
    }
    for (size_t j = 0; j < f.gt_keys.size(); ++j) {
      cls_gt[f.gt_keys[j].cls] += f.gt_area[j];
      gt_area[f.gt_keys[j]] += f.gt_area[j];
    }
    for (const auto& [ij, n] : f.inter) {
      const TubeKey& p = f.pred_keys[ij.first];
      const TubeKey& g = f.gt_keys[ij.second];
      if (p.cls == g.cls) cls_inter[p.cls] += n;
      inter[{p, g}] += n;
    }
  }
  std::set<ClassId> all_classes;
  for (const auto& [c, _] : cls_pred) all_classes.insert(c);
  for (const auto& [c, _] : cls_gt) all_classes.insert(c);
  double sq_sum = 0.0;
  int sq_count = 0;
  for (ClassId c : all_classes) {
    const int64_t i = cls_inter[c];
    const int64_t u = cls_pred[c] + cls_gt[c] - i;
    if (u <= 0) continue;
    sq_sum += static_cast<double>(i) / static_cast<double>(u);
    ++sq_count;
  }
  StqResult r;
  r.sq = sq_count > 0 ? sq_sum / sq_count : 1.0;

  auto is_thing = [&](const TubeKey& k) {
    return options.stuff_classes.count(k.cls) == 0;
  };
  std::map<TubeKey, double> per_gt;
  size_t gt_tracks = 0;
  size_t pred_tracks = 0;
  for (const auto& [g, area] : gt_area) {
    if (is_thing(g) && area > 0) ++gt_tracks;
  }
  for (const auto& [p, area] : pred_area) {
    if (is_thing(p) && area > 0) ++pred_tracks;
  }
  for (const auto& [pg, tpa] : inter) {
    const auto& [p, g] = pg;
    if (!is_thing(p) || !is_thing(g) || tpa == 0) continue;
    const double iou = static_cast<double>(tpa) /
                       static_cast<double>(pred_area[p] + gt_area[g] - tpa);
    per_gt[g] += static_cast<double>(tpa) * iou;
  }
  if (gt_tracks == 0) {
    r.aq = pred_tracks == 0 ? 1.0 : 0.0;
  } else {
    double aq_sum = 0.0;
    for (const auto& [g, acc] : per_gt) {
      aq_sum += acc / static_cast<double>(gt_area[g]);
    }
    r.aq = aq_sum / static_cast<double>(gt_tracks);
  }
  r.stq = std::sqrt(r.aq * r.sq);
  return r;
}

}  // namespace

std::optional<double> PanopticQuality(const Segmentation& pred,
                                      const Segmentation& gt,
                                      const MetricOptions& options) {
  TubeStats tubes;
  tubes.Add(ComputeFrameStats(pred, gt, options));
  return PqFromTubes(tubes);
}

std::optional<double> MeanFramePq(const TrackedVideo& pred,
                                  const TrackedVideo& gt,
                                  const MetricOptions& options) {
  const auto stats = ComputeVideoStats(pred, gt, options);
  double sum = 0.0;
  int count = 0;
  for (const auto& f : stats) {
    TubeStats tubes;
    tubes.Add(f);
    if (auto pq = PqFromTubes(tubes)) {
      sum += *pq;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

std::optional<double> VideoPanopticQuality(const TrackedVideo& pred,
                                           const TrackedVideo& gt, int window,
                                           const MetricOptions& options) {
  return WindowedPq(ComputeVideoStats(pred, gt, options), window);
}

std::optional<double> VpqBar(const std::map<int, std::optional<double>>& vpq) {
  double windowed = 0.0;
  for (int k : {1, 2, 4, 6, 8, 10}) {
    auto it = vpq.find(k);
    if (it == vpq.end() || !it->second) return std::nullopt;
    windowed += *it->second;
  }
  auto whole = vpq.find(kWholeVideo);
  if (whole == vpq.end() || !whole->second) return std::nullopt;
  return 0.5 * *whole->second + 0.5 * (windowed / 6.0);
}

StqResult SegmentationTrackingQuality(const TrackedVideo& pred,
                                      const TrackedVideo& gt,
                                      const MetricOptions& options) {
  return StqFromStats(ComputeVideoStats(pred, gt, options), options);
}

OwtaResult OpenWorldTrackingAccuracy(const TrackedVideo& pred,
                                     const TrackedVideo& gt) {
  const auto stats = ComputeVideoStats(pred, gt, MetricOptions{});
  // Dense track indices, class-agnostic.
  std::map<SegmentId, int> gt_index, pred_index;
  for (const auto& f : stats) {
    for (const auto& k : f.gt_keys) gt_index.try_emplace(k.id, 0);
    for (const auto& k : f.pred_keys) pred_index.try_emplace(k.id, 0);
  }
  int next = 0;
  for (auto& [id, idx] : gt_index) idx = next++;
  next = 0;
  for (auto& [id, idx] : pred_index) idx = next++;
  const size_t ng = gt_index.size();
  const size_t np = pred_index.size();

  // IoU matrix of one frame, rows = gt present, cols = pred present.
  auto similarity = [](const FrameStats& f) {
    std::vector<std::vector<double>> sim(
        f.gt_keys.size(), std::vector<double>(f.pred_keys.size(), 0.0));
    for (const auto& [ij, n] : f.inter) {
      const auto [i, j] = ij;
      const int64_t uni = f.pred_area[i] + f.gt_area[j] - n;
      sim[j][i] = static_cast<double>(n) / static_cast<double>(uni);
    }
    return sim;
  };

  std::vector<std::vector<double>> potential(ng, std::vector<double>(np, 0.0));
  std::vector<double> gt_count(ng, 0.0), pred_count(np, 0.0);
  for (const auto& f : stats) {
    const auto sim = similarity(f);
    const size_t rows = f.gt_keys.size();
    const size_t cols = f.pred_keys.size();
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) {
        row_sum[r] += sim[r][c];
        col_sum[c] += sim[r][c];
      }
    }
    for (size_t r = 0; r < rows; ++r) {
      const int g = gt_index.at(f.gt_keys[r].id);
      gt_count[g] += 1.0;
      for (size_t c = 0; c < cols; ++c) {
        const double denom = row_sum[r] + col_sum[c] - sim[r][c];
        if (denom > std::numeric_limits<double>::epsilon()) {
          potential[g][pred_index.at(f.pred_keys[c].id)] += sim[r][c] / denom;
        }
      }
    }
    for (size_t c = 0; c < cols; ++c) {
      pred_count[pred_index.at(f.pred_keys[c].id)] += 1.0;
    }
  }
  std::vector<std::vector<double>> alignment(ng, std::vector<double>(np, 0.0));
  for (size_t g = 0; g < ng; ++g) {
    for (size_t p = 0; p < np; ++p) {
      const double denom = gt_count[g] + pred_count[p] - potential[g][p];
      alignment[g][p] = denom > 0.0 ? potential[g][p] / denom : 0.0;
    }
  }

  std::vector<double> alphas;
  for (int a = 1; a <= 19; ++a) alphas.push_back(0.05 * a);
  const size_t na = alphas.size();
  std::vector<double> tp(na, 0.0), fn(na, 0.0);
  std::vector<std::vector<std::vector<double>>> matches(
      na, std::vector<std::vector<double>>(ng, std::vector<double>(np, 0.0)));
  for (const auto& f : stats) {
    const size_t rows = f.gt_keys.size();
    const size_t cols = f.pred_keys.size();
    if (rows == 0) continue;
    if (cols == 0) {
      for (size_t a = 0; a < na; ++a) fn[a] += static_cast<double>(rows);
      continue;
    }
    const auto sim = similarity(f);
    std::vector<std::vector<double>> score(rows, std::vector<double>(cols));
    for (size_t r = 0; r < rows; ++r) {
      const int g = gt_index.at(f.gt_keys[r].id);
      for (size_t c = 0; c < cols; ++c) {
        score[r][c] =
            alignment[g][pred_index.at(f.pred_keys[c].id)] * sim[r][c];
      }
    }
    const auto assignment = SolveMaxAssignment(score);
    for (size_t a = 0; a < na; ++a) {
      double matched = 0.0;
      for (size_t r = 0; r < rows; ++r) {
        const int c = assignment[r];
        if (c < 0) continue;
        if (sim[r][c] < alphas[a] - std::numeric_limits<double>::epsilon()) {
          continue;
        }
        matched += 1.0;
        matches[a][gt_index.at(f.gt_keys[r].id)]
               [pred_index.at(f.pred_keys[c].id)] += 1.0;
      }
      tp[a] += matched;
      fn[a] += static_cast<double>(rows) - matched;
    }
  }

  OwtaResult out;
  for (size_t a = 0; a < na; ++a) {
    double ass = 0.0;
    for (size_t g = 0; g < ng; ++g) {
      for (size_t p = 0; p < np; ++p) {
        const double m = matches[a][g][p];
        if (m == 0.0) continue;
        ass += m * m / std::max(1.0, gt_count[g] + pred_count[p] - m);
      }
    }
    const double ass_a = ass / std::max(1.0, tp[a]);
    const double det_re = tp[a] / std::max(1.0, tp[a] + fn[a]);
    out.ass_a += ass_a;
    out.det_re += det_re;
    out.owta += std::sqrt(det_re * ass_a);
  }
  out.ass_a /= static_cast<double>(na);
  out.det_re /= static_cast<double>(na);
  out.owta /= static_cast<double>(na);
  return out;
}

MetricReport Evaluate(const TrackedVideo& pred, const TrackedVideo& gt,
                      const std::vector<int>& windows,
                      const MetricOptions& options) {
  const auto stats = ComputeVideoStats(pred, gt, options);
  MetricReport report;
  report.pq = WindowedPq(stats, 1);
  for (int k : windows) report.vpq[k] = WindowedPq(stats, k);
  report.vpq_bar = VpqBar(report.vpq);
  report.stq = StqFromStats(stats, options);
  report.owta = OpenWorldTrackingAccuracy(pred, gt);
  return report;
}

}  // namespace devafuse
