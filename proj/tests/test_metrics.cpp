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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "devafuse/metrics.hpp"
#include "oracles.hpp"

using namespace devafuse;
using namespace devafuse::testing;

namespace {

Segment Px(SegmentId id, int w, int h, std::vector<int> pixels, ClassId cls = 1) {
  Bitmap b(static_cast<size_t>(w * h), 0);
  for (int p : pixels) b[p] = 1;
  return Segment{id, BinaryMask::FromBitmap(w, h, b), cls, std::nullopt};
}

Segmentation Frame(int t, int w, int h, std::vector<Segment> segs) {
  Segmentation s = EmptySegmentation(t, w, h);
  s.segments = std::move(segs);
  Validate(s);
  return s;
}

// Dense reference: tube = set of (frame, pixel) per (id, class).
using Key = std::pair<SegmentId, ClassId>;
using Tubes = std::map<Key, std::set<std::pair<int, int>>>;

Tubes DenseTubes(const TrackedVideo& v, int begin, int end) {
  Tubes out;
  for (int t = begin; t < end; ++t) {
    for (const auto& s : v[t].segments) {
      const Bitmap b = Dense(s.mask);
      for (size_t p = 0; p < b.size(); ++p) {
        if (b[p]) out[{s.id, s.class_label.value_or(0)}].insert({t, static_cast<int>(p)});
      }
    }
  }
  return out;
}

std::optional<double> DensePq(const Tubes& pred, const Tubes& gt) {
  std::map<ClassId, double> iou_sum;
  std::map<ClassId, double> denom;
  std::set<Key> matched_p, matched_g;
  for (const auto& [pk, ps] : pred) {
    for (const auto& [gk, gs] : gt) {
      if (pk.second != gk.second) continue;
      size_t inter = 0;
      for (const auto& x : ps) inter += gs.count(x);
      const double iou = static_cast<double>(inter) /
                         static_cast<double>(ps.size() + gs.size() - inter);
      if (iou > 0.5) {
        iou_sum[gk.second] += iou;
        denom[gk.second] += 1.0;
        matched_p.insert(pk);
        matched_g.insert(gk);
      }
    }
  }
  for (const auto& [k, _] : pred) {
    if (!matched_p.count(k)) denom[k.second] += 0.5;
  }
  for (const auto& [k, _] : gt) {
    if (!matched_g.count(k)) denom[k.second] += 0.5;
  }
  if (denom.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& [c, d] : denom) total += iou_sum[c] / d;
  return total / static_cast<double>(denom.size());
}

std::optional<double> DenseVpq(const TrackedVideo& pred, const TrackedVideo& gt,
                               int window) {
  const int n = static_cast<int>(gt.size());
  const int k = (window == kWholeVideo || window > n) ? n : window;
  double sum = 0.0;
  int count = 0;
  for (int s = 0; s + k <= n; ++s) {
    if (auto pq = DensePq(DenseTubes(pred, s, s + k), DenseTubes(gt, s, s + k))) {
      sum += *pq;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

TrackedVideo RandomVideo(std::mt19937_64& rng, int frames, int w, int h) {
  TrackedVideo v;
  for (int t = 0; t < frames; ++t) v.push_back(RandomSegmentation(rng, t, w, h, 4, 2));
  return v;
}

// 2x2 frames, two columns; ids swap in the prediction at frame 1.
std::pair<TrackedVideo, TrackedVideo> IdSwitch() {
  TrackedVideo gt{Frame(0, 2, 2, {Px(1, 2, 2, {0, 2}), Px(2, 2, 2, {1, 3})}),
                  Frame(1, 2, 2, {Px(1, 2, 2, {0, 2}), Px(2, 2, 2, {1, 3})})};
  TrackedVideo pred{Frame(0, 2, 2, {Px(7, 2, 2, {0, 2}), Px(8, 2, 2, {1, 3})}),
                    Frame(1, 2, 2, {Px(8, 2, 2, {0, 2}), Px(7, 2, 2, {1, 3})})};
  return {pred, gt};
}

}  // namespace

TEST_CASE("golden: PQ with one TP at IoU 0.8 and one FP") {
  // 5x2 frame. GT: top row. Pred: 4 of its 5 pixels, plus a stray segment.
  const Segmentation gt = Frame(0, 5, 2, {Px(1, 5, 2, {0, 1, 2, 3, 4})});
  const Segmentation pred =
      Frame(0, 5, 2, {Px(1, 5, 2, {0, 1, 2, 3}), Px(2, 5, 2, {5, 6})});
  CHECK(std::abs(*PanopticQuality(pred, gt) - 0.8 / 1.5) < 1e-9);
}

TEST_CASE("golden: id switch on a 4-pixel 2-frame video") {
  const auto [pred, gt] = IdSwitch();
  const MetricReport r = Evaluate(pred, gt);
  CHECK(std::abs(*r.vpq.at(1) - 1.0) < 1e-9);
  // Tube IoU 2/6 for both pairings: no matches.
  CHECK(std::abs(*r.vpq.at(2) - 0.0) < 1e-9);
  CHECK(std::abs(*r.vpq.at(kWholeVideo) - 0.0) < 1e-9);
  // AQ = (1/4)(2/3 + 2/3) = 1/3; SQ = 1.
  CHECK(std::abs(r.stq.sq - 1.0) < 1e-9);
  CHECK(std::abs(r.stq.aq - 1.0 / 3.0) < 1e-9);
  CHECK(std::abs(r.stq.stq - std::sqrt(1.0 / 3.0)) < 1e-9);
  // Detection is perfect; every association has TPA 1, FPA 1, FNA 1.
  CHECK(std::abs(r.owta.det_re - 1.0) < 1e-9);
  CHECK(std::abs(r.owta.ass_a - 1.0 / 3.0) < 1e-9);
  CHECK(std::abs(r.owta.owta - std::sqrt(1.0 / 3.0)) < 1e-9);
}

TEST_CASE("golden: OWTA ignores unmatched predictions") {
  // GT a: pixel 0 in both frames; GT b: pixel 3 in frame 0 only.
  // Pred keeps a and adds a stray pixel in frame 1.
  const TrackedVideo gt{Frame(0, 2, 2, {Px(1, 2, 2, {0}), Px(2, 2, 2, {3})}),
                        Frame(1, 2, 2, {Px(1, 2, 2, {0})})};
  const TrackedVideo pred{Frame(0, 2, 2, {Px(5, 2, 2, {0})}),
                          Frame(1, 2, 2, {Px(5, 2, 2, {0}), Px(6, 2, 2, {1})})};
  const OwtaResult o = OpenWorldTrackingAccuracy(pred, gt);
  CHECK(std::abs(o.det_re - 2.0 / 3.0) < 1e-9);
  CHECK(std::abs(o.ass_a - 1.0) < 1e-9);
  CHECK(std::abs(o.owta - std::sqrt(2.0 / 3.0)) < 1e-9);
}

TEST_CASE("golden: STQ with a class error") {
  // 2x2, one frame: GT one class-1 object of 2 pixels; pred labels one of
  // them class 2. SQ over classes {1, 2}: (1/2 + 0) / 2. AQ: one GT track
  // split over two predicted tracks, (1/2)(1*1/2 + 1*1/2) = 1/2.
  const TrackedVideo gt{Frame(0, 2, 2, {Px(1, 2, 2, {0, 1})})};
  const TrackedVideo pred{Frame(0, 2, 2, {Px(1, 2, 2, {0}), Px(2, 2, 2, {1}, 2)})};
  const StqResult s = SegmentationTrackingQuality(pred, gt);
  CHECK(std::abs(s.sq - 0.25) < 1e-9);
  CHECK(std::abs(s.aq - 0.5) < 1e-9);
  CHECK(std::abs(s.stq - std::sqrt(0.125)) < 1e-9);
}

TEST_CASE("VPQ bar of published components") {
  const std::map<int, std::optional<double>> row{
      {1, 35.4}, {2, 30.8}, {4, 28.5}, {6, 27.0}, {8, 25.9}, {10, 24.9}, {kWholeVideo, 21.7}};
  CHECK(std::abs(*VpqBar(row) - 25.2) < 0.05);
  std::map<int, std::optional<double>> partial = row;
  partial.erase(6);
  CHECK_FALSE(VpqBar(partial).has_value());
}

TEST_CASE("PQ and VPQ agree with a dense reference") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 150; ++trial) {
    const int frames = 1 + trial % 5;
    const TrackedVideo gt = RandomVideo(rng, frames, 10, 8);
    TrackedVideo pred = RandomVideo(rng, frames, 10, 8);
    // Mix in near-copies so matches occur.
    for (int t = 0; t < frames; ++t) {
      if ((trial + t) % 2 == 0) pred[t] = gt[t];
    }
    for (int k : {1, 2, 3, kWholeVideo}) {
      const auto a = VideoPanopticQuality(pred, gt, k);
      const auto b = DenseVpq(pred, gt, k);
      REQUIRE(a.has_value() == b.has_value());
      if (a) CHECK(std::abs(*a - *b) < 1e-12);
    }
    const auto pq = MeanFramePq(pred, gt);
    const auto v1 = VideoPanopticQuality(pred, gt, 1);
    REQUIRE(pq.has_value() == v1.has_value());
    if (pq) CHECK(std::abs(*pq - *v1) < 1e-12);
  }
}

TEST_CASE("perfect tracks score one at every window") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    TrackedVideo gt = RandomVideo(rng, 6, 12, 9);
    bool any = false;
    for (const auto& f : gt) any = any || !f.segments.empty();
    if (!any) continue;
    const MetricReport r = Evaluate(gt, gt);
    for (const auto& [k, v] : r.vpq) {
      if (v) CHECK(*v == doctest::Approx(1.0));
    }
    CHECK(r.stq.stq == doctest::Approx(1.0));
    CHECK(r.owta.owta == doctest::Approx(1.0));
  }
}

TEST_CASE("VPQ does not increase with k under periodic id switches") {
  for (int period = 1; period <= 3; ++period) {
    for (int n : {6, 12, 13}) {
      TrackedVideo gt, pred;
      for (int t = 0; t < n; ++t) {
        gt.push_back(Frame(t, 4, 2, {Px(1, 4, 2, {0, 1, 4, 5}), Px(2, 4, 2, {2, 3, 6, 7})}));
        const bool swapped = (t / period) % 2 == 1;
        pred.push_back(Frame(t, 4, 2,
                             {Px(swapped ? 4 : 3, 4, 2, {0, 1, 4, 5}),
                              Px(swapped ? 3 : 4, 4, 2, {2, 3, 6, 7})}));
      }
      double prev = 2.0;
      for (int k : {1, 2, 4, 6, 8, 10, kWholeVideo}) {
        const double v = *VideoPanopticQuality(pred, gt, k);
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
      CHECK(*VideoPanopticQuality(pred, gt, 1) == 1.0);
      CHECK(*VideoPanopticQuality(pred, gt, kWholeVideo) < 1.0);
    }
  }
}

TEST_CASE("empty inputs leave metrics undefined") {
  const TrackedVideo empty{EmptySegmentation(0, 4, 4)};
  const MetricReport r = Evaluate(empty, empty);
  CHECK_FALSE(r.pq.has_value());
  CHECK_FALSE(r.vpq_bar.has_value());
  CHECK_THROWS(VideoPanopticQuality(empty, empty, -1));
}
