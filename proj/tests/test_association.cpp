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

#include "devafuse/assignment.hpp"
#include "devafuse/association.hpp"
#include "oracles.hpp"

using namespace devafuse;
using namespace devafuse::testing;

namespace {

Segment Seg(SegmentId id, int x0, int y0, int x1, int y1,
            std::optional<ClassId> cls = std::nullopt) {
  return Segment{id, BinaryMask::FromBox(20, 20, devafuse::Box{x0, y0, x1, y1}), cls,
                 std::nullopt};
}

Segmentation Frame(int t, std::vector<Segment> segs) {
  Segmentation s = EmptySegmentation(t, 20, 20);
  s.segments = std::move(segs);
  Validate(s);
  return s;
}

}  // namespace

TEST_CASE("hungarian matches brute force on random matrices") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 6, m = 1 + (trial / 6) % 6;
    std::vector<std::vector<double>> score(n, std::vector<double>(m));
    for (auto& row : score) {
      for (double& x : row) x = u(rng);
    }
    const auto assign = SolveMaxAssignment(score);
    double total = 0.0;
    std::set<int> cols;
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
      if (assign[i] < 0) continue;
      ++assigned;
      CHECK(cols.insert(assign[i]).second);
      total += score[i][assign[i]];
    }
    CHECK(assigned == std::min(n, m));
    CHECK(total == doctest::Approx(BruteForceMaxMatching(score)).epsilon(1e-12));
  }
}

TEST_CASE("greedy matching is optimal on disjoint segmentations") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    const Segmentation r = RandomSegmentation(rng, 0, 24, 18, 6);
    const Segmentation c = RandomSegmentation(rng, 0, 24, 18, 6);
    const Association a = MatchSegments(r, c);
    double greedy = 0.0;
    for (const auto& [i, j] : a.pairs) greedy += Iou(r.segments[i].mask, c.segments[j].mask);

    std::vector<std::vector<double>> score(r.segments.size(),
                                           std::vector<double>(c.segments.size()));
    for (size_t i = 0; i < r.segments.size(); ++i) {
      int above = 0;
      for (size_t j = 0; j < c.segments.size(); ++j) {
        const double iou = Iou(r.segments[i].mask, c.segments[j].mask);
        score[i][j] = iou > 0.5 ? iou : 0.0;
        above += iou > 0.5;
      }
      CHECK(above <= 1);
    }
    CHECK(greedy == doctest::Approx(BruteForceMaxMatching(score)).epsilon(1e-12));
    CHECK(a.pairs.size() + a.unmatched_r.size() == r.segments.size());
    CHECK(a.pairs.size() + a.unmatched_c.size() == c.segments.size());
  }
}

TEST_CASE("match requires IoU strictly above the threshold") {
  // IoU exactly 0.5: 8 shared pixels out of 16.
  const Segmentation r = Frame(0, {Seg(1, 0, 0, 4, 3)});
  const Segmentation c = Frame(0, {Seg(1, 0, 1, 4, 4)});
  CHECK(Iou(r.segments[0].mask, c.segments[0].mask) == 0.5);
  CHECK(MatchSegments(r, c).pairs.empty());
}

TEST_CASE("class vote: majority, ties go to the latest label") {
  CHECK_FALSE(VoteClass({}).has_value());
  CHECK(VoteClass({1, 2, 2}) == 2);
  CHECK(VoteClass({1, 2}) == 2);
  CHECK(VoteClass({2, 1}) == 1);
  CHECK(VoteClass({3, 3, 1, 1}) == 1);
  CHECK(VoteClass({3, 1, 1, 3}) == 3);
}

TEST_CASE("merge: union under the propagated id, pass-through and new tracks") {
  TrackTable tracks;
  const SegmentId a = tracks.Create(0, 1, std::nullopt).track_id;
  const SegmentId b = tracks.Create(0, 2, std::nullopt).track_id;
  const Segmentation r = Frame(5, {Seg(a, 0, 0, 6, 6), Seg(b, 10, 10, 14, 14)});
  const Segmentation c = Frame(5, {Seg(1, 1, 0, 7, 6, 1), Seg(2, 15, 0, 19, 4, 3)});
  const Association assoc = MatchSegments(r, c);
  REQUIRE(assoc.pairs.size() == 1);
  const MergeResult m = Merge(r, c, assoc, tracks);
  CHECK(IsValid(m.merged));
  REQUIRE(m.merged.segments.size() == 3);
  const Segment* sa = m.merged.Find(a);
  REQUIRE(sa != nullptr);
  CHECK(sa->mask == BinaryMask::FromBox(20, 20, devafuse::Box{0, 0, 7, 6}));
  CHECK(m.merged.Find(b) != nullptr);
  REQUIRE(m.new_tracks.size() == 1);
  CHECK(m.new_tracks[0] == 3);
  CHECK(tracks.Find(3)->label == 3);
  CHECK(tracks.Find(3)->birth_frame == 5);

  TrackTable t2;
  t2.Create(0, 1, std::nullopt);
  t2.Create(0, 2, std::nullopt);
  MergeOptions drop;
  drop.drop_unmatched_propagated = true;
  const MergeResult d = Merge(r, c, assoc, t2, drop);
  CHECK(d.merged.Find(b) == nullptr);
}

TEST_CASE("majority label change re-keys the track") {
  TrackTable tracks;
  const SegmentId a = tracks.Create(0, 1, std::nullopt).track_id;
  const Segmentation r = Frame(5, {Seg(a, 0, 0, 6, 6)});
  const Segmentation c = Frame(5, {Seg(1, 0, 0, 6, 6, 2)});
  // Votes {1, 2}: tie goes to 2, the latest, so the label flips.
  const MergeResult m = Merge(r, c, MatchSegments(r, c), tracks);
  REQUIRE(m.rekeyed.size() == 1);
  CHECK(m.rekeyed[0].first == a);
  const SegmentId fresh = m.rekeyed[0].second;
  CHECK(fresh != a);
  CHECK(tracks.Find(a) == nullptr);
  CHECK(tracks.Find(fresh)->label == 2);
  CHECK(m.merged.segments[0].id == fresh);

  // Same label again: no re-key.
  const Segmentation r2 = Frame(10, {Seg(fresh, 0, 0, 6, 6)});
  const MergeResult m2 = Merge(r2, c, MatchSegments(r2, c), tracks);
  CHECK(m2.rekeyed.empty());
  CHECK(m2.merged.segments[0].id == fresh);
}

TEST_CASE("lifecycle: reset on match, delete at the limit") {
  TrackTable tracks;
  const SegmentId a = tracks.Create(0, 1, std::nullopt).track_id;
  const SegmentId b = tracks.Create(0, 1, std::nullopt).track_id;
  for (int k = 1; k <= 4; ++k) {
    const auto r = UpdateLifecycle(tracks, {b}, 5);
    CHECK(r.deleted.empty());
    CHECK(tracks.Find(a)->cnt == k);
    CHECK(tracks.Find(b)->cnt == 0);
  }
  UpdateLifecycle(tracks, {a}, 5);
  CHECK(tracks.Find(a)->cnt == 0);
  CHECK(tracks.Find(b)->cnt == 1);
  for (int k = 1; k <= 3; ++k) UpdateLifecycle(tracks, {}, 5);
  CHECK(tracks.Find(b)->cnt == 4);
  CHECK(UpdateLifecycle(tracks, {}, 5).deleted == std::vector<SegmentId>{b});
  CHECK(tracks.Find(a)->cnt == 4);
  const auto r = UpdateLifecycle(tracks, {}, 5);
  CHECK(r.deleted == std::vector<SegmentId>{a});
  CHECK(tracks.size() == 0);
  CHECK_THROWS_AS(UpdateLifecycle(tracks, {}, 0), std::invalid_argument);
}

TEST_CASE("ids are never reused") {
  TrackTable tracks;
  const SegmentId a = tracks.Create(0, {}, {}).track_id;
  tracks.Erase(a);
  CHECK(tracks.Create(1, {}, {}).track_id == a + 1);
  CHECK(tracks.Rekey(a + 1) == a + 2);
  CHECK_THROWS_AS(tracks.Rekey(a), std::out_of_range);
}
