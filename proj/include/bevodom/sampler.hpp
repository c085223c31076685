#pragma once

// Rotation-aware pair mining. Every frame is an anchor; partners within the
// temporal window and displacement limit are split into a high-rotation list
// (yaw difference in [low_deg, high_deg]) and a standard list (below
// low_deg). Draws pick the high list with probability high_fraction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bevodom/errors.hpp"
#include "bevodom/geometry.hpp"

namespace bevodom {

struct FrameIndex {
  std::int64_t id = 0;
  double timestamp = 0.0;
  Pose3 pose;
};

struct PairRecord {
  std::int64_t anchor_id = 0;
  std::int64_t partner_id = 0;
  double yaw_diff_deg = 0.0;   // |wrapped relative yaw|, in [0, 180]
  double displacement_m = 0.0; // planar norm of the relative translation

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct PairLists {
  std::vector<PairRecord> high;
  std::vector<PairRecord> standard;

  bool empty() const noexcept { return high.empty() && standard.empty(); }
};

struct AnchorPairs {
  std::int64_t anchor_id = 0;
  PairLists lists;
};

/// Thresholds are inclusive: yaw exactly at low_deg or high_deg is high,
/// displacement exactly max_disp_m is kept.
struct SamplerConfig {
  double window_s = 60.0;
  double max_disp_m = 4.0;
  double low_deg = 15.0;
  double high_deg = 45.0;
  double high_fraction = 0.7;

  void validate() const {
    if (!(window_s >= 0.0 && max_disp_m >= 0.0 && low_deg >= 0.0 &&
          high_deg >= low_deg && high_deg <= 180.0 && high_fraction >= 0.0 &&
          high_fraction <= 1.0)) {
      throw Error("invalid sampler thresholds");
    }
  }
};

enum class PairClass { high, standard, discarded };

inline PairClass classify_pair(double yaw_diff_deg, double displacement_m,
                               const SamplerConfig& cfg = {}) {
  if (displacement_m > cfg.max_disp_m) return PairClass::discarded;
  if (yaw_diff_deg < cfg.low_deg) return PairClass::standard;
  if (yaw_diff_deg <= cfg.high_deg) return PairClass::high;
  return PairClass::discarded;
}

inline PairRecord make_pair_record(const FrameIndex& anchor, const FrameIndex& partner) {
  const Pose2 rel = pose3_to_pose2(relative_pose(anchor.pose, partner.pose));
  return {anchor.id, partner.id, std::abs(rad_to_deg(rel.theta)),
          std::hypot(rel.tx, rel.ty)};
}

/// One entry per frame of `seq`, in sequence order. Both orderings of a pair
/// appear, each under its own anchor.
inline std::vector<AnchorPairs> build_pair_lists(const std::vector<FrameIndex>& seq,
                                                 const SamplerConfig& cfg = {}) {
  cfg.validate();
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i].timestamp < seq[i - 1].timestamp) {
      throw Error("pair mining needs nondecreasing timestamps");
    }
  }
  std::vector<AnchorPairs> out(seq.size());
  std::size_t lo = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out[i].anchor_id = seq[i].id;
    while (seq[i].timestamp - seq[lo].timestamp > cfg.window_s) ++lo;
    for (std::size_t j = lo; j < seq.size(); ++j) {
      if (seq[j].timestamp - seq[i].timestamp > cfg.window_s) break;
      if (j == i || seq[j].id == seq[i].id) continue;
      const PairRecord rec = make_pair_record(seq[i], seq[j]);
      switch (classify_pair(rec.yaw_diff_deg, rec.displacement_m, cfg)) {
        case PairClass::high: out[i].lists.high.push_back(rec); break;
        case PairClass::standard: out[i].lists.standard.push_back(rec); break;
        case PairClass::discarded: break;
      }
    }
  }
  return out;
}

/// Union of all per-anchor lists, anchor order preserved.
inline PairLists merge_pair_lists(const std::vector<AnchorPairs>& anchors) {
  PairLists all;
  for (const auto& a : anchors) {
    all.high.insert(all.high.end(), a.lists.high.begin(), a.lists.high.end());
    all.standard.insert(all.standard.end(), a.lists.standard.begin(),
                        a.lists.standard.end());
  }
  return all;
}

using SamplerRng = std::mt19937_64;

/// Draws one record: high list with probability `high_fraction`, else the
/// standard list, uniformly within the list. An empty chosen list falls back
/// to the other one.
inline PairRecord sample_pair(const PairLists& lists, SamplerRng& rng,
                              double high_fraction = 0.7) {
  if (lists.empty()) throw NoPairsError("both pair lists are empty");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const bool want_high = coin(rng) < high_fraction;
  const std::vector<PairRecord>* pick = want_high ? &lists.high : &lists.standard;
  if (pick->empty()) pick = want_high ? &lists.standard : &lists.high;
  std::uniform_int_distribution<std::size_t> idx(0, pick->size() - 1);
  return (*pick)[idx(rng)];
}

/// Counts over [edges[i], edges[i+1]); the last bin also takes its right
/// edge. Values outside the edges go to underflow / overflow.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  std::size_t total() const {
    std::size_t n = underflow + overflow;
    for (std::size_t c : counts) n += c;
    return n;
  }
};

inline Histogram make_histogram(const std::vector<double>& values,
                                std::vector<double> edges) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw Error("histogram edges must be strictly increasing with >= 2 entries");
  }
  Histogram h{std::move(edges), {}, 0, 0};
  h.counts.assign(h.edges.size() - 1, 0);
  for (double x : values) {
    if (x < h.edges.front()) {
      ++h.underflow;
    } else if (x > h.edges.back()) {
      ++h.overflow;
    } else if (x == h.edges.back()) {
      ++h.counts.back();
    } else {
      const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
      ++h.counts[std::size_t(it - h.edges.begin()) - 1];
    }
  }
  return h;
}

inline std::vector<double> linear_edges(double lo, double hi, int bins) {
  std::vector<double> e(std::size_t(bins) + 1);
  for (int i = 0; i <= bins; ++i) e[std::size_t(i)] = lo + (hi - lo) * i / bins;
  return e;
}

struct SamplingStats {
  Histogram yaw_deg;
  Histogram displacement_m;
};

inline SamplingStats sampling_stats(const std::vector<PairRecord>& log,
                                    std::vector<double> yaw_edges = linear_edges(0.0, 45.0, 9),
                                    std::vector<double> disp_edges = linear_edges(0.0, 4.0, 8)) {
  if (log.empty()) throw Error("sampling stats need a nonempty draw log");
  std::vector<double> yaw;
  std::vector<double> disp;
  yaw.reserve(log.size());
  disp.reserve(log.size());
  for (const auto& r : log) {
    yaw.push_back(r.yaw_diff_deg);
    disp.push_back(r.displacement_m);
  }
  return {make_histogram(yaw, std::move(yaw_edges)),
          make_histogram(disp, std::move(disp_edges))};
}

/// "anchor_id,partner_id,yaw_diff_deg,displacement_m" with a header row.
inline std::string pairs_to_csv(const std::vector<PairRecord>& records) {
  std::ostringstream os;
  os.precision(17);
  os << "anchor_id,partner_id,yaw_diff_deg,displacement_m\n";
  for (const auto& r : records) {
    os << r.anchor_id << ',' << r.partner_id << ',' << r.yaw_diff_deg << ','
       << r.displacement_m << '\n';
  }
  return os.str();
}

}  // namespace bevodom
