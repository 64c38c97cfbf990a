// Copyright 2026 The tinyod authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <limits>

#include "tinyod/probmap.hpp"
#include "tinyod/proposals.hpp"

namespace tinyod {

inline constexpr int kRocThresholds = 100;

// Threshold grid: centers of 100 even bins of (0,1), so no threshold degenerates
// into all-or-nothing at the endpoints.
inline double roc_threshold(int i) { return (i + 0.5) / kRocThresholds; }

// Raw confusion counts per threshold, mergeable across images. The dataset
// aggregate sums counts before forming any ratio (micro-averaging).
struct PixelConfusion {
    std::array<long long, kRocThresholds> tp{};
    std::array<long long, kRocThresholds> fp{};
    long long gt_obstacle = 0;
    long long gt_road = 0;

    PixelConfusion& operator+=(const PixelConfusion& o) {
        for (int i = 0; i < kRocThresholds; ++i) {
            tp[i] += o.tp[i];
            fp[i] += o.fp[i];
        }
        gt_obstacle += o.gt_obstacle;
        gt_road += o.gt_road;
        return *this;
    }
};

struct RocPoint {
    double threshold = 0.0;
    double tpr = 0.0;  // NaN when the image has no obstacle pixels
    double fpr = 0.0;
};

struct RocCurve {
    std::array<RocPoint, kRocThresholds> points{};
    double auc = 0.0;
};

// Counts predictions P(p) > t inside the road region; ignore-labeled pixels
// are excluded everywhere.
inline PixelConfusion pixel_confusion(const ProbabilityMap& prob, const Mask& gt,
                                      const BBox& road_region) {
    require(prob.width == gt.width && prob.height == gt.height, "pixel_confusion: dim mismatch");
    PixelConfusion out;
    BBox r = clip(road_region, BBox{0, 0, gt.width, gt.height});
    for (int y = r.y; y < r.y2(); ++y)
        for (int x = r.x; x < r.x2(); ++x) {
            uint8_t l = gt.at(x, y);
            if (l == label::kIgnore || l == label::kNonRoad) continue;
            bool obstacle = l == label::kObstacle;
            if (obstacle)
                ++out.gt_obstacle;
            else
                ++out.gt_road;
            double v = prob.values.at(x, y);
            // v > roc_threshold(i)  <=>  i < v*100 - 0.5; count all such i.
            int hits = std::clamp(static_cast<int>(std::ceil(v * kRocThresholds - 0.5)), 0,
                                  kRocThresholds);
            for (int i = 0; i < hits; ++i) {
                if (obstacle)
                    ++out.tp[i];
                else
                    ++out.fp[i];
            }
        }
    return out;
}

// ROC from aggregated counts; AUC by trapezoid over the curve anchored at
// (0,0) and (1,1).
inline RocCurve roc_from_confusion(const PixelConfusion& c) {
    RocCurve curve;
    double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < kRocThresholds; ++i) {
        curve.points[i].threshold = roc_threshold(i);
        curve.points[i].tpr = c.gt_obstacle > 0
                                  ? static_cast<double>(c.tp[i]) / static_cast<double>(c.gt_obstacle)
                                  : nan;
        curve.points[i].fpr =
            c.gt_road > 0 ? static_cast<double>(c.fp[i]) / static_cast<double>(c.gt_road) : 0.0;
    }
    if (c.gt_obstacle > 0) {
        // Thresholds descend left to right on the ROC plane; counts are already
        // monotone in the threshold index, so reverse order sorts by FPR.
        double auc = 0.0;
        double prev_fpr = 0.0, prev_tpr = 0.0;
        for (int i = kRocThresholds - 1; i >= 0; --i) {
            double f = curve.points[i].fpr, t = curve.points[i].tpr;
            auc += (f - prev_fpr) * 0.5 * (t + prev_tpr);
            prev_fpr = f;
            prev_tpr = t;
        }
        auc += (1.0 - prev_fpr) * 0.5 * (1.0 + prev_tpr);
        curve.auc = auc;
    }
    return curve;
}

inline RocCurve pixel_roc(const ProbabilityMap& prob, const Mask& gt, const BBox& road_region) {
    return roc_from_confusion(pixel_confusion(prob, gt, road_region));
}

// TPR linearly interpolated at the requested FPR; NaN when the curve never
// reaches it (mirrors the NA entries of sparse variants).
inline double tpr_at_fpr(const RocCurve& curve, double fpr) {
    double prev_f = 0.0, prev_t = 0.0;
    for (int i = kRocThresholds - 1; i >= 0; --i) {
        double f = curve.points[i].fpr, t = curve.points[i].tpr;
        if (std::isnan(t)) return t;
        if (f >= fpr) {
            if (f == prev_f) return t;
            double w = (fpr - prev_f) / (f - prev_f);
            return prev_t + w * (t - prev_t);
        }
        prev_f = f;
        prev_t = t;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Instance-level recall surface over IoU thresholds and proposal budgets,
// plus the derived average-recall row.
struct RecallReport {
    std::vector<double> iou_grid;
    std::vector<int> budget_grid;
    // recall[i][j] = recall at iou_grid[i] with the top budget_grid[j] proposals
    std::vector<std::vector<double>> recall;
    std::vector<double> average_recall;  // per budget, mean over IoU 0.5..1.0
    long long gt_count = 0;

    double at(double tau, int budget) const {
        for (size_t i = 0; i < iou_grid.size(); ++i)
            if (std::abs(iou_grid[i] - tau) < 1e-9)
                for (size_t j = 0; j < budget_grid.size(); ++j)
                    if (budget_grid[j] == budget) return recall[i][j];
        throw ContractError("RecallReport::at: point not on the grid");
    }
};

inline const std::vector<double>& average_recall_taus() {
    static const std::vector<double> taus = {0.5,  0.55, 0.6,  0.65, 0.7, 0.75,
                                             0.8,  0.85, 0.9,  0.95, 1.0};
    return taus;
}

// A ground-truth box is recalled at (tau, n) when one of the image's top-n
// proposals overlaps it with IoU >= tau. Proposals must arrive sorted by
// descending score per image.
inline RecallReport instance_recall(const std::vector<std::vector<Proposal>>& proposals_per_image,
                                    const std::vector<std::vector<BBox>>& gt_per_image,
                                    std::vector<double> iou_grid, std::vector<int> budget_grid) {
    require(proposals_per_image.size() == gt_per_image.size(), "instance_recall: image count mismatch");
    // The AR taus always participate so average_recall is computable.
    for (double t : average_recall_taus())
        if (std::none_of(iou_grid.begin(), iou_grid.end(),
                         [&](double v) { return std::abs(v - t) < 1e-9; }))
            iou_grid.push_back(t);
    std::sort(iou_grid.begin(), iou_grid.end());
    std::sort(budget_grid.begin(), budget_grid.end());

    int max_budget = budget_grid.empty() ? 0 : budget_grid.back();
    RecallReport report;
    report.iou_grid = iou_grid;
    report.budget_grid = budget_grid;
    report.recall.assign(iou_grid.size(), std::vector<double>(budget_grid.size(), 0.0));

    // recalled_at[i][j] counts GT boxes whose best prefix IoU reaches grid i
    // within budget j.
    std::vector<std::vector<long long>> recalled(iou_grid.size(),
                                                 std::vector<long long>(budget_grid.size(), 0));
    for (size_t img = 0; img < gt_per_image.size(); ++img) {
        const auto& props = proposals_per_image[img];
        for (const BBox& gt : gt_per_image[img]) {
            ++report.gt_count;
            double best = 0.0;
            size_t j = 0;
            std::vector<double> best_at_budget(budget_grid.size(), 0.0);
            for (size_t r = 0; r < props.size() && r < static_cast<size_t>(max_budget); ++r) {
                best = std::max(best, iou(props[r].bbox, gt));
                while (j < budget_grid.size() && static_cast<size_t>(budget_grid[j]) == r + 1) {
                    best_at_budget[j] = best;
                    ++j;
                }
            }
            for (; j < budget_grid.size(); ++j) best_at_budget[j] = best;
            for (size_t i = 0; i < iou_grid.size(); ++i)
                for (size_t b = 0; b < budget_grid.size(); ++b)
                    if (best_at_budget[b] >= iou_grid[i]) ++recalled[i][b];
        }
    }
    if (report.gt_count > 0)
        for (size_t i = 0; i < iou_grid.size(); ++i)
            for (size_t b = 0; b < budget_grid.size(); ++b)
                report.recall[i][b] =
                    static_cast<double>(recalled[i][b]) / static_cast<double>(report.gt_count);

    report.average_recall.assign(budget_grid.size(), 0.0);
    for (size_t b = 0; b < budget_grid.size(); ++b) {
        double acc = 0.0;
        for (double tau : average_recall_taus()) {
            for (size_t i = 0; i < iou_grid.size(); ++i)
                if (std::abs(iou_grid[i] - tau) < 1e-9) acc += report.recall[i][b];
        }
        report.average_recall[b] = acc / average_recall_taus().size();
    }
    return report;
}

}  // namespace tinyod
