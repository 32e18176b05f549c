#pragma once

#include <vector>

#include "ulsad/tensor.hpp"

namespace ulsad {

struct ScoredSet {
    std::vector<real> scores;
    std::vector<int> labels;  // 1 = anomalous
};

struct MaskedMap {
    Tensor map;   // (H,W) anomaly scores
    Tensor mask;  // (H,W) ground truth, nonzero = anomalous
};

// Mann-Whitney AUROC with mid-rank tie handling:
//   P(score_anom > score_norm) + 0.5 * P(tie).
real auroc(const ScoredSet& s);

// AUROC over all pixels pooled across the given maps.
real pixel_auroc(const std::vector<MaskedMap>& items);

// Area under the per-region-overlap curve: PRO (mean per-component overlap
// fraction) against FPR, integrated by trapezoid up to fpr_limit and
// normalized by it. Components are 8-connected within each mask.
real aupro(const std::vector<MaskedMap>& items, real fpr_limit = 0.3);

// 8-connected component labeling of a binary mask; returns per-pixel labels
// (-1 for background) and writes the component count. Shared with the test
// oracle so both sides agree on connectivity.
std::vector<int> label_components(const Tensor& mask, int* n_components);

}  // namespace ulsad
