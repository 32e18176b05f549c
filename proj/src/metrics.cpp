#include "ulsad/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

namespace ulsad {

namespace {

// Mid-rank AUROC over parallel score/label arrays.
real auroc_impl(const std::vector<real>& scores, const std::vector<int>& labels) {
    const size_t n = scores.size();
    if (n != labels.size()) throw ShapeError("auroc: scores/labels length mismatch");
    std::int64_t n_pos = 0;
    for (int l : labels) n_pos += (l != 0);
    const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw MetricError("auroc: both classes must be present (pos=" + std::to_string(n_pos) +
                          ", neg=" + std::to_string(n_neg) + ")");
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });

    real rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const real mid_rank = 0.5 * static_cast<real>(i + j) + 1.0;  // ranks are 1-based
        for (size_t t = i; t <= j; ++t) {
            if (labels[order[t]] != 0) rank_sum_pos += mid_rank;
        }
        i = j + 1;
    }
    const real u = rank_sum_pos - 0.5 * static_cast<real>(n_pos) * static_cast<real>(n_pos + 1);
    return u / (static_cast<real>(n_pos) * static_cast<real>(n_neg));
}

}  // namespace

real auroc(const ScoredSet& s) { return auroc_impl(s.scores, s.labels); }

real pixel_auroc(const std::vector<MaskedMap>& items) {
    std::vector<real> scores;
    std::vector<int> labels;
    for (const MaskedMap& item : items) {
        if (item.map.shape() != item.mask.shape()) {
            throw ShapeError("pixel_auroc: map/mask shape mismatch");
        }
        for (std::int64_t i = 0; i < item.map.numel(); ++i) {
            scores.push_back(item.map[i]);
            labels.push_back(item.mask[i] != 0.0 ? 1 : 0);
        }
    }
    if (scores.empty()) throw MetricError("pixel_auroc: empty pool");
    return auroc_impl(scores, labels);
}

std::vector<int> label_components(const Tensor& mask, int* n_components) {
    if (mask.dim() != 2) throw ShapeError("label_components: expected (H,W)");
    const int h = mask.shape(0), w = mask.shape(1);
    std::vector<int> labels(static_cast<size_t>(h) * w, -1);
    int next = 0;
    std::vector<std::int64_t> stack;
    for (std::int64_t s = 0; s < mask.numel(); ++s) {
        if (mask[s] == 0.0 || labels[static_cast<size_t>(s)] != -1) continue;
        labels[static_cast<size_t>(s)] = next;
        stack.assign(1, s);
        while (!stack.empty()) {
            const std::int64_t cur = stack.back();
            stack.pop_back();
            const int cy = static_cast<int>(cur / w), cx = static_cast<int>(cur % w);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const int ny = cy + dy, nx = cx + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    const std::int64_t ni = static_cast<std::int64_t>(ny) * w + nx;
                    if (mask[ni] != 0.0 && labels[static_cast<size_t>(ni)] == -1) {
                        labels[static_cast<size_t>(ni)] = next;
                        stack.push_back(ni);
                    }
                }
            }
        }
        ++next;
    }
    if (n_components) *n_components = next;
    return labels;
}

real aupro(const std::vector<MaskedMap>& items, real fpr_limit) {
    if (!(fpr_limit > 0.0 && fpr_limit <= 1.0)) {
        throw MetricError("aupro: fpr_limit must be in (0,1]");
    }

    struct Pixel {
        real score;
        int component;  // -1 for normal pixels
    };
    std::vector<Pixel> pixels;
    std::vector<std::int64_t> component_size;
    std::int64_t n_neg = 0;

    for (const MaskedMap& item : items) {
        if (item.map.shape() != item.mask.shape()) {
            throw ShapeError("aupro: map/mask shape mismatch");
        }
        int n_comp = 0;
        const std::vector<int> labels = label_components(item.mask, &n_comp);
        const int base = static_cast<int>(component_size.size());
        component_size.resize(static_cast<size_t>(base + n_comp), 0);
        for (std::int64_t i = 0; i < item.map.numel(); ++i) {
            const int local = labels[static_cast<size_t>(i)];
            const int comp = local == -1 ? -1 : base + local;
            if (comp == -1) {
                ++n_neg;
            } else {
                ++component_size[static_cast<size_t>(comp)];
            }
            pixels.push_back({item.map[i], comp});
        }
    }
    const size_t n_components = component_size.size();
    if (n_components == 0) throw MetricError("aupro: no anomalous regions in ground truth");
    if (n_neg == 0) throw MetricError("aupro: no normal pixels in ground truth");

    std::sort(pixels.begin(), pixels.end(),
              [](const Pixel& a, const Pixel& b) { return a.score > b.score; });

    // Sweep thresholds at every distinct score; PRO and FPR are both
    // non-decreasing, so the curve is a polyline from (0,0).
    real area = 0.0;
    real prev_fpr = 0.0, prev_pro = 0.0;
    real pro_sum = 0.0;  // sum over components of hits/size
    std::int64_t fp = 0;
    size_t i = 0;
    bool capped = false;
    while (i < pixels.size() && !capped) {
        size_t j = i;
        while (j + 1 < pixels.size() && pixels[j + 1].score == pixels[i].score) ++j;
        for (size_t t = i; t <= j; ++t) {
            const int comp = pixels[t].component;
            if (comp == -1) {
                ++fp;
            } else {
                pro_sum += 1.0 / static_cast<real>(component_size[static_cast<size_t>(comp)]);
            }
        }
        const real fpr = static_cast<real>(fp) / static_cast<real>(n_neg);
        const real pro = pro_sum / static_cast<real>(n_components);
        if (fpr >= fpr_limit) {
            // interpolate the curve at the cap
            const real t = fpr > prev_fpr ? (fpr_limit - prev_fpr) / (fpr - prev_fpr) : 0.0;
            const real pro_at_limit = prev_pro + t * (pro - prev_pro);
            area += (fpr_limit - prev_fpr) * 0.5 * (prev_pro + pro_at_limit);
            capped = true;
        } else {
            area += (fpr - prev_fpr) * 0.5 * (prev_pro + pro);
            prev_fpr = fpr;
            prev_pro = pro;
        }
        i = j + 1;
    }
    if (!capped) {
        // every pixel predicted anomalous still leaves FPR == 1 >= limit,
        // so reaching here means limit == 1 exactly and the curve ended on it
        area += (fpr_limit - prev_fpr) * prev_pro;
    }
    return area / fpr_limit;
}

}  // namespace ulsad
