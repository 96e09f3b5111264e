#include "despeck/patch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "despeck/parallel.hpp"

namespace despeck {

double patch_similarity(std::span<const double> p, std::span<const double> q, int looks) {
    if (p.size() != q.size())
        throw DimensionMismatch("patch_similarity: patches differ in size");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0.0) || !(q[i] > 0.0))
            throw NonPositivePixel("patch_similarity: non-positive sample");
        const double r = p[i] / q[i];
        sum += std::log(std::sqrt(r) + std::sqrt(1.0 / r));
    }
    return (2.0 * looks - 1.0) * sum;
}

namespace {

// Reference origins along one dimension: a stride grid with the last origin
// shifted flush to the boundary so every pixel lies under some reference.
std::vector<int> reference_positions(int dim, int patch, int stride) {
    std::vector<int> pos;
    const int last = dim - patch;
    for (int r = 0; r < last; r += stride) pos.push_back(r);
    pos.push_back(last);
    return pos;
}

struct Candidate {
    double key;
    int raster;
    PixelCoord origin;
};

} // namespace

std::vector<PatchGroupIndex> block_match(const IntensityImage& estimate,
                                         const BlockMatchConfig& cfg,
                                         int threads) {
    const int w = estimate.width, h = estimate.height, p = cfg.patch_side;
    if (w < p || h < p)
        throw ImageTooSmall("block_match: image smaller than patch side");
    if (cfg.patches_per_group < p * p)
        throw ConfigError("block_match: patches_per_group below patch_side^2");

    // Per-pixel logs shared by every similarity evaluation:
    // d = (2L-1) * sum_i [ log(p_i + q_i) - (log p_i + log q_i)/2 ].
    std::vector<double> logimg(estimate.size());
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        if (!(estimate.data[i] > 0.0))
            throw NonPositivePixel("block_match: estimate has non-positive sample");
        logimg[i] = std::log(estimate.data[i]);
    }

    const std::vector<int> ref_rows = reference_positions(h, p, cfg.reference_stride);
    const std::vector<int> ref_cols = reference_positions(w, p, cfg.reference_stride);
    const int n_refs = static_cast<int>(ref_rows.size() * ref_cols.size());

    std::vector<PatchGroupIndex> groups(n_refs);
    const int half = cfg.search_window_side / 2;
    const int side = cfg.search_window_side;

    const auto window_len = [&](int r0, int limit) {
        const int lo = std::max(0, r0 - half);
        const int hi = std::min(limit, r0 - half + side - 1);
        return hi - lo + 1;
    };
    int min_cands = std::numeric_limits<int>::max();
    for (int r0 : ref_rows)
        for (int c0 : ref_cols)
            min_cands = std::min(min_cands, window_len(r0, h - p) * window_len(c0, w - p));
    if (min_cands < p * p)
        throw ImageTooSmall("block_match: search window yields fewer candidates than patch pixels");

    parallel_for(static_cast<std::size_t>(n_refs), threads, [&](std::size_t gi) {
        const int r0 = ref_rows[gi / ref_cols.size()];
        const int c0 = ref_cols[gi % ref_cols.size()];

        const int rlo = std::max(0, r0 - half);
        const int rhi = std::min(h - p, r0 - half + side - 1);
        const int clo = std::max(0, c0 - half);
        const int chi = std::min(w - p, c0 - half + side - 1);

        std::vector<Candidate> cands;
        cands.reserve(static_cast<std::size_t>(rhi - rlo + 1) * (chi - clo + 1));
        int raster = 0;
        for (int r = rlo; r <= rhi; ++r) {
            for (int c = clo; c <= chi; ++c, ++raster) {
                double key = 0.0;
                for (int i = 0; i < p; ++i) {
                    const double* pr = &estimate.data[static_cast<std::size_t>(r0 + i) * w + c0];
                    const double* qr = &estimate.data[static_cast<std::size_t>(r + i) * w + c];
                    const double* lp = &logimg[static_cast<std::size_t>(r0 + i) * w + c0];
                    const double* lq = &logimg[static_cast<std::size_t>(r + i) * w + c];
                    for (int j = 0; j < p; ++j)
                        key += std::log(pr[j] + qr[j]) - 0.5 * (lp[j] + lq[j]);
                }
                cands.push_back({key, raster, {r, c}});
            }
        }

        const int want = std::min<int>(cfg.patches_per_group, static_cast<int>(cands.size()));

        const auto better = [](const Candidate& a, const Candidate& b) {
            return a.key < b.key || (a.key == b.key && a.raster < b.raster);
        };
        std::partial_sort(cands.begin(), cands.begin() + want, cands.end(), better);

        PatchGroupIndex g;
        g.group_id = static_cast<int>(gi);
        g.patch_side = p;
        g.member_origins.reserve(want);
        g.member_origins.push_back({r0, c0});
        const PixelCoord ref{r0, c0};
        bool ref_seen = false;
        for (int i = 0; i < want; ++i) {
            if (cands[i].origin == ref) {
                ref_seen = true;
                continue;
            }
            g.member_origins.push_back(cands[i].origin);
        }
        // The reference always belongs to its own group; if it lost the
        // ranking to ties it displaces the worst selected candidate.
        if (!ref_seen) g.member_origins.resize(want);
        groups[gi] = std::move(g);
    });

    return groups;
}

PatchMatrix extract(const LogImage& x, const PatchGroupIndex& g) {
    const int p = g.patch_side;
    PatchMatrix out(g.patch_pixels(), g.member_count());
    for (int l = 0; l < out.cols; ++l) {
        const auto [r0, c0] = g.member_origins[l];
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                out.at(i * p + j, l) = x.at(r0 + i, c0 + j);
    }
    return out;
}

void extract_adjoint(const PatchMatrix& y, const PatchGroupIndex& g, LogImage& accum,
                     double scale) {
    const int p = g.patch_side;
    if (y.rows != g.patch_pixels() || y.cols != g.member_count())
        throw DimensionMismatch("extract_adjoint: matrix does not match group");
    for (int l = 0; l < y.cols; ++l) {
        const auto [r0, c0] = g.member_origins[l];
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                accum.at(r0 + i, c0 + j) += scale * y.at(i * p + j, l);
    }
}

WeightMatrix build_weight_matrix(const std::vector<PatchGroupIndex>& groups,
                                 std::span<const double> mu, int width, int height) {
    if (mu.size() != groups.size())
        throw DimensionMismatch("build_weight_matrix: one mu per group required");
    WeightMatrix wm;
    wm.width = width;
    wm.height = height;
    wm.diagonal.assign(static_cast<std::size_t>(width) * height, 0.0);
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto& g = groups[j];
        const int p = g.patch_side;
        for (const auto& [r0, c0] : g.member_origins)
            for (int i = 0; i < p; ++i)
                for (int jj = 0; jj < p; ++jj)
                    wm.diagonal[static_cast<std::size_t>(r0 + i) * width + c0 + jj] += mu[j];
    }
    for (std::size_t i = 0; i < wm.diagonal.size(); ++i)
        if (!(wm.diagonal[i] > 0.0))
            throw UncoveredPixel("build_weight_matrix: pixel " + std::to_string(i) +
                                 " belongs to no group");
    return wm;
}

WeightMatrix build_weight_matrix(const std::vector<PatchGroupIndex>& groups,
                                 double mu, int width, int height) {
    std::vector<double> mus(groups.size(), mu);
    return build_weight_matrix(groups, mus, width, height);
}

void write_groups_csv(std::ostream& out, const std::vector<PatchGroupIndex>& groups) {
    out << "group_id,member_index,row,col\n";
    for (const auto& g : groups)
        for (int l = 0; l < g.member_count(); ++l)
            out << g.group_id << ',' << l << ',' << g.member_origins[l].row << ','
                << g.member_origins[l].col << '\n';
}

} // namespace despeck
