#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "despeck/image.hpp"
#include "despeck/matrix.hpp"

namespace despeck {

struct PixelCoord {
    int row = 0;
    int col = 0;
    bool operator==(const PixelCoord&) const = default;
};

// One nonlocal similar-patch group: the reference patch origin followed by
// the origins of its members, all fully inside the image. The extraction
// operator of the group in coordinate form.
struct PatchGroupIndex {
    int group_id = 0;
    int patch_side = 0;
    std::vector<PixelCoord> member_origins; // first entry is the reference patch

    int patch_pixels() const { return patch_side * patch_side; }
    int member_count() const { return static_cast<int>(member_origins.size()); }
};

struct BlockMatchConfig {
    int looks = 1;
    int search_window_side = 50;
    int patch_side = 10;
    int patches_per_group = 150;
    int reference_stride = 5; // defaults to patch_side / 2 in the presets
};

// Diagonal of the pixel-weight matrix: per-pixel weighted membership counts.
struct WeightMatrix {
    int width = 0;
    int height = 0;
    std::vector<double> diagonal;

    double at(int row, int col) const { return diagonal[static_cast<std::size_t>(row) * width + col]; }
};

// Similarity between two strictly positive patches of an L-look image:
// (2L-1) * sum_i log(sqrt(p_i/q_i) + sqrt(q_i/p_i)). Symmetric and scale
// invariant; minimal value m*(2L-1)*log(2) attained exactly at p == q.
double patch_similarity(std::span<const double> p, std::span<const double> q, int looks);

// Groups similar patches around reference patches placed on a regular grid
// (stride cfg.reference_stride, last row/column flush with the boundary so
// every pixel is covered). Candidates are enumerated at stride 1 inside a
// square window of side cfg.search_window_side centered on the reference
// patch's top-left corner, clipped to the image. Each group keeps the
// reference first, then the most similar candidates, ties broken by raster
// order of the candidate origin.
std::vector<PatchGroupIndex> block_match(const IntensityImage& estimate,
                                         const BlockMatchConfig& cfg,
                                         int threads = 1);

// Gathers member patches of a group into a matrix: column l is the patch at
// member_origins[l], pixels in row-major order within the patch.
PatchMatrix extract(const LogImage& x, const PatchGroupIndex& g);

// Adjoint of extract: scatter-adds column l back onto the patch at
// member_origins[l], scaled by `scale`, accumulating into `accum`.
void extract_adjoint(const PatchMatrix& y, const PatchGroupIndex& g, LogImage& accum,
                     double scale = 1.0);

// diagonal[p] = sum_j mu[j] * (number of times pixel p appears in group j).
// Throws UncoveredPixel if any pixel is in no group.
WeightMatrix build_weight_matrix(const std::vector<PatchGroupIndex>& groups,
                                 std::span<const double> mu, int width, int height);
WeightMatrix build_weight_matrix(const std::vector<PatchGroupIndex>& groups,
                                 double mu, int width, int height);

// Debug CSV: one row per member, columns group_id,member_index,row,col.
void write_groups_csv(std::ostream& out, const std::vector<PatchGroupIndex>& groups);

} // namespace despeck
