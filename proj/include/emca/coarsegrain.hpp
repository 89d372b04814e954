#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "emca/ca.hpp"

namespace emca {

// Counts of non-overlapping blocks (b cells of a row in 1D, b x b in 2D).
// Trailing cells that do not fill a block are cropped. Keys are base-k codes
// of the block cells in row-major order with the first cell most significant.
struct BlockHistogram {
    int block = 0;
    int dims = 1;
    int num_states = 2;
    uint64_t total = 0;
    std::unordered_map<uint64_t, uint64_t> counts;
};

// Block code -> coarse output state. thresholds[j] is the cumulative -log p
// boundary of output state j over blocks sorted by descending probability
// (ties by ascending code).
struct SupercellMap {
    int k_out = 0;
    std::vector<double> thresholds;
    std::unordered_map<uint64_t, int> f;
};

// Rejects b < 1, a block larger than the grid, or a block too large to code
// in 64 bits.
BlockHistogram block_histogram(const Grid& g, int b);

// -log p of the block normalized by the largest -log p in the histogram, in
// [0, 1]. A single-block histogram rates 0; codes never observed rate 1.
double block_rarity(const BlockHistogram& h, uint64_t code);

// Splits the cumulative -log p mass of the sorted blocks into k_out bins:
// equal shares for 1D histograms, shares proportional to 1/(j+1)^2 for bin j
// of a 2D histogram. The most frequent block always maps to state 0 and a
// rarer block never maps below a more frequent one. With fewer distinct
// blocks than k_out the surplus states go unused.
SupercellMap partition_histogram(const BlockHistogram& h, int k_out);

// One output cell per block. Plain mode applies partition_histogram; dither
// mode quantizes the block rarity scaled to [0, k_out-1] with Floyd-Steinberg
// error diffusion (7/16 right, 3/16 down-left, 5/16 down, 1/16 down-right) in
// fixed raster order. Output extents are the input's divided by b, rounded
// down.
Grid coarse_grain_histogram(const Grid& g, int b, int k_out, bool dither = false);

// K-means over block state strings under Hamming distance. Centers start
// from k_out distinct observed blocks (k_out shrinks if fewer exist) and are
// recomputed as per-position means rounded to the nearest state. The output
// state is the cluster index after sorting clusters by descending size, so
// state 0 is the most populous cluster.
Grid coarse_grain_kmeans(const Grid& g, int b, int k_out, uint64_t seed);

struct AutoencoderConfig {
    // steep enough to leave the collapsed-latent plateau of the softmax
    // bottleneck before the improvement-based stop triggers
    double lr = 0.2;
    int batch_size = 8;
    int max_epochs = 400;
    long max_steps = 100000;
    // stop once an epoch improves the mean loss by less than this
    double min_improvement = 1e-4;
    uint64_t seed = 0;
};

struct AutoencoderGrain {
    // argmax latent component per block; num_states = latent_dim
    Grid grid;
    // full latent mixture per block, row-major; each sums to 1
    std::vector<std::vector<double>> mixtures;
    double final_loss = 0.0;
};

// Trains an encoder (dense -> softmax over latent_dim components) and decoder
// (dense -> per-cell softmax over the k states) to reconstruct every block of
// g, then encodes each block. Deterministic for a given seed.
AutoencoderGrain coarse_grain_autoencoder(const Grid& g, int b, int latent_dim,
                                          const AutoencoderConfig& cfg = {});

// Domain filter for binary 1D space-times. Histogram coarse-graining with
// 2-cell blocks is applied at even and odd spatial offsets (each offset
// builds its own histogram over the whole diagram) and the two half-width
// diagrams are merged cell-wise with OR, aligned by block start index. With
// boundaries set, horizontally adjacent merged cells are XORed to highlight
// domain walls. Odd widths are cropped by one column; the output keeps every
// frame at half the cropped width.
SpaceTime filter_eca(const SpaceTime& st, bool boundaries = false);

// Fraction of nonzero cells beyond the first frame with a nonzero cell in
// the previous frame at column offset -1, 0 or +1 (toroidal). 1 when there
// are no such cells.
double prev_row_neighbor_fraction(const SpaceTime& st);

}  // namespace emca
