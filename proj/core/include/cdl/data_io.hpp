#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cdl/dataset.hpp"
#include "cdl/distributions.hpp"
#include "cdl/matrix.hpp"
#include "cdl/rng.hpp"

namespace cdl {

/// Per-instance ratings on a bounded scale, e.g. six adjectives scored 1..5.
/// Every rating must lie in (0, scale_max].
struct RatingMatrix {
  Matrix ratings;
  double scale_max = 0.0;
};

/// The hide-last evaluation split of a label-distribution target block.
/// train_targets are the visible classes renormalized to a simplex
/// (n x (c-1)); eval_targets are the original rows reinterpreted as
/// concentration distributions with the last entry as background (n x c).
struct ProtocolPair {
  Matrix train_targets;
  Matrix eval_targets;
};

/// Synthetic dataset with known generating structure: targets are the true
/// concentration distributions, `apparent` the matching apparent label
/// distributions, and `evidence_map` the fixed non-negative linear map W
/// (c x m) with e* = W x.
struct SynthData {
  Dataset dataset;
  Matrix apparent;
  Matrix evidence_map;
};

/// Shortest decimal string that round-trips the double exactly.
std::string format_number(double v);

/// CSV schema: first line `# ldl c=<c>` or `# cdl c=<c>`, second line the
/// column names (features first, then the target block of width c or c+1),
/// then numeric rows. Target rows whose sum deviates from 1 by at most 1e-6
/// are renormalized; larger deviations are rejected with the row index.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Distribution rows on their own, e.g. a prediction file. Uses the same
/// `# ldl/cdl c=<c>` header; when the file also carries feature columns the
/// target block is the trailing one, so full dataset files load too.
struct TargetTable {
  Matrix rows;
  TargetKind kind = TargetKind::kLabel;
  int label_count = 0;
};

TargetTable load_target_table(const std::filesystem::path& path);
void save_target_table(const TargetTable& table, const std::filesystem::path& path);

/// Ratings CSV: `# ratings R=<R>` header, a name row, then numeric rows.
RatingMatrix load_ratings(const std::filesystem::path& path);

/// Per row: mu_raw = R*c - sum(s); the concentration distribution is
/// [s..., mu_raw] / (R*c). Output is n x (c+1).
Matrix build_cdl_from_ratings(const RatingMatrix& ratings);

/// Treat the last class of each label-distribution row as an invisible
/// background concentration. Requires width >= 3 and no row with last
/// entry equal to 1.
ProtocolPair hide_last_label(const Matrix& targets);

/// Wrap a plain label predictor: append g + delta (delta uniform on
/// (-0.2g, 0.2g), exactly 0 when g = 0) and renormalize. The rng is only
/// consumed when g > 0.
ConcentrationDistribution noise_append_baseline(const LabelDistribution& prediction,
                                                double g, RandomStream& rng);

/// Deterministic variant for tests; |delta| <= 0.2g required.
ConcentrationDistribution noise_append_with_delta(const LabelDistribution& prediction,
                                                  double g, double delta);

/// Draw W (entries uniform in [0, 8/m]) and features (uniform in [0, 1]),
/// then derive each row's concentration distribution and apparent label
/// distribution from e* = W x. Deterministic given the seed.
SynthData synth_generate(int n, int m, int c, std::uint64_t seed);

}  // namespace cdl
