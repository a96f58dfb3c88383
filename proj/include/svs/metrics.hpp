#pragma once

#include <optional>
#include <string>
#include <vector>

#include "svs/signal.hpp"

namespace svs {

/// Monotone, contiguous warping path over two frame sequences.
using DtwPath = std::vector<std::pair<int, int>>;

/// Exact O(n*m) dynamic program under Euclidean frame cost.
DtwPath dtw_align(const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& b, double* total_cost = nullptr);

/// Mel-cepstral distortion in dB: cepstra (K=13, c0 excluded) aligned by DTW,
/// (10/ln10) * sqrt(2) * mean ||delta c||_2 over the path.
double mcd(const MelSpectrogram& mel_ref, const MelSpectrogram& mel_syn, DtwPath* path_out = nullptr);

struct MsSsimResult {
  double value = 0.0;
  int scales_used = 5;
  bool reduced_scales = false;
};

/// Multi-scale SSIM on jointly min-max normalized spectrograms (L=1),
/// 11x11 Gaussian window sigma=1.5, dyadic downsampling. Scale count drops
/// (with renormalized weights) when the input is too small for 5 scales.
MsSsimResult ms_ssim(const MelSpectrogram& mel_ref, const MelSpectrogram& mel_syn);

struct F0Metrics {
  std::optional<double> rmse_semitones;
  std::optional<double> pearson;
};

/// Semitone-scale RMSE (12 log2(f/55)) and Pearson correlation over aligned
/// frame pairs where both tracks are voiced. Absent with < 2 such pairs.
F0Metrics f0_metrics(const F0Track& f0_ref, const F0Track& f0_syn, const DtwPath& alignment);

struct FileEval {
  std::string file;
  std::optional<double> ms_ssim_v;
  std::optional<double> mcd_db;
  std::optional<double> f0_rmse;
  std::optional<double> f0_corr;
};

struct EvalReport {
  std::vector<FileEval> files;
  FileEval mean;  // arithmetic mean of the defined per-file values
};

/// Pairwise evaluation of matching wav files in two directories; one shared
/// DTW alignment (on cepstra) per pair feeds both MCD and the F0 metrics.
EvalReport evaluate_dirs(const std::string& ref_dir, const std::string& syn_dir,
                         const SignalConfig& cfg);
void write_eval_csv(const std::string& path, const EvalReport& report);

}  // namespace svs
