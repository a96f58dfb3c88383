#pragma once

#include "svs/networks.hpp"
#include "svs/signal.hpp"

namespace svs {

double midi_to_hz(int midi);

/// One corpus item: aligned score, ground-truth durations (frames per phone)
/// and the log-mel target.
struct CorpusItem {
  MusicalScore score;
  std::vector<int64_t> durations;
  MelSpectrogram mel;
  std::string wav_path;
  std::string mel_path;
  std::string score_path;
  int64_t total_frames() const;
};

struct Corpus {
  std::vector<CorpusItem> train;
  std::vector<CorpusItem> heldout;
};

/// Random singable score for one singer: alternating consonant / vowel
/// phones, pitch random walk, 2-4 seconds of frames.
MusicalScore random_score(const TrainConfig& cfg, int64_t singer, std::mt19937_64& rng);

/// Deterministic synthetic voice: vowels are harmonic stacks with a
/// singer-dependent spectral tilt and 5 Hz vibrato at the note pitch,
/// consonants are shaped noise bursts.
std::vector<double> synth_score_audio(const MusicalScore& score, const TrainConfig& cfg,
                                      std::mt19937_64& rng);

/// Write WAVs, mels and score files for every singer under out_dir, plus a
/// manifest with train/heldout splits (at least two held-out items per
/// singer). Fully determined by the seed.
void generate_corpus(const TrainConfig& cfg, const std::string& out_dir, uint64_t seed,
                     int items_per_singer = 6);

Corpus load_corpus(const std::string& dir, const TrainConfig& cfg);

void write_score(const std::string& path, const MusicalScore& score);
MusicalScore read_score(const std::string& path, const TrainConfig& cfg);

/// Contiguous phone-aligned crop with at most max_frames frames
/// (max_frames <= 0 keeps the item whole).
CorpusItem crop_item(const CorpusItem& item, int max_frames, std::mt19937_64& rng);

struct TrainSample {
  MusicalScore score;
  std::vector<int64_t> durations;
  Tensor mel;  // mel_bins x L
};

struct Batch {
  std::vector<TrainSample> samples;
  Tensor padded;  // B x mel_bins x Lmax, zero past each sample's length
  Tensor mask;    // B x Lmax, 1 inside a sample, 0 in padding
};

Tensor mel_to_tensor(const MelSpectrogram& mel);

/// Assemble a cropped, padded batch from the chosen items.
Batch load_batch(const std::vector<CorpusItem>& items, const std::vector<size_t>& picks,
                 const TrainConfig& cfg, std::mt19937_64& rng);

/// Mean absolute error over valid frames only: sum(|a-b| * mask) over
/// (mel_bins * sum(mask)). a, b: B x M x L, mask: B x L.
Tensor masked_l1(const Tensor& a, const Tensor& b, const Tensor& mask);

}  // namespace svs
