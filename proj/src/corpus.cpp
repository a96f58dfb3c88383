#include "svs/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace svs {

double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

int64_t CorpusItem::total_frames() const {
  int64_t t = 0;
  for (int64_t d : durations) t += d;
  return t;
}

namespace {

bool is_vowel(int64_t phone) { return phone >= 4; }

int64_t rand_range(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return lo + int64_t(rng() % uint64_t(hi - lo + 1));
}

}  // namespace

MusicalScore random_score(const TrainConfig& cfg, int64_t singer, std::mt19937_64& rng) {
  MusicalScore s;
  s.singer_id = singer;
  double fps = double(cfg.signal.sample_rate) / cfg.signal.hop;
  int64_t target = rand_range(rng, int64_t(2.0 * fps), int64_t(4.0 * fps));
  int64_t pitch = rand_range(rng, cfg.pitch_min + 4, cfg.pitch_max - 4);
  int64_t total = 0;
  bool consonant = true;
  while (total < target) {
    int64_t phone, len;
    if (consonant) {
      phone = rand_range(rng, 0, 3);
      len = rand_range(rng, 4, 8);
    } else {
      phone = rand_range(rng, 4, 7);
      len = rand_range(rng, 16, 48);
      pitch += rand_range(rng, -4, 4);
      pitch = std::clamp(pitch, int64_t(cfg.pitch_min), int64_t(cfg.pitch_max));
    }
    s.phones.push_back(phone);
    s.note_len.push_back(len);
    s.note_pitch.push_back(pitch);
    total += len;
    consonant = !consonant;
  }
  return s;
}

std::vector<double> synth_score_audio(const MusicalScore& score, const TrainConfig& cfg,
                                      std::mt19937_64& rng) {
  const int sr = cfg.signal.sample_rate;
  const int hop = cfg.signal.hop;
  const int ramp = sr / 100;  // 10 ms fades at note boundaries
  double tilt = 1.0 + 0.8 * double(score.singer_id);
  std::vector<double> wav;
  double phase = 0.0, t_global = 0.0, lp = 0.0;
  std::normal_distribution<double> noise(0.0, 1.0);

  for (size_t p = 0; p < score.phones.size(); ++p) {
    int64_t n = score.note_len[p] * hop;
    if (is_vowel(score.phones[p])) {
      double base = midi_to_hz(int(score.note_pitch[p]));
      int harmonics = std::max(1, std::min(10, int(0.5 * sr / base)));
      double anorm = 0.0;
      for (int h = 1; h <= harmonics; ++h) anorm += std::pow(double(h), -tilt);
      for (int64_t i = 0; i < n; ++i) {
        double f0 = base * std::pow(2.0, 0.3 / 12.0 * std::sin(2.0 * M_PI * 5.0 * t_global));
        phase += 2.0 * M_PI * f0 / sr;
        double v = 0.0;
        for (int h = 1; h <= harmonics; ++h) {
          v += std::pow(double(h), -tilt) * std::sin(h * phase);
        }
        double env = std::min({1.0, double(i) / ramp, double(n - 1 - i) / ramp});
        wav.push_back(0.25 * env * v / anorm);
        t_global += 1.0 / sr;
      }
    } else {
      double c = 0.2 + 0.15 * double(score.phones[p]);  // per-phone noise color
      for (int64_t i = 0; i < n; ++i) {
        lp = c * lp + (1.0 - c) * noise(rng);
        double env = std::min({1.0, double(i) / ramp, double(n - 1 - i) / ramp});
        wav.push_back(0.15 * env * lp);
        t_global += 1.0 / sr;
      }
    }
  }
  return wav;
}

void write_score(const std::string& path, const MusicalScore& score) {
  std::ofstream os(path);
  if (!os) throw DataError("score: cannot open for write: " + path);
  os << "singer " << score.singer_id << "\n";
  for (size_t i = 0; i < score.phones.size(); ++i) {
    os << score.phones[i] << ' ' << score.note_len[i] << ' ' << score.note_pitch[i] << "\n";
  }
}

MusicalScore read_score(const std::string& path, const TrainConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw DataError("score file not found: " + path);
  MusicalScore s;
  std::string word;
  if (!(is >> word) || word != "singer" || !(is >> s.singer_id)) {
    throw DataError("score: malformed header in " + path);
  }
  int64_t phone, len, pitch;
  while (is >> phone >> len >> pitch) {
    s.phones.push_back(phone);
    s.note_len.push_back(len);
    s.note_pitch.push_back(pitch);
  }
  s.validate(cfg);
  return s;
}

namespace {

MelSpectrogram crop_mel(const MelSpectrogram& mel, int64_t start, int64_t frames) {
  if (start + frames > mel.frames) throw DataError("corpus: mel shorter than score durations");
  MelSpectrogram out;
  out.bins = mel.bins;
  out.frames = int(frames);
  out.config = mel.config;
  out.values.resize(size_t(mel.bins) * size_t(frames));
  for (int m = 0; m < mel.bins; ++m)
    for (int64_t l = 0; l < frames; ++l) out.at(m, int(l)) = mel.at(m, int(start + l));
  return out;
}

}  // namespace

void generate_corpus(const TrainConfig& cfg, const std::string& out_dir, uint64_t seed,
                     int items_per_singer) {
  if (items_per_singer < 3) throw DataError("corpus: need at least 3 items per singer");
  std::mt19937_64 rng(seed);
  fs::create_directories(out_dir);
  std::ofstream manifest(out_dir + "/manifest.txt");
  if (!manifest) throw DataError("corpus: cannot write manifest in " + out_dir);

  for (int64_t singer = 0; singer < cfg.num_singers; ++singer) {
    std::string sd = "singer" + std::to_string(singer);
    fs::create_directories(out_dir + "/" + sd);
    for (int i = 0; i < items_per_singer; ++i) {
      MusicalScore score = random_score(cfg, singer, rng);
      std::vector<double> wav = synth_score_audio(score, cfg, rng);
      MelSpectrogram mel = stft_mel(wav, cfg.signal);
      int64_t frames = 0;
      for (int64_t l : score.note_len) frames += l;
      mel = crop_mel(mel, 0, frames);

      std::string stem = sd + "/item" + std::to_string(i);
      write_wav(out_dir + "/" + stem + ".wav", wav, cfg.signal.sample_rate);
      write_mel(out_dir + "/" + stem + ".mel", mel);
      write_score(out_dir + "/" + stem + ".score", score);
      // the last two items of every singer are held out
      const char* split = i >= items_per_singer - 2 ? "heldout" : "train";
      manifest << split << ' ' << stem << ".wav " << stem << ".mel " << stem << ".score\n";
    }
  }
}

Corpus load_corpus(const std::string& dir, const TrainConfig& cfg) {
  std::ifstream manifest(dir + "/manifest.txt");
  if (!manifest) throw DataError("corpus manifest not found: " + dir + "/manifest.txt");
  Corpus corpus;
  std::string split, wav, mel, score;
  while (manifest >> split >> wav >> mel >> score) {
    CorpusItem item;
    item.wav_path = dir + "/" + wav;
    item.mel_path = dir + "/" + mel;
    item.score_path = dir + "/" + score;
    item.score = read_score(item.score_path, cfg);
    item.durations = item.score.note_len;
    item.mel = read_mel(item.mel_path);
    if (item.mel.frames != item.total_frames() || item.mel.bins != cfg.signal.mel_bins) {
      throw DataError("corpus: mel/score mismatch for " + item.mel_path);
    }
    if (split == "train") {
      corpus.train.push_back(std::move(item));
    } else if (split == "heldout") {
      corpus.heldout.push_back(std::move(item));
    } else {
      throw DataError("corpus: unknown split '" + split + "' in manifest");
    }
  }
  if (corpus.train.empty()) throw DataError("corpus: no training items in " + dir);
  return corpus;
}

CorpusItem crop_item(const CorpusItem& item, int max_frames, std::mt19937_64& rng) {
  if (max_frames <= 0 || item.total_frames() <= max_frames) return item;
  size_t np = item.score.phones.size();
  size_t start = size_t(rng() % np);
  int64_t offset = 0;
  for (size_t p = 0; p < start; ++p) offset += item.durations[p];
  size_t end = start;
  int64_t frames = 0;
  while (end < np && frames + item.durations[end] <= max_frames) frames += item.durations[end++];
  if (end == start) {  // a single phone longer than the budget is kept whole
    frames = item.durations[start];
    end = start + 1;
  }
  CorpusItem out;
  out.score.singer_id = item.score.singer_id;
  for (size_t p = start; p < end; ++p) {
    out.score.phones.push_back(item.score.phones[p]);
    out.score.note_len.push_back(item.score.note_len[p]);
    out.score.note_pitch.push_back(item.score.note_pitch[p]);
  }
  out.durations.assign(item.durations.begin() + long(start), item.durations.begin() + long(end));
  out.mel = crop_mel(item.mel, offset, frames);
  out.wav_path = item.wav_path;
  out.mel_path = item.mel_path;
  out.score_path = item.score_path;
  return out;
}

Tensor mel_to_tensor(const MelSpectrogram& mel) {
  std::vector<double> v(mel.values.begin(), mel.values.end());
  return Tensor::leaf({mel.bins, mel.frames}, std::move(v));
}

Batch load_batch(const std::vector<CorpusItem>& items, const std::vector<size_t>& picks,
                 const TrainConfig& cfg, std::mt19937_64& rng) {
  if (picks.empty()) throw DataError("load_batch: empty selection");
  Batch batch;
  int64_t lmax = 0;
  for (size_t pick : picks) {
    if (pick >= items.size()) throw DataError("load_batch: index out of range");
    CorpusItem c = crop_item(items[pick], cfg.max_frames, rng);
    TrainSample s;
    s.score = c.score;
    s.durations = c.durations;
    s.mel = mel_to_tensor(c.mel);
    lmax = std::max(lmax, s.mel.dim(1));
    batch.samples.push_back(std::move(s));
  }
  int64_t b = int64_t(batch.samples.size()), m = cfg.signal.mel_bins;
  std::vector<double> padded(size_t(b * m * lmax), 0.0);
  std::vector<double> mask(size_t(b * lmax), 0.0);
  for (int64_t i = 0; i < b; ++i) {
    const Tensor& mel = batch.samples[size_t(i)].mel;
    int64_t l = mel.dim(1);
    for (int64_t r = 0; r < m; ++r)
      for (int64_t j = 0; j < l; ++j) {
        padded[size_t((i * m + r) * lmax + j)] = mel.data()[size_t(r * l + j)];
      }
    for (int64_t j = 0; j < l; ++j) mask[size_t(i * lmax + j)] = 1.0;
  }
  batch.padded = Tensor::leaf({b, m, lmax}, std::move(padded));
  batch.mask = Tensor::leaf({b, lmax}, std::move(mask));
  return batch;
}

Tensor masked_l1(const Tensor& a, const Tensor& b, const Tensor& mask) {
  if (a.shape() != b.shape() || a.shape().size() != 3 || mask.shape().size() != 2 ||
      mask.dim(0) != a.dim(0) || mask.dim(1) != a.dim(2)) {
    throw ShapeError("masked_l1: expected a,b B x M x L and mask B x L");
  }
  Tensor mb = broadcast_to(reshape(mask, {a.dim(0), 1, a.dim(2)}), a.shape());
  Tensor num = sum(mul(leaky_relu(sub(a, b), -1.0), mb));
  Tensor den = mul_scalar(sum(mask), double(a.dim(1)));
  return div(num, den);
}

}  // namespace svs
