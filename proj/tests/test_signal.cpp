#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "svs/signal.hpp"

using namespace svs;

namespace {

std::vector<double> sine(double freq, double secs, int sr, double amp = 0.5) {
  std::vector<double> w(static_cast<size_t>(secs * sr));
  for (size_t i = 0; i < w.size(); ++i) w[i] = amp * std::sin(2.0 * M_PI * freq * i / sr);
  return w;
}

SignalConfig small_cfg() {
  SignalConfig c;
  c.mel_bins = 40;
  return c;
}

}  // namespace

TEST_CASE("stft_mel: silence hits the log floor, length contract holds") {
  SignalConfig cfg = small_cfg();
  std::vector<double> wav(22050, 0.0);
  MelSpectrogram mel = stft_mel(wav, cfg);
  CHECK(mel.frames == static_cast<int>(wav.size()) / cfg.hop + 1);
  CHECK(mel.bins == 40);
  float floor_val = static_cast<float>(std::log(1e-5));
  for (float v : mel.values) CHECK(v == floor_val);
  CHECK_THROWS_AS(stft_mel({}, cfg), DataError);
}

TEST_CASE("stft_mel: 440 Hz tone peaks at the filterbank bin nearest 440") {
  SignalConfig cfg = small_cfg();
  MelSpectrogram mel = stft_mel(sine(440.0, 1.0, cfg.sample_rate), cfg);

  // oracle: centers from the same mel-scale formula
  double mlo = hz_to_mel(0.0), mhi = hz_to_mel(cfg.sample_rate / 2.0);
  int want = 0;
  double best = 1e18;
  for (int m = 0; m < cfg.mel_bins; ++m) {
    double center = mel_to_hz(mlo + (mhi - mlo) * (m + 1) / (cfg.mel_bins + 1));
    if (std::fabs(center - 440.0) < best) {
      best = std::fabs(center - 440.0);
      want = m;
    }
  }
  for (int l = 10; l < mel.frames - 10; ++l) {
    int arg = 0;
    for (int m = 1; m < mel.bins; ++m) {
      if (mel.at(m, l) > mel.at(arg, l)) arg = m;
    }
    CHECK(arg == want);
  }
}

TEST_CASE("stft_mel: doubling amplitude adds log(4) in power convention") {
  SignalConfig cfg = small_cfg();
  MelSpectrogram a = stft_mel(sine(440.0, 0.5, cfg.sample_rate, 0.2), cfg);
  MelSpectrogram b = stft_mel(sine(440.0, 0.5, cfg.sample_rate, 0.4), cfg);
  int l = a.frames / 2;
  int peak = 0;
  for (int m = 1; m < a.bins; ++m) {
    if (a.at(m, l) > a.at(peak, l)) peak = m;
  }
  CHECK(b.at(peak, l) - a.at(peak, l) == doctest::Approx(std::log(4.0)).epsilon(1e-6));
}

TEST_CASE("filterbank rows nonnegative, interior columns covered") {
  SignalConfig cfg = small_cfg();
  auto fb = mel_filterbank(cfg);
  int nbins = cfg.frame / 2 + 1;
  for (double v : fb) CHECK(v >= 0.0);
  for (int k = 2; k < nbins - 2; ++k) {
    double colsum = 0.0;
    for (int m = 0; m < cfg.mel_bins; ++m) colsum += fb[static_cast<size_t>(m) * nbins + k];
    CHECK(colsum > 0.0);
  }
}

TEST_CASE("mel cepstrum") {
  SignalConfig cfg = small_cfg();
  MelSpectrogram mel;
  mel.bins = 16;
  mel.frames = 1;
  mel.config = cfg;

  SUBCASE("constant spectrum: all kept coefficients zero") {
    mel.values.assign(16, 2.5f);
    auto c = mel_cepstrum(mel, 13);
    for (double v : c[0]) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("full-order round trip through the inverse transform") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> dist;
    mel.values.resize(16);
    for (auto& v : mel.values) v = static_cast<float>(dist(rng));
    int m = 16;
    auto c = mel_cepstrum(mel, m - 1);
    double c0 = 0.0;
    for (int i = 0; i < m; ++i) c0 += mel.values[static_cast<size_t>(i)];
    c0 *= std::sqrt(1.0 / m);
    for (int i = 0; i < m; ++i) {
      double x = c0 * std::sqrt(1.0 / m);
      for (int k = 1; k < m; ++k) {
        x += std::sqrt(2.0 / m) * c[0][static_cast<size_t>(k) - 1] *
             std::cos(M_PI * k * (i + 0.5) / m);
      }
      CHECK(x == doctest::Approx(static_cast<double>(mel.values[static_cast<size_t>(i)])).epsilon(1e-9));
    }
  }

  SUBCASE("cosine-shaped log-spectrum lights exactly one coefficient") {
    int m = 16, k0 = 3;
    mel.values.resize(16);
    for (int i = 0; i < m; ++i) {
      mel.values[static_cast<size_t>(i)] = static_cast<float>(std::cos(M_PI * k0 * (i + 0.5) / m));
    }
    auto c = mel_cepstrum(mel, m - 1);
    for (int k = 1; k < m; ++k) {
      double want = k == k0 ? std::sqrt(2.0 / m) * m / 2.0 : 0.0;
      CHECK(c[0][static_cast<size_t>(k) - 1] == doctest::Approx(want).epsilon(1e-5));
    }
  }
}

TEST_CASE("extract_f0: pure tone, noise, silence") {
  SignalConfig cfg = small_cfg();
  SUBCASE("220 Hz sine: median within 1 Hz, interior frames voiced") {
    F0Track t = extract_f0(sine(220.0, 1.0, cfg.sample_rate), cfg);
    std::vector<double> voiced;
    size_t lo = 4, hi = t.hz.size() - 4;
    for (size_t i = lo; i < hi; ++i) {
      CHECK(t.hz[i] > 0.0);
      if (t.hz[i] > 0.0) voiced.push_back(t.hz[i]);
    }
    std::sort(voiced.begin(), voiced.end());
    CHECK(voiced[voiced.size() / 2] == doctest::Approx(220.0).epsilon(1.0 / 220.0));
  }
  SUBCASE("white noise mostly unvoiced") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> dist(0.0, 0.3);
    std::vector<double> wav(22050);
    for (auto& v : wav) v = dist(rng);
    F0Track t = extract_f0(wav, cfg);
    int unvoiced = 0;
    for (double f : t.hz) unvoiced += f == 0.0 ? 1 : 0;
    CHECK(unvoiced >= static_cast<int>(0.9 * t.hz.size()));
  }
  SUBCASE("silence all unvoiced, hop-aligned with mel") {
    std::vector<double> wav(11025, 0.0);
    F0Track t = extract_f0(wav, cfg);
    for (double f : t.hz) CHECK(f == 0.0);
    CHECK(t.hz.size() == static_cast<size_t>(stft_mel(wav, cfg).frames));
  }
  SUBCASE("low sample rate rejected") {
    SignalConfig bad = cfg;
    bad.sample_rate = 4000;
    CHECK_THROWS_AS(extract_f0(sine(220.0, 0.5, 4000), bad), DataError);
  }
}

TEST_CASE("griffin_lim round trip") {
  SignalConfig cfg = small_cfg();
  std::vector<double> tone = sine(330.0, 0.6, cfg.sample_rate);
  MelSpectrogram ref = stft_mel(tone, cfg);
  std::vector<double> rec = griffin_lim(ref, 32);
  CHECK(std::llabs(static_cast<long long>(rec.size()) -
                   static_cast<long long>(ref.frames) * cfg.hop) <= cfg.frame);
  MelSpectrogram back = stft_mel(rec, cfg);
  int frames = std::min(ref.frames, back.frames);
  // frame-wise correlation of log-mel columns
  double corr_sum = 0.0;
  int counted = 0;
  for (int l = 2; l < frames - 2; ++l) {
    double ma = 0.0, mb = 0.0;
    for (int m = 0; m < ref.bins; ++m) {
      ma += ref.at(m, l);
      mb += back.at(m, l);
    }
    ma /= ref.bins;
    mb /= ref.bins;
    double num = 0.0, da = 0.0, db = 0.0;
    for (int m = 0; m < ref.bins; ++m) {
      num += (ref.at(m, l) - ma) * (back.at(m, l) - mb);
      da += (ref.at(m, l) - ma) * (ref.at(m, l) - ma);
      db += (back.at(m, l) - mb) * (back.at(m, l) - mb);
    }
    corr_sum += num / std::sqrt(da * db + 1e-12);
    ++counted;
  }
  CHECK(corr_sum / counted > 0.9);
}

TEST_CASE("griffin_lim of a floor-valued mel is near silence") {
  SignalConfig cfg = small_cfg();
  MelSpectrogram mel;
  mel.bins = cfg.mel_bins;
  mel.frames = 20;
  mel.config = cfg;
  mel.values.assign(static_cast<size_t>(mel.bins) * mel.frames,
                    static_cast<float>(std::log(1e-5)));
  std::vector<double> wav = griffin_lim(mel, 8);
  double rms = 0.0;
  for (double v : wav) rms += v * v;
  rms = std::sqrt(rms / static_cast<double>(wav.size()));
  CHECK(rms < 1e-3);
}

TEST_CASE("wav and mel files round trip") {
  SignalConfig cfg = small_cfg();
  std::vector<double> tone = sine(440.0, 0.25, cfg.sample_rate);
  const char* wavpath = "test_signal_tmp.wav";
  write_wav(wavpath, tone, cfg.sample_rate);
  int sr = 0;
  std::vector<double> rd = read_wav(wavpath, &sr);
  CHECK(sr == cfg.sample_rate);
  REQUIRE(rd.size() == tone.size());
  for (size_t i = 0; i < rd.size(); i += 100) CHECK(rd[i] == doctest::Approx(tone[i]).epsilon(1e-3));

  MelSpectrogram mel = stft_mel(tone, cfg);
  const char* melpath = "test_signal_tmp.mel";
  write_mel(melpath, mel);
  MelSpectrogram back = read_mel(melpath);
  CHECK(back.bins == mel.bins);
  CHECK(back.frames == mel.frames);
  CHECK(back.values == mel.values);  // bit-exact
  CHECK(back.config.hop == cfg.hop);
  std::remove(wavpath);
  std::remove(melpath);
}
