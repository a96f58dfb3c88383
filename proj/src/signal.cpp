#include "svs/signal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace svs {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_filterbank(const SignalConfig& cfg) {
  int nfft = cfg.frame;
  int nbins = nfft / 2 + 1;
  double fmax = cfg.fmax > 0.0 ? cfg.fmax : cfg.sample_rate / 2.0;
  double mlo = hz_to_mel(cfg.fmin), mhi = hz_to_mel(fmax);
  std::vector<double> centers(static_cast<size_t>(cfg.mel_bins) + 2);
  for (int i = 0; i < cfg.mel_bins + 2; ++i) {
    centers[static_cast<size_t>(i)] = mel_to_hz(mlo + (mhi - mlo) * i / (cfg.mel_bins + 1));
  }
  std::vector<double> fb(static_cast<size_t>(cfg.mel_bins) * nbins, 0.0);
  for (int m = 0; m < cfg.mel_bins; ++m) {
    double lo = centers[static_cast<size_t>(m)];
    double c = centers[static_cast<size_t>(m) + 1];
    double hi = centers[static_cast<size_t>(m) + 2];
    for (int k = 0; k < nbins; ++k) {
      double f = static_cast<double>(k) * cfg.sample_rate / nfft;
      double w = 0.0;
      if (f > lo && f < c) w = (f - lo) / (c - lo);
      else if (f >= c && f < hi) w = (hi - f) / (hi - c);
      fb[static_cast<size_t>(m) * nbins + k] = w;
    }
  }
  return fb;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw DataError("fft: size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j], v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

namespace {

std::vector<double> hann(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  }
  return w;
}

double sample_reflect(const std::vector<double>& x, int64_t i) {
  int64_t n = static_cast<int64_t>(x.size());
  if (n == 1) return x[0];
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return x[static_cast<size_t>(i)];
}

// complex spectra per frame; center-padded (reflect), Hann window
std::vector<std::vector<std::complex<double>>> stft(const std::vector<double>& wav,
                                                    const SignalConfig& cfg) {
  int frames = static_cast<int>(wav.size()) / cfg.hop + 1;
  std::vector<double> win = hann(cfg.frame);
  std::vector<std::vector<std::complex<double>>> out(static_cast<size_t>(frames));
  for (int l = 0; l < frames; ++l) {
    std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.frame));
    int64_t start = static_cast<int64_t>(l) * cfg.hop - cfg.frame / 2;
    for (int i = 0; i < cfg.frame; ++i) {
      buf[static_cast<size_t>(i)] = sample_reflect(wav, start + i) * win[static_cast<size_t>(i)];
    }
    fft(buf, false);
    buf.resize(static_cast<size_t>(cfg.frame / 2 + 1));
    out[static_cast<size_t>(l)] = std::move(buf);
  }
  return out;
}

}  // namespace

MelSpectrogram stft_mel(const std::vector<double>& wav, const SignalConfig& cfg) {
  if (wav.empty()) throw DataError("stft_mel: empty input");
  auto spec = stft(wav, cfg);
  int frames = static_cast<int>(spec.size());
  int nbins = cfg.frame / 2 + 1;
  std::vector<double> fb = mel_filterbank(cfg);
  MelSpectrogram mel;
  mel.bins = cfg.mel_bins;
  mel.frames = frames;
  mel.config = cfg;
  mel.values.assign(static_cast<size_t>(cfg.mel_bins) * frames, 0.0f);
  std::vector<double> power(static_cast<size_t>(nbins));
  for (int l = 0; l < frames; ++l) {
    for (int k = 0; k < nbins; ++k) power[static_cast<size_t>(k)] = std::norm(spec[static_cast<size_t>(l)][static_cast<size_t>(k)]);
    for (int m = 0; m < cfg.mel_bins; ++m) {
      double e = 0.0;
      const double* row = &fb[static_cast<size_t>(m) * nbins];
      for (int k = 0; k < nbins; ++k) e += row[k] * power[static_cast<size_t>(k)];
      mel.at(m, l) = static_cast<float>(std::log(std::max(e, cfg.log_floor)));
    }
  }
  return mel;
}

std::vector<std::vector<double>> mel_cepstrum(const MelSpectrogram& mel, int K) {
  int m = mel.bins;
  if (K < 1 || K >= m) throw DataError("mel_cepstrum: need 1 <= K < bins");
  std::vector<std::vector<double>> out(static_cast<size_t>(mel.frames));
  double scale = std::sqrt(2.0 / m);
  for (int l = 0; l < mel.frames; ++l) {
    std::vector<double> c(static_cast<size_t>(K));
    for (int k = 1; k <= K; ++k) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) {
        s += mel.at(i, l) * std::cos(M_PI * k * (i + 0.5) / m);
      }
      c[static_cast<size_t>(k) - 1] = scale * s;
    }
    out[static_cast<size_t>(l)] = std::move(c);
  }
  return out;
}

F0Track extract_f0(const std::vector<double>& wav, const SignalConfig& cfg,
                   const F0Config& f0cfg) {
  if (cfg.sample_rate < 8000) throw DataError("extract_f0: sample rate below 8 kHz");
  int frames = static_cast<int>(wav.size()) / cfg.hop + 1;
  int w = f0cfg.window;
  int half = w / 2;  // integration window
  int tau_min = std::max(2, static_cast<int>(cfg.sample_rate / f0cfg.fmax));
  int tau_max = std::min(half - 1, static_cast<int>(cfg.sample_rate / f0cfg.fmin));
  F0Track track;
  track.hz.assign(static_cast<size_t>(frames), 0.0);
  std::vector<double> buf(static_cast<size_t>(w));
  std::vector<double> d(static_cast<size_t>(tau_max) + 1, 0.0);
  std::vector<double> dn(static_cast<size_t>(tau_max) + 1, 1.0);
  for (int l = 0; l < frames; ++l) {
    int64_t start = static_cast<int64_t>(l) * cfg.hop - half;
    double energy = 0.0;
    for (int i = 0; i < w; ++i) {
      int64_t s = start + i;
      buf[static_cast<size_t>(i)] = (s >= 0 && s < static_cast<int64_t>(wav.size()))
                                        ? wav[static_cast<size_t>(s)]
                                        : 0.0;
      energy += buf[static_cast<size_t>(i)] * buf[static_cast<size_t>(i)];
    }
    if (energy / w < 1e-8) continue;  // silence

    for (int tau = 1; tau <= tau_max; ++tau) {
      double s = 0.0;
      for (int j = 0; j < half; ++j) {
        double diff = buf[static_cast<size_t>(j)] - buf[static_cast<size_t>(j + tau)];
        s += diff * diff;
      }
      d[static_cast<size_t>(tau)] = s;
    }
    double cum = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      cum += d[static_cast<size_t>(tau)];
      dn[static_cast<size_t>(tau)] = cum > 0.0 ? d[static_cast<size_t>(tau)] * tau / cum : 1.0;
    }
    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (dn[static_cast<size_t>(tau)] < f0cfg.threshold) {
        while (tau + 1 <= tau_max && dn[static_cast<size_t>(tau) + 1] < dn[static_cast<size_t>(tau)]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) continue;  // unvoiced
    double tau_hat = best;
    if (best > 1 && best < tau_max) {
      double a = dn[static_cast<size_t>(best) - 1], b = dn[static_cast<size_t>(best)],
             c = dn[static_cast<size_t>(best) + 1];
      double denom = a - 2.0 * b + c;
      if (std::fabs(denom) > 1e-12) tau_hat += 0.5 * (a - c) / denom;
    }
    double f0 = cfg.sample_rate / tau_hat;
    if (f0 >= f0cfg.fmin && f0 <= f0cfg.fmax) track.hz[static_cast<size_t>(l)] = f0;
  }
  return track;
}

std::vector<double> griffin_lim(const MelSpectrogram& mel, int iters) {
  const SignalConfig& cfg = mel.config;
  int nbins = cfg.frame / 2 + 1;
  int frames = mel.frames;
  // nonnegative least-squares inversion of the filterbank
  // (multiplicative updates keep the linear power spectrum sparse)
  std::vector<double> fbv = mel_filterbank(cfg);
  Eigen::MatrixXd fb(mel.bins, nbins);
  for (int m = 0; m < mel.bins; ++m)
    for (int k = 0; k < nbins; ++k) fb(m, k) = fbv[static_cast<size_t>(m) * nbins + k];

  std::vector<std::vector<double>> mag(static_cast<size_t>(frames),
                                       std::vector<double>(static_cast<size_t>(nbins)));
  Eigen::VectorXd melpow(mel.bins);
  for (int l = 0; l < frames; ++l) {
    for (int m = 0; m < mel.bins; ++m) melpow(m) = std::exp(static_cast<double>(mel.at(m, l)));
    Eigen::VectorXd p = fb.transpose() * melpow;
    for (int it = 0; it < 60; ++it) {
      Eigen::VectorXd num = fb.transpose() * melpow;
      Eigen::VectorXd den = fb.transpose() * (fb * p);
      for (int k = 0; k < nbins; ++k) p(k) *= num(k) / (den(k) + 1e-30);
    }
    for (int k = 0; k < nbins; ++k) {
      mag[static_cast<size_t>(l)][static_cast<size_t>(k)] = std::sqrt(std::max(p(k), 0.0));
    }
  }

  int64_t out_len = static_cast<int64_t>(frames - 1) * cfg.hop + cfg.hop;
  std::vector<double> win = hann(cfg.frame);
  std::vector<std::vector<double>> phase(static_cast<size_t>(frames),
                                         std::vector<double>(static_cast<size_t>(nbins), 0.0));
  std::vector<double> wav(static_cast<size_t>(out_len), 0.0);

  auto istft = [&](std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> wsum(out.size(), 0.0);
    std::vector<std::complex<double>> buf(static_cast<size_t>(cfg.frame));
    for (int l = 0; l < frames; ++l) {
      for (int k = 0; k < nbins; ++k) {
        buf[static_cast<size_t>(k)] = std::polar(mag[static_cast<size_t>(l)][static_cast<size_t>(k)],
                                                 phase[static_cast<size_t>(l)][static_cast<size_t>(k)]);
      }
      for (int k = nbins; k < cfg.frame; ++k) buf[static_cast<size_t>(k)] = std::conj(buf[static_cast<size_t>(cfg.frame - k)]);
      fft(buf, true);
      int64_t start = static_cast<int64_t>(l) * cfg.hop - cfg.frame / 2;
      for (int i = 0; i < cfg.frame; ++i) {
        int64_t s = start + i;
        if (s < 0 || s >= static_cast<int64_t>(out.size())) continue;
        out[static_cast<size_t>(s)] += buf[static_cast<size_t>(i)].real() * win[static_cast<size_t>(i)];
        wsum[static_cast<size_t>(s)] += win[static_cast<size_t>(i)] * win[static_cast<size_t>(i)];
      }
    }
    for (size_t i = 0; i < out.size(); ++i) {
      if (wsum[i] > 1e-9) out[i] /= wsum[i];
    }
  };

  for (int it = 0; it < iters; ++it) {
    istft(wav);
    auto spec = stft(wav, cfg);
    for (int l = 0; l < frames && l < static_cast<int>(spec.size()); ++l) {
      for (int k = 0; k < nbins; ++k) {
        phase[static_cast<size_t>(l)][static_cast<size_t>(k)] =
            std::arg(spec[static_cast<size_t>(l)][static_cast<size_t>(k)]);
      }
    }
  }
  istft(wav);
  return wav;
}

// --- WAV 16-bit PCM mono ---

namespace {
void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u16(std::ostream& os, uint16_t v) { os.write(reinterpret_cast<const char*>(&v), 2); }
uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint16_t get_u16(std::istream& is) {
  uint16_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 2);
  return v;
}
}  // namespace

void write_wav(const std::string& path, const std::vector<double>& wav, int sample_rate) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_wav: cannot open " + path);
  uint32_t data_bytes = static_cast<uint32_t>(wav.size() * 2);
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<uint32_t>(sample_rate));
  put_u32(os, static_cast<uint32_t>(sample_rate * 2));
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (double v : wav) {
    double c = std::clamp(v, -1.0, 1.0);
    int16_t s = static_cast<int16_t>(std::lround(c * 32767.0));
    os.write(reinterpret_cast<const char*>(&s), 2);
  }
}

std::vector<double> read_wav(const std::string& path, int* sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_wav: cannot open " + path);
  char tag[5] = {0};
  is.read(tag, 4);
  if (std::strncmp(tag, "RIFF", 4) != 0) throw DataError("read_wav: not a RIFF file: " + path);
  get_u32(is);
  is.read(tag, 4);
  if (std::strncmp(tag, "WAVE", 4) != 0) throw DataError("read_wav: not a WAVE file: " + path);
  int sr = 0, channels = 0, bits = 0;
  std::vector<double> wav;
  while (is.read(tag, 4)) {
    uint32_t sz = get_u32(is);
    if (std::strncmp(tag, "fmt ", 4) == 0) {
      uint16_t fmt = get_u16(is);
      channels = get_u16(is);
      sr = static_cast<int>(get_u32(is));
      get_u32(is);
      get_u16(is);
      bits = get_u16(is);
      if (sz > 16) is.seekg(sz - 16, std::ios::cur);
      if (fmt != 1 || bits != 16) throw DataError("read_wav: only 16-bit PCM supported");
      if (channels != 1) throw DataError("read_wav: only mono supported");
    } else if (std::strncmp(tag, "data", 4) == 0) {
      size_t n = sz / 2;
      wav.resize(n);
      for (size_t i = 0; i < n; ++i) {
        int16_t s = 0;
        is.read(reinterpret_cast<char*>(&s), 2);
        wav[i] = static_cast<double>(s) / 32767.0;
      }
      break;
    } else {
      is.seekg(sz, std::ios::cur);
    }
  }
  if (wav.empty()) throw DataError("read_wav: no data chunk in " + path);
  if (sample_rate) *sample_rate = sr;
  return wav;
}

// --- mel container: magic, version, dims, config echo, float32 payload ---

static const char kMelMagic[4] = {'S', 'V', 'M', 'L'};

void write_mel(const std::string& path, const MelSpectrogram& mel) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("write_mel: cannot open " + path);
  os.write(kMelMagic, 4);
  put_u32(os, 1);  // version
  put_u32(os, static_cast<uint32_t>(mel.bins));
  put_u32(os, static_cast<uint32_t>(mel.frames));
  put_u32(os, static_cast<uint32_t>(mel.config.sample_rate));
  put_u32(os, static_cast<uint32_t>(mel.config.hop));
  put_u32(os, static_cast<uint32_t>(mel.config.frame));
  os.write(reinterpret_cast<const char*>(mel.values.data()),
           static_cast<std::streamsize>(mel.values.size() * sizeof(float)));
}

MelSpectrogram read_mel(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("read_mel: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kMelMagic, 4) != 0) throw DataError("read_mel: bad magic in " + path);
  uint32_t version = get_u32(is);
  if (version != 1) throw DataError("read_mel: unsupported version");
  MelSpectrogram mel;
  mel.bins = static_cast<int>(get_u32(is));
  mel.frames = static_cast<int>(get_u32(is));
  mel.config.mel_bins = mel.bins;
  mel.config.sample_rate = static_cast<int>(get_u32(is));
  mel.config.hop = static_cast<int>(get_u32(is));
  mel.config.frame = static_cast<int>(get_u32(is));
  mel.values.resize(static_cast<size_t>(mel.bins) * mel.frames);
  is.read(reinterpret_cast<char*>(mel.values.data()),
          static_cast<std::streamsize>(mel.values.size() * sizeof(float)));
  if (!is) throw DataError("read_mel: truncated payload in " + path);
  return mel;
}

}  // namespace svs
