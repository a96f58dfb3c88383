#pragma once

#include <complex>
#include <string>
#include <vector>

#include "svs/tensor.hpp"

namespace svs {

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SignalConfig {
  int sample_rate = 22050;
  int hop = 256;
  int frame = 1024;  // power of two
  int mel_bins = 80;
  double fmin = 0.0;
  double fmax = 0.0;  // 0 = Nyquist
  double log_floor = 1e-5;
};

/// Log-mel energies, M bins x L_f frames, row-major, natural log with floor.
struct MelSpectrogram {
  int bins = 0;
  int frames = 0;
  std::vector<float> values;  // bins * frames
  SignalConfig config;

  float& at(int m, int l) { return values[static_cast<size_t>(m) * frames + l]; }
  float at(int m, int l) const { return values[static_cast<size_t>(m) * frames + l]; }
};

/// Per-frame F0 in Hz, 0 = unvoiced; hop matches the mel hop.
struct F0Track {
  std::vector<double> hz;
};

// mel scale: 2595 log10(1 + f/700)
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular HTK-style filterbank, mel_bins x (frame/2 + 1).
std::vector<double> mel_filterbank(const SignalConfig& cfg);

/// In-place radix-2 FFT (and inverse) for power-of-two sizes.
void fft(std::vector<std::complex<double>>& a, bool inverse);

/// Center-padded Hann STFT magnitude -> mel filterbank -> log with floor.
/// L_f = floor(samples / hop) + 1.
MelSpectrogram stft_mel(const std::vector<double>& wav, const SignalConfig& cfg);

/// Orthonormal DCT-II cepstrum per frame; returns frames x K, c0 excluded.
std::vector<std::vector<double>> mel_cepstrum(const MelSpectrogram& mel, int K);

struct F0Config {
  double fmin = 50.0;
  double fmax = 1100.0;
  double threshold = 0.15;
  int window = 1024;
};

/// YIN difference-function pitch tracker with cumulative-mean normalization,
/// absolute-threshold voicing and parabolic lag interpolation.
F0Track extract_f0(const std::vector<double>& wav, const SignalConfig& cfg,
                   const F0Config& f0cfg = {});

/// Approximate waveform from a mel spectrogram: pseudo-inverse filterbank to
/// linear magnitude, then Griffin-Lim phase recovery.
std::vector<double> griffin_lim(const MelSpectrogram& mel, int iters = 32);

// --- file formats ---
void write_wav(const std::string& path, const std::vector<double>& wav, int sample_rate);
std::vector<double> read_wav(const std::string& path, int* sample_rate = nullptr);

/// Binary mel container; bit-exact round trip.
void write_mel(const std::string& path, const MelSpectrogram& mel);
MelSpectrogram read_mel(const std::string& path);

}  // namespace svs
