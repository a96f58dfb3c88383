#include "svs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace svs {

namespace {

double frame_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

DtwPath dtw_align(const std::vector<std::vector<double>>& a,
                  const std::vector<std::vector<double>>& b, double* total_cost) {
  int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  if (na == 0 || nb == 0) throw DataError("dtw_align: empty sequence");
  const double inf = 1e300;
  std::vector<double> cost(static_cast<size_t>(na) * nb, inf);
  auto c = [&](int i, int j) -> double& { return cost[static_cast<size_t>(i) * nb + j]; };
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      double d = frame_dist(a[static_cast<size_t>(i)], b[static_cast<size_t>(j)]);
      double best = 0.0;
      if (i > 0 || j > 0) {
        best = inf;
        if (i > 0 && j > 0) best = std::min(best, c(i - 1, j - 1));
        if (i > 0) best = std::min(best, c(i - 1, j));
        if (j > 0) best = std::min(best, c(i, j - 1));
      }
      c(i, j) = d + best;
    }
  }
  if (total_cost) *total_cost = c(na - 1, nb - 1);
  DtwPath path;
  int i = na - 1, j = nb - 1;
  path.push_back({i, j});
  while (i > 0 || j > 0) {
    double diag = (i > 0 && j > 0) ? c(i - 1, j - 1) : inf;
    double up = i > 0 ? c(i - 1, j) : inf;
    double left = j > 0 ? c(i, j - 1) : inf;
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    path.push_back({i, j});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double mcd(const MelSpectrogram& mel_ref, const MelSpectrogram& mel_syn, DtwPath* path_out) {
  const int K = 13;
  auto cr = mel_cepstrum(mel_ref, K);
  auto cs = mel_cepstrum(mel_syn, K);
  DtwPath path = dtw_align(cr, cs);
  double acc = 0.0;
  for (const auto& [i, j] : path) {
    acc += frame_dist(cr[static_cast<size_t>(i)], cs[static_cast<size_t>(j)]);
  }
  acc /= static_cast<double>(path.size());
  if (path_out) *path_out = std::move(path);
  return 10.0 / std::log(10.0) * std::sqrt(2.0) * acc;
}

namespace {

struct Image {
  int h = 0, w = 0;
  std::vector<double> v;
  double& at(int i, int j) { return v[static_cast<size_t>(i) * w + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * w + j]; }
};

Image downsample2(const Image& x) {
  Image y;
  y.h = x.h / 2;
  y.w = x.w / 2;
  y.v.assign(static_cast<size_t>(y.h) * y.w, 0.0);
  for (int i = 0; i < y.h; ++i)
    for (int j = 0; j < y.w; ++j)
      y.at(i, j) = 0.25 * (x.at(2 * i, 2 * j) + x.at(2 * i + 1, 2 * j) + x.at(2 * i, 2 * j + 1) +
                           x.at(2 * i + 1, 2 * j + 1));
  return y;
}

// mean luminance-comparison and contrast-structure terms over a valid-region
// 11x11 Gaussian window, sigma 1.5, dynamic range L=1
void ssim_terms(const Image& a, const Image& b, double* lum, double* cs) {
  const int win = 11, half = 5;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  static std::vector<double> g;
  if (g.empty()) {
    g.resize(win * win);
    double sum = 0.0;
    for (int i = 0; i < win; ++i)
      for (int j = 0; j < win; ++j) {
        double d2 = (i - half) * (i - half) + (j - half) * (j - half);
        g[static_cast<size_t>(i) * win + j] = std::exp(-d2 / (2.0 * 1.5 * 1.5));
        sum += g[static_cast<size_t>(i) * win + j];
      }
    for (double& v : g) v /= sum;
  }
  double lsum = 0.0, csum = 0.0;
  int count = 0;
  for (int ci = half; ci < a.h - half; ++ci)
    for (int cj = half; cj < a.w - half; ++cj) {
      double ma = 0.0, mb = 0.0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          double wgt = g[static_cast<size_t>(i) * win + j];
          ma += wgt * a.at(ci + i - half, cj + j - half);
          mb += wgt * b.at(ci + i - half, cj + j - half);
        }
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          double wgt = g[static_cast<size_t>(i) * win + j];
          double da = a.at(ci + i - half, cj + j - half) - ma;
          double db = b.at(ci + i - half, cj + j - half) - mb;
          va += wgt * da * da;
          vb += wgt * db * db;
          cov += wgt * da * db;
        }
      lsum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      csum += (2.0 * cov + c2) / (va + vb + c2);
      ++count;
    }
  *lum = lsum / count;
  *cs = csum / count;
}

}  // namespace

MsSsimResult ms_ssim(const MelSpectrogram& mel_ref, const MelSpectrogram& mel_syn) {
  if (mel_ref.bins != mel_syn.bins || mel_ref.frames != mel_syn.frames) {
    throw DataError("ms_ssim: spectrogram shapes differ");
  }
  static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  // joint min-max normalization, dynamic range L = 1
  double lo = 1e300, hi = -1e300;
  for (float v : mel_ref.values) {
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  for (float v : mel_syn.values) {
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  double range = hi > lo ? hi - lo : 1.0;
  Image a, b;
  a.h = b.h = mel_ref.bins;
  a.w = b.w = mel_ref.frames;
  a.v.resize(static_cast<size_t>(a.h) * a.w);
  b.v.resize(a.v.size());
  for (size_t i = 0; i < a.v.size(); ++i) {
    a.v[i] = (mel_ref.values[i] - lo) / range;
    b.v[i] = (mel_syn.values[i] - lo) / range;
  }

  int usable = 0;
  {
    int h = a.h, w = a.w;
    while (usable < 5 && std::min(h, w) >= 11) {
      ++usable;
      h /= 2;
      w /= 2;
    }
  }
  if (usable == 0) throw DataError("ms_ssim: input smaller than the 11x11 window");
  double wsum = 0.0;
  for (int s = 0; s < usable; ++s) wsum += kWeights[s];

  double value = 1.0;
  for (int s = 0; s < usable; ++s) {
    double lum = 0.0, cs = 0.0;
    ssim_terms(a, b, &lum, &cs);
    double w = kWeights[s] / wsum;
    if (s == usable - 1) value *= std::pow(std::max(lum * cs, 0.0), w);
    else value *= std::pow(std::max(cs, 0.0), w);
    if (s + 1 < usable) {
      a = downsample2(a);
      b = downsample2(b);
    }
  }
  MsSsimResult r;
  r.value = value;
  r.scales_used = usable;
  r.reduced_scales = usable < 5;
  return r;
}

F0Metrics f0_metrics(const F0Track& f0_ref, const F0Track& f0_syn, const DtwPath& alignment) {
  std::vector<double> sr, ss;
  for (const auto& [i, j] : alignment) {
    if (i < 0 || j < 0 || i >= static_cast<int>(f0_ref.hz.size()) ||
        j >= static_cast<int>(f0_syn.hz.size())) {
      continue;
    }
    double fr = f0_ref.hz[static_cast<size_t>(i)], fs = f0_syn.hz[static_cast<size_t>(j)];
    if (fr <= 0.0 || fs <= 0.0) continue;  // voiced-voiced pairs only
    sr.push_back(12.0 * std::log2(fr / 55.0));
    ss.push_back(12.0 * std::log2(fs / 55.0));
  }
  F0Metrics m;
  if (sr.size() < 2) return m;
  double n = static_cast<double>(sr.size());
  double se = 0.0, mr = 0.0, msn = 0.0;
  for (size_t i = 0; i < sr.size(); ++i) {
    double d = sr[i] - ss[i];
    se += d * d;
    mr += sr[i];
    msn += ss[i];
  }
  m.rmse_semitones = std::sqrt(se / n);
  mr /= n;
  msn /= n;
  double num = 0.0, dr = 0.0, ds = 0.0;
  for (size_t i = 0; i < sr.size(); ++i) {
    num += (sr[i] - mr) * (ss[i] - msn);
    dr += (sr[i] - mr) * (sr[i] - mr);
    ds += (ss[i] - msn) * (ss[i] - msn);
  }
  if (dr > 0.0 && ds > 0.0) m.pearson = num / std::sqrt(dr * ds);
  return m;
}

EvalReport evaluate_dirs(const std::string& ref_dir, const std::string& syn_dir,
                         const SignalConfig& cfg) {
  namespace fs = std::filesystem;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(ref_dir)) {
    if (e.path().extension() == ".wav") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw DataError("evaluate_dirs: no .wav files in " + ref_dir);

  EvalReport report;
  double sum_ssim = 0.0, sum_mcd = 0.0, sum_rmse = 0.0, sum_corr = 0.0;
  int n_ssim = 0, n_mcd = 0, n_rmse = 0, n_corr = 0;
  for (const std::string& name : names) {
    fs::path syn_path = fs::path(syn_dir) / name;
    if (!fs::exists(syn_path)) throw DataError("evaluate_dirs: missing " + syn_path.string());
    std::vector<double> wr = read_wav((fs::path(ref_dir) / name).string());
    std::vector<double> ws = read_wav(syn_path.string());
    MelSpectrogram mr = stft_mel(wr, cfg);
    MelSpectrogram ms = stft_mel(ws, cfg);

    FileEval fe;
    fe.file = name;
    if (mr.frames == ms.frames) fe.ms_ssim_v = ms_ssim(mr, ms).value;
    DtwPath path;
    fe.mcd_db = mcd(mr, ms, &path);
    F0Metrics fm = f0_metrics(extract_f0(wr, cfg), extract_f0(ws, cfg), path);
    fe.f0_rmse = fm.rmse_semitones;
    fe.f0_corr = fm.pearson;

    if (fe.ms_ssim_v) { sum_ssim += *fe.ms_ssim_v; ++n_ssim; }
    if (fe.mcd_db) { sum_mcd += *fe.mcd_db; ++n_mcd; }
    if (fe.f0_rmse) { sum_rmse += *fe.f0_rmse; ++n_rmse; }
    if (fe.f0_corr) { sum_corr += *fe.f0_corr; ++n_corr; }
    report.files.push_back(std::move(fe));
  }
  report.mean.file = "mean";
  if (n_ssim) report.mean.ms_ssim_v = sum_ssim / n_ssim;
  if (n_mcd) report.mean.mcd_db = sum_mcd / n_mcd;
  if (n_rmse) report.mean.f0_rmse = sum_rmse / n_rmse;
  if (n_corr) report.mean.f0_corr = sum_corr / n_corr;
  return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream os(path);
  if (!os) throw DataError("write_eval_csv: cannot open " + path);
  os << "file,ms_ssim,mcd,f0_rmse,f0_corr\n";
  auto put = [&os](const FileEval& fe) {
    auto cell = [&os](const std::optional<double>& v) {
      if (v) os << *v;
      os << ",";
    };
    os << fe.file << ",";
    cell(fe.ms_ssim_v);
    cell(fe.mcd_db);
    cell(fe.f0_rmse);
    if (fe.f0_corr) os << *fe.f0_corr;
    os << "\n";
  };
  for (const auto& fe : report.files) put(fe);
  put(report.mean);
}

}  // namespace svs
