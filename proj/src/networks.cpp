#include "svs/networks.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace svs {

void MusicalScore::validate(const TrainConfig& cfg) const {
  if (phones.empty()) throw DataError("score: empty phone sequence");
  if (note_len.size() != phones.size() || note_pitch.size() != phones.size()) {
    throw DataError("score: phones/note_len/note_pitch length mismatch");
  }
  for (int64_t p : phones) {
    if (p < 0 || p >= cfg.phone_vocab) throw DataError("score: phone id out of range");
  }
  for (int64_t l : note_len) {
    if (l < 1 || l > cfg.max_note_len) throw DataError("score: note length out of range");
  }
  for (int64_t p : note_pitch) {
    if (p < cfg.pitch_min || p > cfg.pitch_max) throw DataError("score: note pitch out of range");
  }
  if (singer_id < 0 || singer_id >= cfg.num_singers) throw DataError("score: singer id out of range");
}

Tensor& ParamSet::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw AutodiffError("ParamSet: duplicate parameter " + name);
  index_[name] = items_.size();
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw AutodiffError("ParamSet: unknown parameter " + name);
  return items_[it->second].second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw AutodiffError("ParamSet: unknown parameter " + name);
  return items_[it->second].second;
}

bool ParamSet::has(const std::string& name) const { return index_.count(name) > 0; }

bool ParamSet::all_finite() const {
  for (const auto& [name, t] : items_) {
    for (double v : t.data()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace {

void add_linear(ParamSet& p, const std::string& prefix, int64_t in, int64_t out,
                std::mt19937_64& rng) {
  p.add(prefix + ".w", Tensor::randn({in, out}, rng, 1.0 / std::sqrt(double(in)), true));
  p.add(prefix + ".b", Tensor::zeros({out}, true));
}

void add_conv1d(ParamSet& p, const std::string& prefix, int64_t cout, int64_t cin, int64_t k,
                std::mt19937_64& rng) {
  p.add(prefix + ".w", Tensor::randn({cout, cin, k}, rng, 1.0 / std::sqrt(double(cin * k)), true));
  p.add(prefix + ".b", Tensor::zeros({cout}, true));
}

void add_conv2d(ParamSet& p, const std::string& prefix, int64_t cout, int64_t cin, int64_t kh,
                int64_t kw, std::mt19937_64& rng) {
  p.add(prefix + ".w",
        Tensor::randn({cout, cin, kh, kw}, rng, 1.0 / std::sqrt(double(cin * kh * kw)), true));
  p.add(prefix + ".b", Tensor::zeros({cout}, true));
}

void add_layer_norm(ParamSet& p, const std::string& prefix, int64_t dim) {
  p.add(prefix + ".gain", Tensor::leaf({dim}, std::vector<double>(size_t(dim), 1.0), true));
  p.add(prefix + ".bias", Tensor::zeros({dim}, true));
}

Tensor slice_rows(const Tensor& x, int64_t r0, int64_t r1) {
  int64_t cols = x.size() / x.dim(0);
  auto idx = std::make_shared<std::vector<int64_t>>();
  idx->reserve(size_t((r1 - r0) * cols));
  for (int64_t r = r0; r < r1; ++r)
    for (int64_t c = 0; c < cols; ++c) idx->push_back(r * cols + c);
  Shape out = x.shape();
  out[0] = r1 - r0;
  return take(x, idx, out);
}

/// Repeat row p of a [L_p, C] tensor dur[p] times -> [sum(dur), C].
Tensor expand_rows(const Tensor& x, const std::vector<int64_t>& dur) {
  int64_t c = x.dim(1);
  auto idx = std::make_shared<std::vector<int64_t>>();
  for (size_t p = 0; p < dur.size(); ++p)
    for (int64_t r = 0; r < dur[p]; ++r)
      for (int64_t ch = 0; ch < c; ++ch) idx->push_back(int64_t(p) * c + ch);
  int64_t frames = int64_t(idx->size()) / c;
  return take(x, idx, {frames, c});
}

Tensor conv_rows(const Tensor& x, const Tensor& w, const Tensor& b, int64_t dilation = 1) {
  // conv1d over a rows-are-positions [L, C] layout
  return transpose(conv1d(transpose(x), w, b, dilation));
}

int64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return int64_t(h);
}

}  // namespace

Tensor sinusoidal_embedding(double pos, int64_t dim) {
  std::vector<double> v(static_cast<size_t>(dim), 0.0);
  int64_t half = dim / 2;
  for (int64_t i = 0; i < half; ++i) {
    double freq = std::pow(10000.0, -double(i) / double(half));
    v[size_t(i)] = std::sin(pos * freq);
    v[size_t(half + i)] = std::cos(pos * freq);
  }
  return Tensor::leaf({1, dim}, std::move(v));
}

ParamSet init_generator_params(const TrainConfig& cfg, std::mt19937_64& rng) {
  ParamSet p;
  int64_t h = cfg.hidden_dim;
  p.add("enc.phone_embed", Tensor::randn({cfg.phone_vocab, h}, rng, 0.1, true));
  p.add("enc.len_embed", Tensor::randn({cfg.max_note_len + 1, h}, rng, 0.1, true));
  p.add("enc.pitch_embed", Tensor::randn({cfg.pitch_vocab(), h}, rng, 0.1, true));
  p.add("enc.singer_embed", Tensor::randn({cfg.num_singers, h}, rng, 0.1, true));
  for (int i = 0; i < cfg.enc_layers; ++i) {
    std::string l = "enc.l" + std::to_string(i);
    add_linear(p, l + ".q", h, h, rng);
    add_linear(p, l + ".k", h, h, rng);
    add_linear(p, l + ".v", h, h, rng);
    add_linear(p, l + ".o", h, h, rng);
    add_layer_norm(p, l + ".ln1", h);
    add_conv1d(p, l + ".ffn1", cfg.ffn_dim, h, cfg.enc_kernel, rng);
    add_conv1d(p, l + ".ffn2", h, cfg.ffn_dim, 1, rng);
    add_layer_norm(p, l + ".ln2", h);
  }
  for (int i = 0; i < cfg.dur_layers; ++i) {
    std::string l = "dur.l" + std::to_string(i);
    add_conv1d(p, l, h, h, cfg.dur_kernel, rng);
    add_layer_norm(p, l + ".ln", h);
  }
  add_linear(p, "dur.head", h, 1, rng);

  if (cfg.preset == Preset::kFft) {
    add_conv1d(p, "fft.c1", h, h, 3, rng);
    add_conv1d(p, "fft.c2", h, h, 3, rng);
    add_linear(p, "fft.out", h, cfg.signal.mel_bins, rng);
    return p;
  }

  int64_t r = cfg.residual_channels, td = cfg.time_embed_dim, m = cfg.signal.mel_bins;
  add_linear(p, "dec.t1", td, td, rng);
  add_linear(p, "dec.t2", td, td, rng);
  add_conv1d(p, "dec.in", r, m, 1, rng);
  for (int i = 0; i < cfg.wavenet_blocks; ++i) {
    std::string l = "dec.b" + std::to_string(i);
    add_conv1d(p, l + ".dil", 2 * r, r, cfg.wavenet_kernel, rng);
    add_linear(p, l + ".t", td, 2 * r, rng);
    add_conv1d(p, l + ".cond", 2 * r, h, 1, rng);
    // the last block's residual branch would be dead weight
    if (i + 1 < cfg.wavenet_blocks) add_conv1d(p, l + ".res", r, r, 1, rng);
    add_conv1d(p, l + ".skip", r, r, 1, rng);
  }
  add_conv1d(p, "dec.post1", r, r, 1, rng);
  add_conv1d(p, "dec.post2", m, r, 1, rng);
  return p;
}

ParamSet init_discriminator_params(const TrainConfig& cfg, std::mt19937_64& rng) {
  ParamSet p;
  int64_t cs = cfg.disc_cond_channels, cv = cfg.id_embed_dim, td = cfg.time_embed_dim;
  p.add("disc.phone_embed", Tensor::randn({cfg.phone_vocab, cs}, rng, 0.1, true));
  p.add("disc.len_embed", Tensor::randn({cfg.max_note_len + 1, cs}, rng, 0.1, true));
  p.add("disc.pitch_embed", Tensor::randn({cfg.pitch_vocab(), cs}, rng, 0.1, true));
  p.add("disc.singer_embed", Tensor::randn({cfg.num_singers, cv}, rng, 0.1, true));
  add_conv1d(p, "disc.score_conv", cs, cs, 3, rng);
  int64_t cin = 2;
  for (int i = 0; i < cfg.disc_blocks; ++i) {
    std::string l = "disc.b" + std::to_string(i);
    int64_t cout = cfg.disc_base_channels << i;
    add_conv2d(p, l + ".c1", cout, cin, 3, 3, rng);
    add_conv2d(p, l + ".c2", cout, cout, 3, 3, rng);
    add_conv2d(p, l + ".sc", cout, cin, 1, 1, rng);
    add_linear(p, l + ".t", td, cout, rng);
    if (i % 2 == 1) {  // conditional blocks alternate, starting unconditional
      add_linear(p, l + ".mod_ms", cs, 2 * cout, rng);
      add_linear(p, l + ".mod_id", cv, 2 * cout, rng);
    }
    cin = cout;
  }
  add_linear(p, "disc.head", cin, 1, rng);
  return p;
}

EncodedScore encode_score(const MusicalScore& score, const ParamSet& params,
                          const TrainConfig& cfg, const std::vector<int64_t>* gt_durations) {
  score.validate(cfg);
  int64_t lp = int64_t(score.length());
  int64_t h = cfg.hidden_dim;

  std::vector<int64_t> len_ids = score.note_len;
  Tensor x = add(embed(params.at("enc.phone_embed"), score.phones),
                 embed(params.at("enc.len_embed"), len_ids));
  std::vector<Tensor> pos;
  pos.reserve(size_t(lp));
  for (int64_t i = 0; i < lp; ++i) pos.push_back(sinusoidal_embedding(double(i), h));
  x = add(x, concat0(pos));

  for (int i = 0; i < cfg.enc_layers; ++i) {
    std::string l = "enc.l" + std::to_string(i);
    Tensor q = linear(x, params.at(l + ".q.w"), params.at(l + ".q.b"));
    Tensor k = linear(x, params.at(l + ".k.w"), params.at(l + ".k.b"));
    Tensor v = linear(x, params.at(l + ".v.w"), params.at(l + ".v.b"));
    Tensor scores = mul_scalar(matmul(q, transpose(k)), 1.0 / std::sqrt(double(h)));
    Tensor attn = matmul(softmax_last(scores), v);
    attn = linear(attn, params.at(l + ".o.w"), params.at(l + ".o.b"));
    x = layer_norm(add(x, attn), params.at(l + ".ln1.gain"), params.at(l + ".ln1.bias"));
    Tensor f = conv_rows(x, params.at(l + ".ffn1.w"), params.at(l + ".ffn1.b"));
    f = conv_rows(relu(f), params.at(l + ".ffn2.w"), params.at(l + ".ffn2.b"));
    x = layer_norm(add(x, f), params.at(l + ".ln2.gain"), params.at(l + ".ln2.bias"));
  }

  Tensor d = x;
  for (int i = 0; i < cfg.dur_layers; ++i) {
    std::string l = "dur.l" + std::to_string(i);
    d = relu(conv_rows(d, params.at(l + ".w"), params.at(l + ".b")));
    d = layer_norm(d, params.at(l + ".ln.gain"), params.at(l + ".ln.bias"));
  }
  Tensor dur_pred = reshape(linear(d, params.at("dur.head.w"), params.at("dur.head.b")), {lp});

  std::vector<int64_t> durations;
  if (gt_durations != nullptr) {
    if (int64_t(gt_durations->size()) != lp) throw DataError("encode_score: duration count mismatch");
    durations = *gt_durations;
    for (int64_t dv : durations) {
      if (dv < 1) throw DataError("encode_score: ground-truth duration < 1");
    }
  } else {
    durations.reserve(size_t(lp));
    const auto& dp = dur_pred.data();
    for (int64_t i = 0; i < lp; ++i) {
      durations.push_back(std::max<int64_t>(1, int64_t(std::llround(dp[size_t(i)]))));
    }
  }

  Tensor expanded = expand_rows(x, durations);
  Tensor pitch_rows = embed(params.at("enc.pitch_embed"), [&] {
    std::vector<int64_t> ids;
    ids.reserve(size_t(lp));
    for (int64_t pv : score.note_pitch) ids.push_back(pv - cfg.pitch_min);
    return ids;
  }());
  expanded = add(expanded, expand_rows(pitch_rows, durations));
  // Singer identity enters the generator here, at the conditioning sequence
  // shared by every decoder step.
  Tensor v_id = embed(params.at("enc.singer_embed"), {score.singer_id});
  expanded = add(expanded, broadcast_to(v_id, expanded.shape()));

  EncodedScore out;
  out.ms = transpose(expanded);
  out.dur_pred = dur_pred;
  out.frames = expanded.dim(0);
  return out;
}

Tensor diffusion_decoder(const Tensor& x_t, int t, const Tensor& ms, const ParamSet& params,
                         const TrainConfig& cfg) {
  if (x_t.shape().size() != 2 || x_t.dim(0) != cfg.signal.mel_bins) {
    throw ShapeError("diffusion_decoder: expected mel_bins x L input");
  }
  if (ms.shape().size() != 2 || ms.dim(0) != cfg.hidden_dim || ms.dim(1) != x_t.dim(1)) {
    throw ShapeError("diffusion_decoder: conditioning shape mismatch");
  }
  int64_t r = cfg.residual_channels, l = x_t.dim(1);
  Tensor temb = sinusoidal_embedding(double(t), cfg.time_embed_dim);
  temb = silu(linear(temb, params.at("dec.t1.w"), params.at("dec.t1.b")));
  temb = silu(linear(temb, params.at("dec.t2.w"), params.at("dec.t2.b")));

  Tensor h = relu(conv1d(x_t, params.at("dec.in.w"), params.at("dec.in.b")));
  Tensor skip;
  for (int i = 0; i < cfg.wavenet_blocks; ++i) {
    std::string bl = "dec.b" + std::to_string(i);
    int64_t dil = int64_t(1) << (i % cfg.dilation_cycle);
    Tensor y = conv1d(h, params.at(bl + ".dil.w"), params.at(bl + ".dil.b"), dil);
    Tensor tp = linear(temb, params.at(bl + ".t.w"), params.at(bl + ".t.b"));
    y = add(y, broadcast_to(transpose(tp), {2 * r, l}));
    y = add(y, conv1d(ms, params.at(bl + ".cond.w"), params.at(bl + ".cond.b")));
    Tensor z = mul(tanh_(slice_rows(y, 0, r)), sigmoid(slice_rows(y, r, 2 * r)));
    if (i + 1 < cfg.wavenet_blocks) {
      h = add(h, conv1d(z, params.at(bl + ".res.w"), params.at(bl + ".res.b")));
    }
    Tensor s = conv1d(z, params.at(bl + ".skip.w"), params.at(bl + ".skip.b"));
    skip = skip.defined() ? add(skip, s) : s;
  }
  Tensor out = relu(skip);
  out = relu(conv1d(out, params.at("dec.post1.w"), params.at("dec.post1.b")));
  return conv1d(out, params.at("dec.post2.w"), params.at("dec.post2.b"));
}

Tensor fft_decoder(const Tensor& ms, const ParamSet& params, const TrainConfig& cfg) {
  if (ms.shape().size() != 2 || ms.dim(0) != cfg.hidden_dim) {
    throw ShapeError("fft_decoder: expected hidden_dim x L input");
  }
  Tensor h = relu(conv1d(ms, params.at("fft.c1.w"), params.at("fft.c1.b")));
  h = relu(conv1d(h, params.at("fft.c2.w"), params.at("fft.c2.b")));
  return transpose(linear(transpose(h), params.at("fft.out.w"), params.at("fft.out.b")));
}

Tensor lbmod_project(const Tensor& ms, const Tensor& v, const Tensor& w_ms, const Tensor& b_ms,
                     const Tensor& w_id, const Tensor& b_id) {
  if (ms.shape().size() != 2) throw ShapeError("lbmod_project: ms must be 2-D");
  Tensor s_ms = linear(transpose(ms), w_ms, b_ms);                    // W x 2C
  Tensor s_id = linear(reshape(v, {1, v.size()}), w_id, b_id);        // 1 x 2C
  return transpose(add(s_ms, broadcast_to(s_id, s_ms.shape())));      // 2C x W
}

Tensor lbmod_apply(const Tensor& y, const Tensor& s) {
  if (y.shape().size() != 3 || s.shape().size() != 2) {
    throw ShapeError("lbmod_apply: expected y C x H x W and s 2C x W");
  }
  int64_t c = y.dim(0), h = y.dim(1), w = y.dim(2);
  if (s.dim(0) != 2 * c || s.dim(1) != w) {
    throw ShapeError("lbmod_apply: modulation shape mismatch");
  }
  Tensor scale = broadcast_to(reshape(slice_rows(s, 0, c), {c, 1, w}), {c, h, w});
  Tensor bias = broadcast_to(reshape(slice_rows(s, c, 2 * c), {c, 1, w}), {c, h, w});
  return add(mul(scale, y), bias);
}

Tensor msc_discriminator(const Tensor& x_prev, const Tensor& x_t, int t,
                         const MusicalScore& score, const std::vector<int64_t>& durations,
                         const ParamSet& params, const TrainConfig& cfg) {
  if (x_prev.shape() != x_t.shape() || x_prev.shape().size() != 2) {
    throw ShapeError("msc_discriminator: x_prev / x_t must be matching 2-D mels");
  }
  score.validate(cfg);
  int64_t m = x_t.dim(0), l = x_t.dim(1);

  std::vector<int64_t> pitch_ids;
  for (int64_t pv : score.note_pitch) pitch_ids.push_back(pv - cfg.pitch_min);
  Tensor tok = add(add(embed(params.at("disc.phone_embed"), score.phones),
                       embed(params.at("disc.len_embed"), score.note_len)),
                   embed(params.at("disc.pitch_embed"), pitch_ids));
  Tensor ms_d = transpose(expand_rows(tok, durations));  // C_s x L_f
  ms_d = conv1d(ms_d, params.at("disc.score_conv.w"), params.at("disc.score_conv.b"));
  Tensor v_id = embed(params.at("disc.singer_embed"), {score.singer_id});
  v_id = reshape(v_id, {cfg.id_embed_dim});

  Tensor temb = sinusoidal_embedding(double(t), cfg.time_embed_dim);
  Tensor h = concat0({reshape(x_prev, {1, m, l}), reshape(x_t, {1, m, l})});
  for (int i = 0; i < cfg.disc_blocks; ++i) {
    std::string bl = "disc.b" + std::to_string(i);
    Tensor y = conv2d(h, params.at(bl + ".c1.w"), params.at(bl + ".c1.b"), 2);
    Tensor tp = linear(temb, params.at(bl + ".t.w"), params.at(bl + ".t.b"));
    y = add(y, broadcast_to(reshape(tp, {y.dim(0), 1, 1}), y.shape()));
    y = leaky_relu(y, 0.2);
    y = leaky_relu(conv2d(y, params.at(bl + ".c2.w"), params.at(bl + ".c2.b")), 0.2);
    Tensor sc = conv2d(h, params.at(bl + ".sc.w"), params.at(bl + ".sc.b"), 2);
    h = add(y, sc);
    if (i % 2 == 1) {
      Tensor s = lbmod_project(interp_linear(ms_d, h.dim(2)), v_id, params.at(bl + ".mod_ms.w"),
                               params.at(bl + ".mod_ms.b"), params.at(bl + ".mod_id.w"),
                               params.at(bl + ".mod_id.b"));
      h = lbmod_apply(h, s);
    }
  }
  int64_t c = h.dim(0), hw = h.dim(1) * h.dim(2);
  Tensor pooled = mul_scalar(sum_last(reshape(h, {c, hw})), 1.0 / double(hw));  // C x 1
  Tensor out = linear(transpose(pooled), params.at("disc.head.w"), params.at("disc.head.b"));
  return reshape(out, {});
}

uint64_t arch_hash(const TrainConfig& cfg) {
  std::ostringstream os;
  os << preset_name(cfg.preset) << '\n'
     << cfg.T << '\n'
     << cfg.hidden_dim << ' ' << cfg.enc_layers << ' ' << cfg.enc_kernel << ' ' << cfg.ffn_dim
     << ' ' << cfg.dur_layers << ' ' << cfg.dur_kernel << '\n'
     << cfg.wavenet_blocks << ' ' << cfg.wavenet_kernel << ' ' << cfg.dilation_cycle << ' '
     << cfg.residual_channels << ' ' << cfg.time_embed_dim << '\n'
     << cfg.disc_blocks << ' ' << cfg.disc_base_channels << ' ' << cfg.disc_cond_channels << ' '
     << cfg.id_embed_dim << '\n'
     << cfg.phone_vocab << ' ' << cfg.pitch_min << ' ' << cfg.pitch_max << ' ' << cfg.num_singers
     << ' ' << cfg.max_note_len << '\n'
     << cfg.signal.sample_rate << ' ' << cfg.signal.hop << ' ' << cfg.signal.frame << ' '
     << cfg.signal.mel_bins << '\n'
     << cfg.mel_norm_mean << ' ' << cfg.mel_norm_scale << '\n';
  return uint64_t(fnv1a(os.str()));
}

namespace {

constexpr uint32_t kCkptMagic = 0x4b435653;  // "SVCK"
constexpr uint32_t kCkptVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_str(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), std::streamsize(s.size()));
}
uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t read_u64(std::istream& is) {
  uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::string read_str(std::istream& is) {
  uint64_t n = read_u64(is);
  if (n > (1ULL << 30)) throw DataError("checkpoint: corrupt string length");
  std::string s(n, '\0');
  is.read(s.data(), std::streamsize(n));
  return s;
}

void write_params(std::ostream& os, const ParamSet& p) {
  write_u64(os, p.items().size());
  for (const auto& [name, t] : p.items()) {
    write_str(os, name);
    write_u32(os, uint32_t(t.shape().size()));
    for (int64_t d : t.shape()) write_u64(os, uint64_t(d));
    os.write(reinterpret_cast<const char*>(t.data().data()),
             std::streamsize(t.data().size() * sizeof(double)));
  }
}

ParamSet read_params(std::istream& is) {
  ParamSet p;
  uint64_t count = read_u64(is);
  for (uint64_t i = 0; i < count; ++i) {
    std::string name = read_str(is);
    uint32_t ndim = read_u32(is);
    Shape shape;
    int64_t total = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      shape.push_back(int64_t(read_u64(is)));
      total *= shape.back();
    }
    if (total < 0 || total > (1LL << 28)) throw DataError("checkpoint: corrupt tensor shape");
    std::vector<double> data(static_cast<size_t>(total), 0.0);
    is.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size() * sizeof(double)));
    if (!is) throw DataError("checkpoint: truncated tensor payload");
    p.add(name, Tensor::leaf(shape, std::move(data), true));
  }
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamSet& generator,
                     const ParamSet* discriminator, const TrainConfig& cfg) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open for write: " + path);
  write_u32(os, kCkptMagic);
  write_u32(os, kCkptVersion);
  write_u64(os, arch_hash(cfg));
  write_str(os, config_echo(cfg));
  write_params(os, generator);
  os.put(discriminator != nullptr ? 1 : 0);
  if (discriminator != nullptr) write_params(os, *discriminator);
  if (!os) throw DataError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint not found: " + path);
  if (read_u32(is) != kCkptMagic) throw DataError("checkpoint: bad magic: " + path);
  uint32_t version = read_u32(is);
  if (version != kCkptVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.arch_hash = read_u64(is);
  ck.config_echo = read_str(is);
  ck.generator = read_params(is);
  int flag = is.get();
  if (flag == 1) ck.discriminator = read_params(is);
  if (!is) throw DataError("checkpoint: truncated file: " + path);
  return ck;
}

}  // namespace svs
