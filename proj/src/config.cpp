#include "svs/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace svs {

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::kFft: return "fft";
    case Preset::kDiffL1: return "diff-l1";
    case Preset::kDiffMixed: return "diff-mixed";
    case Preset::kDiffWgan: return "diff-wgan";
  }
  return "?";
}

Preset preset_from_name(const std::string& name) {
  if (name == "fft") return Preset::kFft;
  if (name == "diff-l1") return Preset::kDiffL1;
  if (name == "diff-mixed") return Preset::kDiffMixed;
  if (name == "diff-wgan") return Preset::kDiffWgan;
  throw DataError("unknown preset '" + name + "'");
}

TrainConfig default_config(Preset preset) {
  TrainConfig c;
  c.preset = preset;
  switch (preset) {
    case Preset::kFft:
      c.lambda_recon = 1.0;
      c.lambda_adv = 0.0;
      c.adam_beta1 = 0.9;
      c.adam_beta2 = 0.98;
      break;
    case Preset::kDiffL1:
      c.lambda_recon = 1.0;
      c.lambda_adv = 0.0;
      c.lr_decay = LrDecay::kExp;
      break;
    case Preset::kDiffMixed:
      c.lambda_recon = 1.0;
      c.lambda_adv = 1.0;
      break;
    case Preset::kDiffWgan:
      c.lambda_recon = 0.0;
      c.lambda_adv = 1.0;
      break;
  }
  c.signal.mel_bins = 32;  // desk scale
  return c;
}

void apply_paper_scale(TrainConfig& cfg) {
  cfg.hidden_dim = 256;
  cfg.enc_layers = 4;
  cfg.ffn_dim = 1024;
  cfg.enc_kernel = 9;
  cfg.wavenet_blocks = 20;
  cfg.residual_channels = 256;
  cfg.time_embed_dim = 512;
  cfg.signal.mel_bins = 80;
  cfg.disc_base_channels = 32;
  cfg.disc_cond_channels = 64;
  cfg.max_frames = 0;
}

namespace {

struct Setter {
  std::function<void(TrainConfig&, const std::string&)> fn;
};

int to_int(const std::string& v) { return std::stoi(v); }
double to_double(const std::string& v) { return std::stod(v); }
bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DataError("config: bad boolean '" + v + "'");
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s = {
      {"preset", {[](TrainConfig&, const std::string&) {}}},  // handled in pass 1
      {"model_scale", {[](TrainConfig& c, const std::string& v) {
         if (v == "paper") apply_paper_scale(c);
         else if (v != "desk") throw DataError("config: model_scale must be desk or paper");
       }}},
      {"T", {[](TrainConfig& c, const std::string& v) { c.T = to_int(v); }}},
      {"beta_min", {[](TrainConfig& c, const std::string& v) { c.beta_min = to_double(v); }}},
      {"beta_max", {[](TrainConfig& c, const std::string& v) { c.beta_max = to_double(v); }}},
      {"lambda_recon", {[](TrainConfig& c, const std::string& v) { c.lambda_recon = to_double(v); }}},
      {"lambda_adv", {[](TrainConfig& c, const std::string& v) { c.lambda_adv = to_double(v); }}},
      {"lambda_gp", {[](TrainConfig& c, const std::string& v) { c.lambda_gp = to_double(v); }}},
      {"adv_printed_sign", {[](TrainConfig& c, const std::string& v) { c.adv_printed_sign = to_bool(v); }}},
      {"lr", {[](TrainConfig& c, const std::string& v) { c.lr = to_double(v); }}},
      {"adam_beta1", {[](TrainConfig& c, const std::string& v) { c.adam_beta1 = to_double(v); }}},
      {"adam_beta2", {[](TrainConfig& c, const std::string& v) { c.adam_beta2 = to_double(v); }}},
      {"weight_decay", {[](TrainConfig& c, const std::string& v) { c.weight_decay = to_double(v); }}},
      {"lr_decay", {[](TrainConfig& c, const std::string& v) {
         if (v == "none") c.lr_decay = LrDecay::kNone;
         else if (v == "exp") c.lr_decay = LrDecay::kExp;
         else throw DataError("config: lr_decay must be none or exp");
       }}},
      {"lr_decay_rate", {[](TrainConfig& c, const std::string& v) { c.lr_decay_rate = to_double(v); }}},
      {"d_updates_per_g", {[](TrainConfig& c, const std::string& v) { c.d_updates_per_g = to_int(v); }}},
      {"steps", {[](TrainConfig& c, const std::string& v) { c.steps = to_int(v); }}},
      {"batch_size", {[](TrainConfig& c, const std::string& v) { c.batch_size = to_int(v); }}},
      {"seed", {[](TrainConfig& c, const std::string& v) { c.seed = std::stoull(v); }}},
      {"max_frames", {[](TrainConfig& c, const std::string& v) { c.max_frames = to_int(v); }}},
      {"checkpoint_every", {[](TrainConfig& c, const std::string& v) { c.checkpoint_every = to_int(v); }}},
      {"hidden_dim", {[](TrainConfig& c, const std::string& v) { c.hidden_dim = to_int(v); }}},
      {"enc_layers", {[](TrainConfig& c, const std::string& v) { c.enc_layers = to_int(v); }}},
      {"enc_kernel", {[](TrainConfig& c, const std::string& v) { c.enc_kernel = to_int(v); }}},
      {"ffn_dim", {[](TrainConfig& c, const std::string& v) { c.ffn_dim = to_int(v); }}},
      {"dur_layers", {[](TrainConfig& c, const std::string& v) { c.dur_layers = to_int(v); }}},
      {"dur_kernel", {[](TrainConfig& c, const std::string& v) { c.dur_kernel = to_int(v); }}},
      {"wavenet_blocks", {[](TrainConfig& c, const std::string& v) { c.wavenet_blocks = to_int(v); }}},
      {"wavenet_kernel", {[](TrainConfig& c, const std::string& v) { c.wavenet_kernel = to_int(v); }}},
      {"dilation_cycle", {[](TrainConfig& c, const std::string& v) { c.dilation_cycle = to_int(v); }}},
      {"residual_channels", {[](TrainConfig& c, const std::string& v) { c.residual_channels = to_int(v); }}},
      {"time_embed_dim", {[](TrainConfig& c, const std::string& v) { c.time_embed_dim = to_int(v); }}},
      {"disc_blocks", {[](TrainConfig& c, const std::string& v) { c.disc_blocks = to_int(v); }}},
      {"disc_base_channels", {[](TrainConfig& c, const std::string& v) { c.disc_base_channels = to_int(v); }}},
      {"disc_cond_channels", {[](TrainConfig& c, const std::string& v) { c.disc_cond_channels = to_int(v); }}},
      {"id_embed_dim", {[](TrainConfig& c, const std::string& v) { c.id_embed_dim = to_int(v); }}},
      {"phone_vocab", {[](TrainConfig& c, const std::string& v) { c.phone_vocab = to_int(v); }}},
      {"pitch_min", {[](TrainConfig& c, const std::string& v) { c.pitch_min = to_int(v); }}},
      {"pitch_max", {[](TrainConfig& c, const std::string& v) { c.pitch_max = to_int(v); }}},
      {"num_singers", {[](TrainConfig& c, const std::string& v) { c.num_singers = to_int(v); }}},
      {"max_note_len", {[](TrainConfig& c, const std::string& v) { c.max_note_len = to_int(v); }}},
      {"sample_rate", {[](TrainConfig& c, const std::string& v) { c.signal.sample_rate = to_int(v); }}},
      {"hop", {[](TrainConfig& c, const std::string& v) { c.signal.hop = to_int(v); }}},
      {"frame", {[](TrainConfig& c, const std::string& v) { c.signal.frame = to_int(v); }}},
      {"mel_bins", {[](TrainConfig& c, const std::string& v) { c.signal.mel_bins = to_int(v); }}},
      {"mel_norm_mean", {[](TrainConfig& c, const std::string& v) { c.mel_norm_mean = to_double(v); }}},
      {"mel_norm_scale", {[](TrainConfig& c, const std::string& v) { c.mel_norm_scale = to_double(v); }}},
      {"data_dir", {[](TrainConfig& c, const std::string& v) { c.data_dir = v; }}},
      {"out_dir", {[](TrainConfig& c, const std::string& v) { c.out_dir = v; }}},
      {"log_csv", {[](TrainConfig& c, const std::string& v) { c.log_csv = v; }}},
      {"checkpoint", {[](TrainConfig& c, const std::string& v) { c.checkpoint = v; }}},
  };
  return s;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (setters().find(key) == setters().end()) {
      throw DataError("config: unknown key '" + key + "'");
    }
    kv.push_back({key, value});
  }
  // pass 1: preset decides the defaults, then keys override in file order
  Preset preset = Preset::kDiffWgan;
  for (const auto& [k, v] : kv) {
    if (k == "preset") preset = preset_from_name(v);
  }
  TrainConfig cfg = default_config(preset);
  for (const auto& [k, v] : kv) {
    setters().at(k).fn(cfg, v);
  }
  return cfg;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("config: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_echo(const TrainConfig& c) {
  std::ostringstream os;
  os << "preset = " << preset_name(c.preset) << "\n"
     << "T = " << c.T << "\nbeta_min = " << c.beta_min << "\nbeta_max = " << c.beta_max << "\n"
     << "lambda_recon = " << c.lambda_recon << "\nlambda_adv = " << c.lambda_adv
     << "\nlambda_gp = " << c.lambda_gp << "\n"
     << "adv_printed_sign = " << (c.adv_printed_sign ? "true" : "false") << "\n"
     << "lr = " << c.lr << "\nadam_beta1 = " << c.adam_beta1 << "\nadam_beta2 = " << c.adam_beta2
     << "\nweight_decay = " << c.weight_decay << "\n"
     << "lr_decay = " << (c.lr_decay == LrDecay::kExp ? "exp" : "none") << "\n"
     << "lr_decay_rate = " << c.lr_decay_rate << "\n"
     << "d_updates_per_g = " << c.d_updates_per_g << "\nsteps = " << c.steps
     << "\nbatch_size = " << c.batch_size << "\nseed = " << c.seed
     << "\nmax_frames = " << c.max_frames << "\n"
     << "hidden_dim = " << c.hidden_dim << "\nenc_layers = " << c.enc_layers
     << "\nenc_kernel = " << c.enc_kernel << "\nffn_dim = " << c.ffn_dim << "\n"
     << "dur_layers = " << c.dur_layers << "\ndur_kernel = " << c.dur_kernel << "\n"
     << "wavenet_blocks = " << c.wavenet_blocks << "\nwavenet_kernel = " << c.wavenet_kernel
     << "\ndilation_cycle = " << c.dilation_cycle
     << "\nresidual_channels = " << c.residual_channels
     << "\ntime_embed_dim = " << c.time_embed_dim << "\n"
     << "disc_blocks = " << c.disc_blocks << "\ndisc_base_channels = " << c.disc_base_channels
     << "\ndisc_cond_channels = " << c.disc_cond_channels
     << "\nid_embed_dim = " << c.id_embed_dim << "\n"
     << "phone_vocab = " << c.phone_vocab << "\npitch_min = " << c.pitch_min
     << "\npitch_max = " << c.pitch_max << "\nnum_singers = " << c.num_singers
     << "\nmax_note_len = " << c.max_note_len << "\n"
     << "sample_rate = " << c.signal.sample_rate << "\nhop = " << c.signal.hop
     << "\nframe = " << c.signal.frame << "\nmel_bins = " << c.signal.mel_bins << "\n"
     << "mel_norm_mean = " << c.mel_norm_mean << "\nmel_norm_scale = " << c.mel_norm_scale
     << "\n";
  return os.str();
}

uint64_t config_hash(const TrainConfig& cfg) {
  // FNV-1a over the echo (paths and step counts excluded by construction)
  uint64_t h = 1469598103934665603ull;
  for (char ch : config_echo(cfg)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace svs
