#pragma once

#include <optional>

#include "svs/config.hpp"
#include "svs/ops.hpp"

namespace svs {

/// Phone / note-length / note-pitch token sequences plus singer identity.
struct MusicalScore {
  std::vector<int64_t> phones;     // ids in [0, phone_vocab)
  std::vector<int64_t> note_len;   // per-phone note length in frames, >= 1
  std::vector<int64_t> note_pitch; // MIDI-style semitone numbers
  int64_t singer_id = 0;

  size_t length() const { return phones.size(); }
  void validate(const TrainConfig& cfg) const;
};

/// Ordered collection of named parameter tensors. Order is fixed at
/// construction, which keeps optimizer traversal and checkpoints
/// deterministic.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<std::pair<std::string, Tensor>>& items() { return items_; }
  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  bool all_finite() const;

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::unordered_map<std::string, size_t> index_;
};

struct EncodedScore {
  Tensor ms;        // hidden_dim x L_f
  Tensor dur_pred;  // length L_p
  int64_t frames = 0;
};

ParamSet init_generator_params(const TrainConfig& cfg, std::mt19937_64& rng);
ParamSet init_discriminator_params(const TrainConfig& cfg, std::mt19937_64& rng);

/// Sinusoidal embedding of an integer position/step, length dim (even).
Tensor sinusoidal_embedding(double pos, int64_t dim);

/// Transformer encoder + variance adaptor. Durations used for the length
/// regulator: ground truth when given, otherwise rounded predictions with a
/// floor of one frame. Adds the singer embedding to the expanded sequence.
EncodedScore encode_score(const MusicalScore& score, const ParamSet& params,
                          const TrainConfig& cfg,
                          const std::vector<int64_t>* gt_durations = nullptr);

/// Non-causal WaveNet stack estimating a clean mel from the t-step noised
/// input, conditioned on the encoded score.
Tensor diffusion_decoder(const Tensor& x_t, int t, const Tensor& ms, const ParamSet& params,
                         const TrainConfig& cfg);

/// Feed-forward decoder of the fft preset: predicts x0 from ms directly.
Tensor fft_decoder(const Tensor& ms, const ParamSet& params, const TrainConfig& cfg);

/// LB-Mod projection: s = Dense_ms(ms) + Dense_id(v), v broadcast along W.
/// ms: C_s x W, v: C_v, result 2C x W.
Tensor lbmod_project(const Tensor& ms, const Tensor& v, const Tensor& w_ms, const Tensor& b_ms,
                     const Tensor& w_id, const Tensor& b_id);

/// LB-Mod application: scale/bias halves of s repeated along H modulate y.
/// y: C x H x W, s: 2C x W.
Tensor lbmod_apply(const Tensor& y, const Tensor& s);

/// Wasserstein critic over a diffusion transition: unbounded scalar score.
/// Durations expand the raw score tokens to frame level before the per-block
/// adaptive interpolation.
Tensor msc_discriminator(const Tensor& x_prev, const Tensor& x_t, int t,
                         const MusicalScore& score, const std::vector<int64_t>& durations,
                         const ParamSet& params, const TrainConfig& cfg);

// --- checkpoint container: named tensors + config echo, versioned ---
void save_checkpoint(const std::string& path, const ParamSet& generator,
                     const ParamSet* discriminator, const TrainConfig& cfg);
struct Checkpoint {
  ParamSet generator;
  std::optional<ParamSet> discriminator;
  std::string config_echo;
  uint64_t arch_hash = 0;
};
Checkpoint load_checkpoint(const std::string& path);
/// Hash of the architecture-determining configuration lines.
uint64_t arch_hash(const TrainConfig& cfg);

}  // namespace svs
