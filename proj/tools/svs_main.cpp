#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "svs/corpus.hpp"
#include "svs/gradcheck.hpp"
#include "svs/metrics.hpp"
#include "svs/trainer.hpp"

namespace fs = std::filesystem;
using namespace svs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void cmd_schedule(int T, double beta_min, double beta_max, const std::string& out) {
  DiffusionSchedule s = compute_schedule(T, beta_min, beta_max);
  std::ostringstream os;
  os << "t,beta,alpha,alpha_bar,beta_tilde\n";
  os.precision(17);
  for (int t = 1; t <= T; ++t) {
    os << t << ',' << s.beta[size_t(t)] << ',' << s.alpha[size_t(t)] << ','
       << s.alpha_bar[size_t(t)] << ',' << s.beta_tilde[size_t(t)] << '\n';
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out);
    if (!f) throw DataError("schedule: cannot write " + out);
    f << os.str();
  }
}

TrainConfig config_for_train(const std::string& config_path, const std::string& data_dir,
                             const std::string& checkpoint, int steps, int64_t seed) {
  TrainConfig cfg = load_config(config_path);
  if (!data_dir.empty()) cfg.data_dir = data_dir;
  if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
  if (steps > 0) cfg.steps = steps;
  if (seed >= 0) cfg.seed = uint64_t(seed);
  if (cfg.data_dir.empty()) throw DataError("train: no data_dir in config or --data flag");
  return cfg;
}

void cmd_train(const TrainConfig& cfg) {
  Corpus corpus = load_corpus(cfg.data_dir, cfg);
  Trainer trainer(cfg, corpus);
  std::ofstream log;
  std::ostream* log_ptr = nullptr;
  if (!cfg.log_csv.empty()) {
    log.open(cfg.log_csv);
    if (!log) throw DataError("train: cannot write log " + cfg.log_csv);
    log_ptr = &log;
  }
  trainer.run(log_ptr);
  std::cout << "trained " << trainer.step_count() << " steps (" << preset_name(cfg.preset)
            << ")\n";
  if (!cfg.checkpoint.empty()) std::cout << "checkpoint: " << cfg.checkpoint << '\n';
}

void cmd_synth(const std::string& ckpt_path, const std::string& score_path,
               const std::string& config_path, const std::string& out_wav,
               const std::string& out_mel, uint64_t seed) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  TrainConfig cfg = parse_config_text(ck.config_echo);
  if (arch_hash(cfg) != ck.arch_hash) {
    throw DataError("synth: checkpoint is internally inconsistent (architecture hash mismatch)");
  }
  if (!config_path.empty()) {
    TrainConfig requested = load_config(config_path);
    if (arch_hash(requested) != ck.arch_hash) {
      throw DataError("synth: config/checkpoint mismatch: " + config_path +
                      " describes a different architecture than " + ckpt_path);
    }
    cfg = requested;
  }
  MusicalScore score = read_score(score_path, cfg);
  std::mt19937_64 rng(seed);
  Tensor mel_t = synthesize_mel(score, ck.generator, cfg, rng);
  MelSpectrogram mel = tensor_to_mel(mel_t, cfg.signal);
  if (!out_mel.empty()) write_mel(out_mel, mel);
  if (!out_wav.empty()) {
    std::vector<double> wav = griffin_lim(mel, 60);
    write_wav(out_wav, wav, cfg.signal.sample_rate);
  }
  std::cout << "synthesized " << mel.frames << " frames\n";
}

void cmd_eval(const std::string& ref_dir, const std::string& syn_dir, const std::string& report) {
  SignalConfig sig;
  sig.mel_bins = 32;
  EvalReport r = evaluate_dirs(ref_dir, syn_dir, sig);
  if (!report.empty()) write_eval_csv(report, r);
  auto show = [](const char* name, const std::optional<double>& v) {
    std::cout << name << ": ";
    if (v.has_value()) {
      std::cout << *v;
    } else {
      std::cout << "n/a";
    }
    std::cout << '\n';
  };
  std::cout << "files: " << r.files.size() << '\n';
  show("ms_ssim", r.mean.ms_ssim_v);
  show("mcd_db", r.mean.mcd_db);
  show("f0_rmse_semitones", r.mean.f0_rmse);
  show("f0_corr", r.mean.f0_corr);
}

int cmd_gradcheck(const std::string& filter, uint64_t seed) {
  std::vector<GradcheckResult> results = gradcheck_primitives(filter, seed);
  results.push_back(gradcheck_gradient_penalty(seed));
  bool all_ok = true;
  for (const GradcheckResult& r : results) {
    std::cout << (r.passed ? "pass" : "FAIL") << "  " << r.name
              << "  max_rel_err=" << r.max_rel_err << '\n';
    all_ok = all_ok && r.passed;
  }
  std::cout << (all_ok ? "all gradient checks passed" : "gradient checks FAILED") << '\n';
  return all_ok ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion + WGAN singing-voice-synthesis acoustic model"};
  app.require_subcommand(1);

  auto* sched = app.add_subcommand("schedule", "print the variance schedule as CSV");
  int T = 4;
  double beta_min = 0.1, beta_max = 20.0;
  std::string sched_out;
  sched->add_option("--T", T, "number of diffusion steps");
  sched->add_option("--beta-min", beta_min);
  sched->add_option("--beta-max", beta_max);
  sched->add_option("--out", sched_out, "output file (default stdout)");

  auto* gen = app.add_subcommand("gen-corpus", "write the synthetic singing corpus");
  std::string gen_out = "corpus";
  uint64_t gen_seed = 1234;
  int gen_items = 6;
  std::string gen_config;
  gen->add_option("--out", gen_out, "corpus directory");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--items", gen_items, "items per singer (last two are held out)");
  gen->add_option("--config", gen_config, "config file for signal/vocabulary settings");

  auto* train = app.add_subcommand("train", "train a model from a config file");
  std::string train_config, train_data, train_ckpt;
  int train_steps = 0;
  int64_t train_seed = -1;
  train->add_option("--config", train_config)->required();
  train->add_option("--data", train_data, "corpus directory (overrides config)");
  train->add_option("--checkpoint", train_ckpt, "checkpoint path (overrides config)");
  train->add_option("--steps", train_steps, "step count (overrides config)");
  train->add_option("--seed", train_seed, "seed (overrides config)");

  auto* synth = app.add_subcommand("synth", "synthesize a score with a trained checkpoint");
  std::string sy_ckpt, sy_score, sy_config, sy_wav, sy_mel;
  uint64_t sy_seed = 0;
  synth->add_option("--checkpoint", sy_ckpt)->required();
  synth->add_option("--score", sy_score)->required();
  synth->add_option("--config", sy_config, "must match the checkpoint architecture");
  synth->add_option("--out-wav", sy_wav);
  synth->add_option("--out-mel", sy_mel);
  synth->add_option("--seed", sy_seed);

  auto* ev = app.add_subcommand("eval", "objective metrics over two wav directories");
  std::string ev_ref, ev_syn, ev_report;
  ev->add_option("--ref", ev_ref)->required();
  ev->add_option("--syn", ev_syn)->required();
  ev->add_option("--report", ev_report, "CSV report path");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the autodiff core");
  std::string gc_filter;
  uint64_t gc_seed = 7;
  gc->add_option("--filter", gc_filter, "run only checks whose name contains this");
  gc->add_option("--seed", gc_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sched->parsed()) {
      cmd_schedule(T, beta_min, beta_max, sched_out);
    } else if (gen->parsed()) {
      TrainConfig cfg = gen_config.empty() ? default_config(Preset::kDiffWgan)
                                           : load_config(gen_config);
      generate_corpus(cfg, gen_out, gen_seed, gen_items);
      std::cout << "corpus written to " << gen_out << '\n';
    } else if (train->parsed()) {
      cmd_train(config_for_train(train_config, train_data, train_ckpt, train_steps, train_seed));
    } else if (synth->parsed()) {
      cmd_synth(sy_ckpt, sy_score, sy_config, sy_wav, sy_mel, sy_seed);
    } else if (ev->parsed()) {
      cmd_eval(ev_ref, ev_syn, ev_report);
    } else if (gc->parsed()) {
      return cmd_gradcheck(gc_filter, gc_seed);
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const AutodiffError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
