#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gin/gan/model.hpp"
#include "gin/synth/valve.hpp"

namespace gin::gan {

// Wasserstein critic with weight clipping, RMSProp on both networks.
struct GanConfig {
  std::size_t latent_dim = 10;
  std::size_t hidden = 512;
  std::size_t iterations = 5000;  // generator updates
  std::size_t batch = 32;
  std::size_t n_critic = 5;
  double clip_c = 0.01;
  double learning_rate = 5e-4;
  double rmsprop_decay = 0.9;

  void validate() const;
};

struct InverseConfig {
  std::size_t iterations = 4000;
  std::size_t batch = 32;
  double learning_rate = 5e-4;
  double rmsprop_decay = 0.9;

  void validate() const;
};

// Absent fields belong to the other training phase.
struct LogRecord {
  std::size_t iteration = 0;
  std::optional<double> critic_loss;  // Wasserstein estimate: mean critic score real - generated
  std::optional<double> gen_loss;     // -mean critic score on generated
  std::optional<double> inverse_mse;
  double elapsed_ms = 0.0;
};

struct TrainingLog {
  std::vector<LogRecord> records;
};

inline constexpr const char* kTrainingLogHeader = "iter,critic_loss,gen_loss,inverse_mse,elapsed_ms";

// Iteration numbers of `second` continue after the last one of `first`.
TrainingLog concat_logs(const TrainingLog& first, const TrainingLog& second);
void write_training_log(std::ostream& out, const TrainingLog& log);

struct GanTraining {
  GanModel model;
  TrainingLog log;
};

struct InverseTraining {
  InverseModel model;
  TrainingLog log;
};

// Called after every critic update (already clipped); the second argument is
// the 1-based generator iteration.
using CriticObserver = std::function<void(const GanModel&, std::size_t)>;

// Alternates n_critic critic updates (maximize mean score on real minus mean
// score on generated, then clip) with one generator update (maximize mean
// critic score on generated).
GanTraining train_gan(const synth::Dataset& data, const GanConfig& cfg, Rng& rng, const CriticObserver& observer = {});

// Same, starting from an existing model; `real` holds one image per row.
GanTraining train_gan(GanModel model, const nn::Tensor& real, const GanConfig& cfg, Rng& rng,
                      const CriticObserver& observer = {});

// Regression of u from G(u) on fresh latent batches; the generator is only
// read. Minimizes mean over batch and components of (inverse(G(u)) - u)^2.
InverseTraining train_inverse(const GanModel& gan, const InverseConfig& cfg, Rng& rng);

// Generalization used by tests: `render` maps a latent batch (N, d) to an
// image batch (N, size*size).
InverseTraining train_inverse(InverseModel model, const std::function<nn::Tensor(const nn::Tensor&)>& render,
                              const InverseConfig& cfg, Rng& rng);

}  // namespace gin::gan
