#include "gin/gan/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "gin/io/csv.hpp"
#include "gin/nn/optimizer.hpp"

namespace gin::gan {

using nn::Tensor;

void GanConfig::validate() const {
  validate_latent_dim(latent_dim);
  if (hidden == 0) throw ValidationError("hidden width must be positive");
  if (iterations < 1) throw ValidationError("GAN iterations must be >= 1");
  if (batch < 2) throw ValidationError("GAN batch size must be >= 2");
  if (n_critic < 1) throw ValidationError("n_critic must be >= 1");
  if (!(clip_c > 0.0)) throw ValidationError("clip_c must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("GAN learning rate must be positive");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) throw ValidationError("RMSProp decay must lie in (0, 1)");
}

void InverseConfig::validate() const {
  if (iterations < 1) throw ValidationError("inverse iterations must be >= 1");
  if (batch < 2) throw ValidationError("inverse batch size must be >= 2");
  if (!(learning_rate > 0.0)) throw ValidationError("inverse learning rate must be positive");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) throw ValidationError("RMSProp decay must lie in (0, 1)");
}

TrainingLog concat_logs(const TrainingLog& first, const TrainingLog& second) {
  TrainingLog out = first;
  const std::size_t offset = first.records.empty() ? 0 : first.records.back().iteration;
  for (LogRecord r : second.records) {
    r.iteration += offset;
    out.records.push_back(r);
  }
  return out;
}

void write_training_log(std::ostream& out, const TrainingLog& log) {
  auto opt = [](const std::optional<double>& v) { return v ? io::format_number(*v) : std::string(); };
  out << kTrainingLogHeader << '\n';
  for (const auto& r : log.records) {
    out << r.iteration << ',' << opt(r.critic_loss) << ',' << opt(r.gen_loss) << ',' << opt(r.inverse_mse) << ','
        << io::format_number(r.elapsed_ms) << '\n';
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nn::OptimizerConfig rmsprop(double lr, double decay) {
  nn::OptimizerConfig c;
  c.algorithm = nn::Algorithm::rmsprop;
  c.learning_rate = lr;
  c.decay = decay;
  return c;
}

Tensor real_batch(const Tensor& real, std::size_t batch, Rng& rng) {
  const std::size_t pixels = real.dim(1);
  Tensor out({batch, pixels});
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t row = rng.index(real.dim(0));
    std::copy(real.raw() + row * pixels, real.raw() + (row + 1) * pixels, out.raw() + b * pixels);
  }
  return out;
}

}  // namespace

GanTraining train_gan(GanModel model, const Tensor& real, const GanConfig& cfg, Rng& rng,
                      const CriticObserver& observer) {
  cfg.validate();
  const std::size_t pixels = model.image_size * model.image_size;
  if (real.rank() != 2 || real.dim(1) != pixels || real.dim(0) == 0) {
    throw ValidationError("training images must form an (N, " + std::to_string(pixels) + ") batch");
  }

  const auto start = Clock::now();
  nn::Optimizer critic_opt(rmsprop(cfg.learning_rate, cfg.rmsprop_decay));
  nn::Optimizer gen_opt(rmsprop(cfg.learning_rate, cfg.rmsprop_decay));
  const std::size_t b = cfg.batch;
  const float inv_b = 1.0f / static_cast<float>(b);

  // Critic output gradient for a stacked [real; generated] batch: the loss
  // being minimized is mean(score generated) - mean(score real).
  Tensor critic_grad({2 * b, 1});
  for (std::size_t i = 0; i < b; ++i) {
    critic_grad[i] = -inv_b;
    critic_grad[b + i] = inv_b;
  }
  const Tensor gen_grad({b, 1}, -inv_b);

  GanTraining out;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    double wasserstein = 0.0;
    for (std::size_t c = 0; c < cfg.n_critic; ++c) {
      const Tensor reals = real_batch(real, b, rng);
      const Tensor fakes = model.generator.infer(sample_latent_batch(rng, model.latent_dim, b));
      Tensor stacked({2 * b, pixels});
      std::copy(reals.raw(), reals.raw() + reals.size(), stacked.raw());
      std::copy(fakes.raw(), fakes.raw() + fakes.size(), stacked.raw() + reals.size());

      const Tensor scores = model.critic.forward(stacked, nn::Mode::train);
      double sum_real = 0.0, sum_fake = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        sum_real += scores[i];
        sum_fake += scores[b + i];
      }
      wasserstein = (sum_real - sum_fake) / static_cast<double>(b);
      if (!std::isfinite(wasserstein)) {
        throw NumericalError("non-finite critic loss at GAN iteration " + std::to_string(it));
      }
      const auto grads = model.critic.backward(stacked, critic_grad, {true, false});
      critic_opt.step(model.critic.params(), grads.params);
      nn::clip_params(model.critic.params(), model.clip_c);
      if (observer) observer(model, it);
    }

    const Tensor u = sample_latent_batch(rng, model.latent_dim, b);
    const Tensor fakes = model.generator.forward(u, nn::Mode::train);
    const Tensor scores = model.critic.forward(fakes, nn::Mode::train);
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) sum += scores[i];
    const double gen_loss = -sum / static_cast<double>(b);
    if (!std::isfinite(gen_loss)) {
      throw NumericalError("non-finite generator loss at GAN iteration " + std::to_string(it));
    }
    const auto through_critic = model.critic.backward(fakes, gen_grad, {false, true});
    const auto gen_grads = model.generator.backward(u, through_critic.input, {true, false});
    gen_opt.step(model.generator.params(), gen_grads.params);

    out.log.records.push_back({it, wasserstein, gen_loss, std::nullopt, elapsed_ms(start)});
  }
  model.generator.clear_cache();
  model.critic.clear_cache();
  out.model = std::move(model);
  return out;
}

GanTraining train_gan(const synth::Dataset& data, const GanConfig& cfg, Rng& rng, const CriticObserver& observer) {
  cfg.validate();
  if (data.records.empty()) throw ValidationError("cannot train on an empty dataset");
  std::vector<GrayImage> images;
  images.reserve(data.records.size());
  for (const auto& r : data.records) images.push_back(r.image);
  const std::size_t size = images.front().height;
  GanModel model = make_gan(cfg.latent_dim, size, cfg.hidden, static_cast<float>(cfg.clip_c), rng);
  return train_gan(std::move(model), images_to_tensor(images), cfg, rng, observer);
}

InverseTraining train_inverse(InverseModel model, const std::function<Tensor(const Tensor&)>& render,
                              const InverseConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto start = Clock::now();
  nn::Optimizer opt(rmsprop(cfg.learning_rate, cfg.rmsprop_decay));
  const std::size_t b = cfg.batch, d = model.latent_dim, size = model.image_size;
  const double denom = static_cast<double>(b * d);

  InverseTraining out;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    const Tensor u = sample_latent_batch(rng, d, b);
    const Tensor images = render(u).reshaped({b, 1, size, size});
    const Tensor pred = model.network.forward(images, nn::Mode::train);

    Tensor grad({b, d});
    double sq = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double diff = static_cast<double>(pred[k]) - u[k];
      sq += diff * diff;
      grad[k] = static_cast<float>(2.0 * diff / denom);
    }
    const double loss = sq / denom;
    if (!std::isfinite(loss)) throw NumericalError("non-finite inverse loss at iteration " + std::to_string(it));

    const auto grads = model.network.backward(images, grad, {true, false});
    opt.step(model.network.params(), grads.params);
    out.log.records.push_back({it, std::nullopt, std::nullopt, loss, elapsed_ms(start)});
  }
  model.network.clear_cache();
  out.model = std::move(model);
  return out;
}

InverseTraining train_inverse(const GanModel& gan, const InverseConfig& cfg, Rng& rng) {
  InverseModel model = make_inverse(gan.latent_dim, gan.image_size, rng);
  return train_inverse(std::move(model), [&gan](const Tensor& u) { return generate_batch(gan, u); }, cfg, rng);
}

}  // namespace gin::gan
