#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "osoa/models.hpp"

namespace osoa {

enum class OptimizerKind : std::uint8_t { kSgd = 0, kAdamax = 1 };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamax;
  double learning_rate = 0.001;
  double beta1 = 0.9;    // adamax only
  double beta2 = 0.999;  // adamax only
  double epsilon = 1e-8; // adamax only

  void validate() const;
};

/// Mutable optimizer state carried across batches for the whole run.
struct OptimizerState {
  std::uint64_t step_count = 0;
  std::vector<double> first_moment;  // adamax m
  std::vector<double> inf_norm;      // adamax u

  static OptimizerState zeros(std::size_t param_count) {
    OptimizerState s;
    s.first_moment.assign(param_count, 0.0);
    s.inf_norm.assign(param_count, 0.0);
    return s;
  }
};

/// Per-batch update schedule. early_stop_step is the 1-based batch index
/// after which no updates occur; value 0 disables adaptation entirely.
struct AdaptationSchedule {
  std::uint32_t updates_per_batch = 1;
  std::optional<std::uint32_t> early_stop_step;

  void validate() const;
};

/// theta -= lr * g, elementwise, fixed iteration order.
void sgd_step(std::span<double> params, std::span<const double> grad,
              const OptimizerConfig& config);

/// m = b1*m + (1-b1)*g;  u = max(b2*u, |g|);
/// theta -= (lr / (1 - b1^t)) * m / (u + eps).
void adamax_step(std::span<double> params, std::span<const double> grad,
                 const OptimizerConfig& config, OptimizerState& state);

/// One optimizer step with the configured rule.
void optimizer_step(std::span<double> params, std::span<const double> grad,
                    const OptimizerConfig& config, OptimizerState& state);

/// The dynamical system D: unless past the early-stop point, performs
/// exactly updates_per_batch iterations of (gradient on batch, optimizer
/// step). batch_number is 1-based. Bit-reproducible: identical inputs give
/// bit-identical outputs.
void apply_dynamics(ModelParams& params, OptimizerState& state,
                    std::span<const Symbol> batch, const OptimizerConfig& config,
                    const AdaptationSchedule& schedule, std::uint32_t batch_number);

/// Gradient of the model's own objective (mean nll bits / mean -elbo bits).
Gradient model_gradient(const ModelParams& params, std::span<const Symbol> batch);

/// Mean objective in bits per symbol under the unquantized model.
double model_objective_bits(const ModelParams& params, std::span<const Symbol> batch);

}  // namespace osoa
