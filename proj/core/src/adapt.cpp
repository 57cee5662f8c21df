#include "osoa/adapt.hpp"

#include <cmath>

namespace osoa {

void OptimizerConfig::validate() const {
  if (kind != OptimizerKind::kSgd && kind != OptimizerKind::kAdamax)
    throw FormatError("unknown optimizer kind");
  if (!(learning_rate > 0.0)) throw FormatError("learning_rate must be positive");
  if (kind == OptimizerKind::kAdamax) {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw FormatError("beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw FormatError("beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw FormatError("epsilon must be positive");
  }
}

void AdaptationSchedule::validate() const {
  if (updates_per_batch < 1) throw FormatError("updates_per_batch must be >= 1");
}

void sgd_step(std::span<double> params, std::span<const double> grad,
              const OptimizerConfig& config) {
  if (params.size() != grad.size()) throw FormatError("gradient shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i] -= config.learning_rate * grad[i];
}

void adamax_step(std::span<double> params, std::span<const double> grad,
                 const OptimizerConfig& config, OptimizerState& state) {
  if (params.size() != grad.size()) throw FormatError("gradient shape mismatch");
  if (state.first_moment.size() != params.size() ||
      state.inf_norm.size() != params.size())
    throw FormatError("optimizer state shape mismatch");
  state.step_count += 1;
  const double correction =
      1.0 - std::pow(config.beta1, static_cast<double>(state.step_count));
  const double step = config.learning_rate / correction;
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.first_moment[i] =
        config.beta1 * state.first_moment[i] + (1.0 - config.beta1) * grad[i];
    const double mag = std::abs(grad[i]);
    const double decayed = config.beta2 * state.inf_norm[i];
    state.inf_norm[i] = decayed > mag ? decayed : mag;
    params[i] -= step * state.first_moment[i] / (state.inf_norm[i] + config.epsilon);
  }
}

void optimizer_step(std::span<double> params, std::span<const double> grad,
                    const OptimizerConfig& config, OptimizerState& state) {
  if (config.kind == OptimizerKind::kSgd) {
    state.step_count += 1;
    sgd_step(params, grad, config);
  } else {
    adamax_step(params, grad, config, state);
  }
}

void apply_dynamics(ModelParams& params, OptimizerState& state,
                    std::span<const Symbol> batch, const OptimizerConfig& config,
                    const AdaptationSchedule& schedule, std::uint32_t batch_number) {
  if (batch.empty()) throw FormatError("empty batch");
  if (schedule.early_stop_step && batch_number > *schedule.early_stop_step) return;
  for (std::uint32_t k = 0; k < schedule.updates_per_batch; ++k) {
    const Gradient g = model_gradient(params, batch);
    optimizer_step(flat_logits(params), g.values, config, state);
  }
}

Gradient model_gradient(const ModelParams& params, std::span<const Symbol> batch) {
  if (const auto* cm = std::get_if<ContextModelParams>(&params))
    return grad_nll(*cm, batch);
  return grad_elbo(std::get<ToyVaeParams>(params), batch);
}

double model_objective_bits(const ModelParams& params, std::span<const Symbol> batch) {
  if (const auto* cm = std::get_if<ContextModelParams>(&params))
    return nll_bits(*cm, batch);
  const auto& vae = std::get<ToyVaeParams>(params);
  double total = 0.0;
  for (Symbol x : batch) total += elbo_bits(vae, x);
  return total / static_cast<double>(batch.size());
}

}  // namespace osoa
