#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "osoa/prob.hpp"

namespace osoa {

/// Categorical table model: order-0 (one marginal row) or order-1 (one row
/// per previous symbol). Any finite logits yield a valid pmf via
/// max-subtracted softmax. Contexts reset at batch boundaries; the first
/// symbol of a batch uses context row 0.
struct ContextModelParams {
  std::uint32_t context_order = 0;  // 0 or 1
  std::uint32_t alphabet_size = 0;
  std::vector<double> logits;  // [num_contexts * alphabet_size], row-major

  static ContextModelParams zeros(std::uint32_t order, std::uint32_t alphabet);

  std::uint32_t num_contexts() const { return context_order == 0 ? 1 : alphabet_size; }
  std::span<const double> row(std::uint32_t ctx) const {
    return std::span<const double>(logits).subspan(std::size_t{ctx} * alphabet_size,
                                                   alphabet_size);
  }
};

/// Single discrete latent z in {0..Z-1}: prior p(z), likelihood p(x|z),
/// approximate posterior q(z|x). All three tables live in one flat buffer
/// (prior, then likelihood rows, then posterior rows) so optimizer state
/// and checksums see one contiguous parameter vector.
struct ToyVaeParams {
  std::uint32_t latent_size = 0;
  std::uint32_t alphabet_size = 0;
  std::vector<double> logits;

  static ToyVaeParams zeros(std::uint32_t latent, std::uint32_t alphabet);

  std::size_t prior_offset() const { return 0; }
  std::size_t likelihood_offset(std::uint32_t z) const {
    return latent_size + std::size_t{z} * alphabet_size;
  }
  std::size_t posterior_offset(Symbol x) const {
    return latent_size + std::size_t{latent_size} * alphabet_size +
           std::size_t{x} * latent_size;
  }
  std::span<const double> prior_row() const {
    return std::span<const double>(logits).subspan(0, latent_size);
  }
  std::span<const double> likelihood_row(std::uint32_t z) const {
    return std::span<const double>(logits).subspan(likelihood_offset(z), alphabet_size);
  }
  std::span<const double> posterior_row(Symbol x) const {
    return std::span<const double>(logits).subspan(posterior_offset(x), latent_size);
  }
};

using ModelParams = std::variant<ContextModelParams, ToyVaeParams>;

/// Flat carrier for d(objective)/d(logits), congruent with the owning
/// parameter object's buffer.
struct Gradient {
  std::vector<double> values;
};

std::vector<double>& flat_logits(ModelParams& params);
const std::vector<double>& flat_logits(const ModelParams& params);
std::uint32_t model_alphabet_size(const ModelParams& params);

/// Context row index for position i of a batch.
inline std::uint32_t context_of(const ContextModelParams& params,
                                std::span<const Symbol> batch, std::size_t i) {
  if (params.context_order == 0) return 0;
  return i == 0 ? 0 : batch[i - 1];
}

/// Max-subtracted softmax of the context row. ctx must be absent for
/// order-0 and present for order-1.
Pmf pmf_for_context(const ContextModelParams& params, std::optional<Symbol> ctx);

/// Mean -log2 p(symbol | context) over the batch; the theoretical bpd of
/// coding the batch with the unquantized model.
double nll_bits(const ContextModelParams& params, std::span<const Symbol> batch);

Gradient grad_nll(const ContextModelParams& params, std::span<const Symbol> batch);

/// Negative ELBO in bits, computed exactly by summation over z.
double elbo_bits(const ToyVaeParams& params, Symbol x);

/// p(x) = sum_z p(z) p(x|z); oracle for bits-back accounting.
double exact_marginal(const ToyVaeParams& params, Symbol x);

/// Exact gradient of mean elbo_bits over the batch w.r.t. all three logit
/// tables. Deterministic: the expectation over z is a fixed-order sum.
Gradient grad_elbo(const ToyVaeParams& params, std::span<const Symbol> batch);

/// Every quantized table the codec can need for one batch under the current
/// parameters. Context model: one row per context. VAE: prior over z,
/// likelihood row per z, posterior row per x.
struct CodingTables {
  bool is_vae = false;
  std::uint8_t precision_bits = 0;
  std::vector<QuantizedPmf> context_rows;
  QuantizedPmf prior;
  std::vector<QuantizedPmf> likelihood;
  std::vector<QuantizedPmf> posterior;

  std::vector<std::uint8_t> serialize() const;
};

CodingTables coding_tables(const ModelParams& params, int precision_bits);

}  // namespace osoa
