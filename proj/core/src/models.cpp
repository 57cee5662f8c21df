#include "osoa/models.hpp"

#include <cmath>

namespace osoa {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Softmax of a row into out, max-subtracted, fixed evaluation order.
void softmax_row(std::span<const double> row, std::span<double> out) {
  double mx = row[0];
  for (double v : row)
    if (v > mx) mx = v;
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[i] = std::exp(row[i] - mx);
    sum += out[i];
  }
  for (std::size_t i = 0; i < row.size(); ++i) out[i] /= sum;
}

std::vector<double> softmax_vec(std::span<const double> row) {
  std::vector<double> out(row.size());
  softmax_row(row, out);
  return out;
}

}  // namespace

ContextModelParams ContextModelParams::zeros(std::uint32_t order, std::uint32_t alphabet) {
  if (order > 1) throw FormatError("context_order must be 0 or 1");
  if (alphabet < 2) throw FormatError("alphabet needs at least 2 symbols");
  ContextModelParams p;
  p.context_order = order;
  p.alphabet_size = alphabet;
  p.logits.assign(std::size_t{p.num_contexts()} * alphabet, 0.0);
  return p;
}

ToyVaeParams ToyVaeParams::zeros(std::uint32_t latent, std::uint32_t alphabet) {
  if (latent < 1) throw FormatError("latent needs at least 1 value");
  if (alphabet < 2) throw FormatError("alphabet needs at least 2 symbols");
  ToyVaeParams p;
  p.latent_size = latent;
  p.alphabet_size = alphabet;
  p.logits.assign(std::size_t{latent} + std::size_t{latent} * alphabet +
                      std::size_t{alphabet} * latent,
                  0.0);
  return p;
}

std::vector<double>& flat_logits(ModelParams& params) {
  return std::visit([](auto& p) -> std::vector<double>& { return p.logits; }, params);
}

const std::vector<double>& flat_logits(const ModelParams& params) {
  return std::visit([](const auto& p) -> const std::vector<double>& { return p.logits; },
                    params);
}

std::uint32_t model_alphabet_size(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.alphabet_size; }, params);
}

Pmf pmf_for_context(const ContextModelParams& params, std::optional<Symbol> ctx) {
  if (params.context_order == 0) {
    if (ctx) throw FormatError("order-0 model takes no context");
  } else {
    if (!ctx) throw FormatError("order-1 model needs a context");
    if (*ctx >= params.alphabet_size) throw FormatError("context outside alphabet");
  }
  Pmf pmf;
  pmf.probs = softmax_vec(params.row(ctx ? *ctx : 0));
  return pmf;
}

double nll_bits(const ContextModelParams& params, std::span<const Symbol> batch) {
  if (batch.empty()) throw FormatError("empty batch");
  const std::uint32_t a = params.alphabet_size;
  std::vector<double> probs(a);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i] >= a) throw FormatError("symbol outside alphabet");
    softmax_row(params.row(context_of(params, batch, i)), probs);
    total -= std::log2(probs[batch[i]]);
  }
  return total / static_cast<double>(batch.size());
}

Gradient grad_nll(const ContextModelParams& params, std::span<const Symbol> batch) {
  if (batch.empty()) throw FormatError("empty batch");
  const std::uint32_t a = params.alphabet_size;
  Gradient g;
  g.values.assign(params.logits.size(), 0.0);
  std::vector<double> probs(a);
  const double scale = 1.0 / (static_cast<double>(batch.size()) * kLn2);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i] >= a) throw FormatError("symbol outside alphabet");
    const std::uint32_t ctx = context_of(params, batch, i);
    softmax_row(params.row(ctx), probs);
    double* row = g.values.data() + std::size_t{ctx} * a;
    for (std::uint32_t j = 0; j < a; ++j) row[j] += probs[j] * scale;
    row[batch[i]] -= scale;
  }
  return g;
}

double elbo_bits(const ToyVaeParams& params, Symbol x) {
  if (x >= params.alphabet_size) throw FormatError("symbol outside alphabet");
  const std::vector<double> prior = softmax_vec(params.prior_row());
  const std::vector<double> post = softmax_vec(params.posterior_row(x));
  double l = 0.0;  // nats
  for (std::uint32_t z = 0; z < params.latent_size; ++z) {
    const std::vector<double> lik = softmax_vec(params.likelihood_row(z));
    l += post[z] * (-std::log(post[z]) + std::log(lik[x]) + std::log(prior[z]));
  }
  return -l / kLn2;
}

double exact_marginal(const ToyVaeParams& params, Symbol x) {
  if (x >= params.alphabet_size) throw FormatError("symbol outside alphabet");
  const std::vector<double> prior = softmax_vec(params.prior_row());
  double p = 0.0;
  for (std::uint32_t z = 0; z < params.latent_size; ++z) {
    const std::vector<double> lik = softmax_vec(params.likelihood_row(z));
    p += prior[z] * lik[x];
  }
  return p;
}

Gradient grad_elbo(const ToyVaeParams& params, std::span<const Symbol> batch) {
  if (batch.empty()) throw FormatError("empty batch");
  const std::uint32_t zn = params.latent_size;
  const std::uint32_t a = params.alphabet_size;
  Gradient g;
  g.values.assign(params.logits.size(), 0.0);

  const std::vector<double> prior = softmax_vec(params.prior_row());
  std::vector<std::vector<double>> lik(zn);
  for (std::uint32_t z = 0; z < zn; ++z) lik[z] = softmax_vec(params.likelihood_row(z));

  // d(-L/ln2)/d(logit), averaged over the batch. For one x with
  // q = softmax(posterior row), h_z = ln(prior_z * lik_z(x) / q_z), L = E_q[h]:
  //   prior row:      dL/du_z = q_z - prior_z
  //   likelihood z:   dL/dw_{z,j} = q_z (1[j=x] - lik_z(j))
  //   posterior row x: dL/dv_z = q_z (h_z - L)
  const double scale = -1.0 / (static_cast<double>(batch.size()) * kLn2);
  std::vector<double> q(zn), h(zn);
  for (Symbol x : batch) {
    if (x >= a) throw FormatError("symbol outside alphabet");
    softmax_row(params.posterior_row(x), q);
    double lsum = 0.0;
    for (std::uint32_t z = 0; z < zn; ++z) {
      h[z] = std::log(prior[z]) + std::log(lik[z][x]) - std::log(q[z]);
      lsum += q[z] * h[z];
    }
    double* gp = g.values.data() + params.prior_offset();
    for (std::uint32_t z = 0; z < zn; ++z) gp[z] += scale * (q[z] - prior[z]);
    for (std::uint32_t z = 0; z < zn; ++z) {
      double* gl = g.values.data() + params.likelihood_offset(z);
      for (std::uint32_t j = 0; j < a; ++j) gl[j] -= scale * q[z] * lik[z][j];
      gl[x] += scale * q[z];
    }
    double* gq = g.values.data() + params.posterior_offset(x);
    for (std::uint32_t z = 0; z < zn; ++z) gq[z] += scale * q[z] * (h[z] - lsum);
  }
  return g;
}

CodingTables coding_tables(const ModelParams& params, int precision_bits) {
  CodingTables t;
  t.precision_bits = static_cast<std::uint8_t>(precision_bits);
  if (const auto* cm = std::get_if<ContextModelParams>(&params)) {
    t.is_vae = false;
    t.context_rows.reserve(cm->num_contexts());
    for (std::uint32_t c = 0; c < cm->num_contexts(); ++c) {
      Pmf pmf;
      pmf.probs = softmax_vec(cm->row(c));
      t.context_rows.push_back(quantize_pmf(pmf, precision_bits));
    }
  } else {
    const auto& vae = std::get<ToyVaeParams>(params);
    t.is_vae = true;
    Pmf prior;
    prior.probs = softmax_vec(vae.prior_row());
    t.prior = quantize_pmf(prior, precision_bits);
    t.likelihood.reserve(vae.latent_size);
    for (std::uint32_t z = 0; z < vae.latent_size; ++z) {
      Pmf lik;
      lik.probs = softmax_vec(vae.likelihood_row(z));
      t.likelihood.push_back(quantize_pmf(lik, precision_bits));
    }
    t.posterior.reserve(vae.alphabet_size);
    for (Symbol x = 0; x < vae.alphabet_size; ++x) {
      Pmf post;
      post.probs = softmax_vec(vae.posterior_row(x));
      t.posterior.push_back(quantize_pmf(post, precision_bits));
    }
  }
  return t;
}

std::vector<std::uint8_t> CodingTables::serialize() const {
  std::vector<std::uint8_t> out;
  auto add = [&out](const QuantizedPmf& q) { serialize_quantized(q, out); };
  if (!is_vae) {
    for (const auto& q : context_rows) add(q);
  } else {
    add(prior);
    for (const auto& q : likelihood) add(q);
    for (const auto& q : posterior) add(q);
  }
  return out;
}

}  // namespace osoa
