#include "unlearn/objectives.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

#include "unlearn/common.hpp"
#include "unlearn/math.hpp"
#include "unlearn/model.hpp"

namespace unlearn {

std::string to_string(ForgetLoss loss) {
  switch (loss) {
    case ForgetLoss::GA: return "GA";
    case ForgetLoss::NPO: return "NPO";
    case ForgetLoss::RGD: return "RGD";
    case ForgetLoss::RDPO: return "RDPO";
    case ForgetLoss::NAUF: return "NAUF";
  }
  return "?";
}

std::string to_string(Regularizer reg) {
  switch (reg) {
    case Regularizer::none: return "none";
    case Regularizer::GD: return "GD";
    case Regularizer::KLD: return "KLD";
  }
  return "?";
}

ForgetLoss parse_forget_loss(std::string_view text) {
  for (auto l : {ForgetLoss::GA, ForgetLoss::NPO, ForgetLoss::RGD, ForgetLoss::RDPO, ForgetLoss::NAUF})
    if (to_string(l) == text) return l;
  throw ConfigError("unknown forget loss '" + std::string(text) + "' (GA, NPO, RGD, RDPO, NAUF)");
}

Regularizer parse_regularizer(std::string_view text) {
  for (auto r : {Regularizer::none, Regularizer::GD, Regularizer::KLD})
    if (to_string(r) == text) return r;
  throw ConfigError("unknown regularizer '" + std::string(text) + "' (none, GD, KLD)");
}

bool needs_reference(ForgetLoss loss) { return loss == ForgetLoss::NPO || loss == ForgetLoss::RDPO; }

bool uses_relabels(ForgetLoss loss) {
  return loss == ForgetLoss::RGD || loss == ForgetLoss::RDPO || loss == ForgetLoss::NAUF;
}

void LossConfig::validate() const {
  if (unlearn::needs_reference(forget_loss) && !(beta > 0.0 && std::isfinite(beta)))
    throw ConfigError("beta must be positive for " + to_string(forget_loss));
  if (!(forget_weight >= 0.0) || !(regularizer_weight >= 0.0)) throw ConfigError("loss weights must be non-negative");
}

bool LossConfig::needs_reference() const {
  return unlearn::needs_reference(forget_loss) || regularizer == Regularizer::KLD;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::original_gold: return "original-gold";
    case Provenance::original_uninformed: return "original-uninformed";
    case Provenance::original_refusal: return "original-refusal";
    case Provenance::cda_forget_refusal: return "cda-forget-refusal";
    case Provenance::original_retain: return "original-retain";
    case Provenance::cda_retain_selflabel: return "cda-retain-selflabel";
  }
  return "?";
}

Provenance parse_provenance(std::string_view text) {
  for (auto p : {Provenance::original_gold, Provenance::original_uninformed, Provenance::original_refusal,
                 Provenance::cda_forget_refusal, Provenance::original_retain, Provenance::cda_retain_selflabel})
    if (to_string(p) == text) return p;
  throw ParseError(0, "unknown provenance '" + std::string(text) + "'");
}

namespace {

std::atomic<std::size_t> g_floor_hits{0};

const double kLogFloor = std::log(kProbabilityFloor);

/// Returns the floored log-probability and whether the floor was applied.
std::pair<double, bool> floored(double log_p) {
  if (log_p >= kLogFloor) return {log_p, false};
  if (g_floor_hits.fetch_add(1) == 0)
    std::cerr << "warning: probability below " << kProbabilityFloor
              << " clamped inside a likelihood ratio (further hits are counted silently)\n";
  return {kLogFloor, true};
}

void require_finite(double log_p, const char* what, const std::string& question) {
  if (!std::isfinite(log_p))
    throw NumericalError(std::string(what) + " probability is zero for question '" + question + "'");
}

template <class T>
void require_nonempty(const std::vector<T>& v, const char* what) {
  if (v.empty()) throw ValidationError(std::string(what) + ": empty batch");
}

void check_gradient(const Model& m, const Eigen::VectorXd* g) {
  if (g && g->size() != m.num_parameters()) throw BackendError("gradient buffer does not match model parameters");
}

}  // namespace

std::size_t probability_floor_hits() { return g_floor_hits.load(); }
void reset_probability_floor_hits() { g_floor_hits.store(0); }

double loss_ga(const Model& model_u, const std::vector<ForgetExample>& forget, Eigen::VectorXd* gradient) {
  require_nonempty(forget, "loss_ga");
  check_gradient(model_u, gradient);
  const double inv_n = 1.0 / static_cast<double>(forget.size());
  double total = 0.0;
  for (const auto& ex : forget) {
    total += gradient ? model_u.accumulate_log_likelihood_gradient(ex.question, ex.gold, inv_n, *gradient)
                      : model_u.log_likelihood(ex.question, ex.gold);
  }
  return total * inv_n;
}

double loss_npo(const Model& model_u, const Model& model_o, const std::vector<ForgetExample>& forget, double beta,
                Eigen::VectorXd* gradient) {
  require_nonempty(forget, "loss_npo");
  if (!(beta > 0.0)) throw ConfigError("loss_npo: beta must be positive");
  check_gradient(model_u, gradient);
  const double inv_n = 1.0 / static_cast<double>(forget.size());
  double total = 0.0;
  for (const auto& ex : forget) {
    const double lo_raw = model_o.log_likelihood(ex.question, ex.gold);
    require_finite(lo_raw, "reference", ex.question);
    const double lu_raw = model_u.log_likelihood(ex.question, ex.gold);
    const auto [lu, lu_clamped] = floored(lu_raw);
    const auto [lo, lo_clamped] = floored(lo_raw);
    (void)lo_clamped;
    const double delta = lu - lo;
    total += (2.0 / beta) * math::softplus(beta * delta);
    if (gradient && !lu_clamped) {
      const double weight = 2.0 * math::sigmoid(beta * delta);
      model_u.accumulate_log_likelihood_gradient(ex.question, ex.gold, weight * inv_n, *gradient);
    }
  }
  return total * inv_n;
}

double loss_rgd(const Model& model_u, const std::vector<ForgetExample>& forget, Eigen::VectorXd* gradient) {
  require_nonempty(forget, "loss_rgd");
  check_gradient(model_u, gradient);
  const double inv_n = 1.0 / static_cast<double>(forget.size());
  double total = 0.0;
  for (const auto& ex : forget) {
    if (ex.target.empty()) throw ValidationError("loss_rgd: missing relabel for '" + ex.question + "'");
    total -= gradient ? model_u.accumulate_log_likelihood_gradient(ex.question, ex.target, -inv_n, *gradient)
                      : model_u.log_likelihood(ex.question, ex.target);
  }
  return total * inv_n;
}

double loss_rdpo(const Model& model_u, const Model& model_o, const std::vector<ForgetExample>& forget, double beta,
                 Eigen::VectorXd* gradient) {
  require_nonempty(forget, "loss_rdpo");
  if (!(beta > 0.0)) throw ConfigError("loss_rdpo: beta must be positive");
  check_gradient(model_u, gradient);
  const double inv_n = 1.0 / static_cast<double>(forget.size());
  double total = 0.0;
  for (const auto& ex : forget) {
    if (ex.target.empty()) throw ValidationError("loss_rdpo: missing relabel for '" + ex.question + "'");
    if (ex.gold.empty()) throw ValidationError("loss_rdpo: missing gold answer for '" + ex.question + "'");
    const double raw[4] = {model_u.log_likelihood(ex.question, ex.target), model_o.log_likelihood(ex.question, ex.target),
                           model_u.log_likelihood(ex.question, ex.gold), model_o.log_likelihood(ex.question, ex.gold)};
    for (double r : raw) require_finite(r, "an RDPO", ex.question);
    const auto [lu_pref, pref_clamped] = floored(raw[0]);
    const auto [lo_pref, c1] = floored(raw[1]);
    const auto [lu_rej, rej_clamped] = floored(raw[2]);
    const auto [lo_rej, c3] = floored(raw[3]);
    (void)c1;
    (void)c3;
    const double z = beta * (lu_pref - lo_pref) - beta * (lu_rej - lo_rej);
    total += math::softplus(-z);
    if (gradient) {
      const double w = beta * math::sigmoid(-z) * inv_n;
      if (!pref_clamped) model_u.accumulate_log_likelihood_gradient(ex.question, ex.target, -w, *gradient);
      if (!rej_clamped) model_u.accumulate_log_likelihood_gradient(ex.question, ex.gold, w, *gradient);
    }
  }
  return total * inv_n;
}

double loss_gd_reg(const Model& model_u, const std::vector<RetainExample>& retain, Eigen::VectorXd* gradient) {
  require_nonempty(retain, "loss_gd_reg");
  check_gradient(model_u, gradient);
  const double inv_n = 1.0 / static_cast<double>(retain.size());
  double total = 0.0;
  for (const auto& ex : retain) {
    total -= gradient ? model_u.accumulate_log_likelihood_gradient(ex.question, ex.answer, -inv_n, *gradient)
                      : model_u.log_likelihood(ex.question, ex.answer);
  }
  return total * inv_n;
}

double loss_kld_reg(const Model& model_u, const Model& model_o, const std::vector<RetainExample>& retain,
                    Eigen::VectorXd* gradient) {
  require_nonempty(retain, "loss_kld_reg");
  check_gradient(model_u, gradient);
  if (model_u.vocabulary_size() != model_o.vocabulary_size() ||
      model_u.vocabulary_fingerprint() != model_o.vocabulary_fingerprint())
    throw BackendError("loss_kld_reg: models do not share a vocabulary");
  const double inv_n = 1.0 / static_cast<double>(retain.size());
  double total = 0.0;
  for (const auto& ex : retain) {
    const Eigen::MatrixXd p = model_o.answer_distributions(ex.question, ex.answer);
    double neg_entropy = 0.0;
    for (Eigen::Index r = 0; r < p.rows(); ++r) neg_entropy += math::negative_entropy(p.row(r));
    neg_entropy /= static_cast<double>(p.rows());
    const double soft = gradient ? model_u.accumulate_soft_target_gradient(ex.question, ex.answer, p, -inv_n, *gradient)
                                 : [&] {
                                     const Eigen::MatrixXd q = model_u.answer_distributions(ex.question, ex.answer);
                                     double s = 0.0;
                                     for (Eigen::Index r = 0; r < p.rows(); ++r)
                                       for (Eigen::Index c = 0; c < p.cols(); ++c)
                                         if (p(r, c) > 0.0) s += p(r, c) * std::log(q(r, c));
                                     return s / static_cast<double>(p.rows());
                                   }();
    total += neg_entropy - soft;
  }
  return total * inv_n;
}

LossTerms combined_loss(const LossConfig& config, const Model& model_u, const Model* model_o, const LossBatch& batch,
                        Eigen::VectorXd* gradient) {
  config.validate();
  if (config.needs_reference() && !model_o)
    throw ConfigError(to_string(config.forget_loss) + "+" + to_string(config.regularizer) +
                      " needs a frozen reference model");
  if (batch.forget.empty()) throw ValidationError("combined_loss: batch has no forget examples");
  for (const auto& ex : batch.forget) {
    switch (config.forget_loss) {
      case ForgetLoss::GA:
      case ForgetLoss::NPO:
        if (ex.gold.empty()) throw ValidationError("combined_loss: forget example lacks field 'gold'");
        if (ex.target != ex.gold)
          throw ValidationError("combined_loss: " + to_string(config.forget_loss) +
                                " expects field 'target' to equal 'gold'");
        break;
      case ForgetLoss::RDPO:
        if (ex.gold.empty()) throw ValidationError("combined_loss: forget example lacks field 'gold'");
        [[fallthrough]];
      case ForgetLoss::RGD:
      case ForgetLoss::NAUF:
        if (ex.target.empty()) throw ValidationError("combined_loss: forget example lacks relabel field 'target'");
        break;
    }
  }
  if (config.regularizer != Regularizer::none) {
    if (batch.retain.empty()) throw ValidationError("combined_loss: regularizer needs field 'retain'");
    if (batch.retain.size() != batch.forget.size())
      throw ValidationError("combined_loss: pairing rule needs one retain example per forget example");
  }

  // Each term writes into its own buffer so the weights apply to gradients too.
  // The buffers are reused across calls; large tabular models otherwise spend
  // most of a step allocating.
  thread_local Eigen::VectorXd g_forget, g_reg;
  if (gradient) {
    g_forget.setZero(model_u.num_parameters());
    if (config.regularizer != Regularizer::none) g_reg.setZero(model_u.num_parameters());
  }
  Eigen::VectorXd* gf = gradient ? &g_forget : nullptr;
  Eigen::VectorXd* gr = gradient ? &g_reg : nullptr;

  LossTerms terms;
  switch (config.forget_loss) {
    case ForgetLoss::GA: terms.forget = loss_ga(model_u, batch.forget, gf); break;
    case ForgetLoss::NPO: terms.forget = loss_npo(model_u, *model_o, batch.forget, config.beta, gf); break;
    case ForgetLoss::RGD:
    case ForgetLoss::NAUF: terms.forget = loss_rgd(model_u, batch.forget, gf); break;
    case ForgetLoss::RDPO: terms.forget = loss_rdpo(model_u, *model_o, batch.forget, config.beta, gf); break;
  }
  switch (config.regularizer) {
    case Regularizer::none: break;
    case Regularizer::GD: terms.regularizer = loss_gd_reg(model_u, batch.retain, gr); break;
    case Regularizer::KLD: terms.regularizer = loss_kld_reg(model_u, *model_o, batch.retain, gr); break;
  }
  terms.total = config.forget_weight * terms.forget + config.regularizer_weight * terms.regularizer;
  if (gradient) {
    *gradient += config.forget_weight * g_forget;
    if (config.regularizer != Regularizer::none) *gradient += config.regularizer_weight * g_reg;
  }
  return terms;
}

}  // namespace unlearn
