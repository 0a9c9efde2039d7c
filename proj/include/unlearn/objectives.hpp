// Unlearning objectives.
//
// Forget-side terms (all means over the forget examples, natural log):
//   GA    mean  log M_u(y|x)                        descending this ascends the loss on y
//   NPO   mean  (2/b) log(1 + (M_u(y|x)/M_o(y|x))^b)
//   RGD   mean -log M_u(y'|x)                       y' an uninformed relabel
//   RDPO  mean -log sig(b log(M_u(y'|x)/M_o(y'|x)) - b log(M_u(y|x)/M_o(y|x)))
//   NAUF  RGD form over name-aware refusal relabels
// Retain-side regularizers:
//   GD    mean -log M_u(y|x)
//   KLD   mean KL(M_o(.|x) || M_u(.|x)), per answer position for sequence models
//
// Every function optionally accumulates the gradient of its value with
// respect to M_u's parameters into `gradient`.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace unlearn {

class Model;

enum class ForgetLoss { GA, NPO, RGD, RDPO, NAUF };
enum class Regularizer { none, GD, KLD };

std::string to_string(ForgetLoss loss);
std::string to_string(Regularizer reg);
ForgetLoss parse_forget_loss(std::string_view text);
Regularizer parse_regularizer(std::string_view text);

/// True when the forget term compares against the frozen original model.
bool needs_reference(ForgetLoss loss);
/// True when forget examples carry a relabel distinct from the gold answer.
bool uses_relabels(ForgetLoss loss);

struct LossConfig {
  ForgetLoss forget_loss = ForgetLoss::NAUF;
  Regularizer regularizer = Regularizer::none;
  double beta = 0.1;
  double forget_weight = 1.0;
  double regularizer_weight = 1.0;

  void validate() const;
  bool needs_reference() const;
};

enum class Provenance {
  original_gold,         // forget question with its gold answer (GA, NPO)
  original_uninformed,   // forget question relabeled "I don't know"-style (RGD, RDPO)
  original_refusal,      // forget question relabeled with a name-aware refusal
  cda_forget_refusal,    // borrowed question, name substituted, refusal answer
  original_retain,       // retain question with its gold answer
  cda_retain_selflabel,  // borrowed question, name substituted, M_o's own answer
};

std::string to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

struct ForgetExample {
  std::string question;
  std::string target;  // gold for GA/NPO, relabel otherwise
  std::string gold;    // may be empty for augmented questions
  std::string owner;
  Provenance provenance = Provenance::original_gold;
};

struct RetainExample {
  std::string question;
  std::string answer;
  std::string owner;
  Provenance provenance = Provenance::original_retain;
};

struct LossBatch {
  std::vector<ForgetExample> forget;
  std::vector<RetainExample> retain;
};

/// Probabilities entering NPO/RDPO ratios are floored here; every floor hit
/// bumps a process-wide counter and the first one is reported on stderr.
inline constexpr double kProbabilityFloor = 1e-12;
std::size_t probability_floor_hits();
void reset_probability_floor_hits();

double loss_ga(const Model& model_u, const std::vector<ForgetExample>& forget, Eigen::VectorXd* gradient = nullptr);
double loss_npo(const Model& model_u, const Model& model_o, const std::vector<ForgetExample>& forget, double beta,
                Eigen::VectorXd* gradient = nullptr);
double loss_rgd(const Model& model_u, const std::vector<ForgetExample>& forget, Eigen::VectorXd* gradient = nullptr);
double loss_rdpo(const Model& model_u, const Model& model_o, const std::vector<ForgetExample>& forget, double beta,
                 Eigen::VectorXd* gradient = nullptr);
double loss_gd_reg(const Model& model_u, const std::vector<RetainExample>& retain,
                   Eigen::VectorXd* gradient = nullptr);
double loss_kld_reg(const Model& model_u, const Model& model_o, const std::vector<RetainExample>& retain,
                    Eigen::VectorXd* gradient = nullptr);

struct LossTerms {
  double forget = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
};

/// forget_weight * forget term + regularizer_weight * regularizer term.
/// `model_o` may be null when the configuration does not need a reference.
LossTerms combined_loss(const LossConfig& config, const Model& model_u, const Model* model_o, const LossBatch& batch,
                        Eigen::VectorXd* gradient = nullptr);

}  // namespace unlearn
