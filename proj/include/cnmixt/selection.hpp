#ifndef CNMIXT_SELECTION_HPP
#define CNMIXT_SELECTION_HPP

#include <Eigen/Dense>
#include <array>
#include <set>
#include <string>
#include <vector>

#include "cnmixt/structures.hpp"

namespace cnmixt {

struct FitResult;

enum class CriterionCode { AIC, AIC3, AICc, AICu, AWE, BIC, CAIC, ICL };

inline constexpr std::array<CriterionCode, 8> kAllCriteria = {
    CriterionCode::AIC,  CriterionCode::AIC3, CriterionCode::AICc,
    CriterionCode::AICu, CriterionCode::AWE,  CriterionCode::BIC,
    CriterionCode::CAIC, CriterionCode::ICL};

std::string to_string(CriterionCode code);
CriterionCode parse_criterion(const std::string& name);

// All eight criteria, stored in maximize orientation. AICc and AICu are
// undefined for n <= q + 1; they come back as -inf with `degenerate` set.
struct CriteriaValues {
  std::array<double, 8> value{};
  bool degenerate = false;  // AICc / AICu sample-size condition violated

  double operator[](CriterionCode c) const {
    return value[static_cast<int>(c)];
  }
};

// Number of free parameters:
//   (G - 1) mixing + G p means + Sigma count + G alphas + G etas,
// with the alpha / eta terms dropped when those are fixed a priori.
int free_param_count(StructureCode code, int groups, int p, bool alpha_fixed,
                     bool eta_fixed);

// `z` is the fitted posterior; `labels` (empty or length n, -1 unlabeled)
// restricts the ICL entropy term to unlabeled rows.
CriteriaValues criteria(double loglik, int q, int n, const Eigen::MatrixXd& z,
                        const std::vector<int>& labels);

// Best successful fit under `criterion` among candidates passing the
// filters (empty filter = no restriction). Ties break toward fewer free
// parameters, then lexicographic structure name. Throws DegenerateFitError
// listing failure reasons when nothing qualifies.
const FitResult& best_model(const std::vector<FitResult>& results,
                            CriterionCode criterion,
                            const std::set<int>& group_filter = {},
                            const std::set<StructureCode>& code_filter = {});

}  // namespace cnmixt

#endif
