#include "cnmixt/selection.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cnmixt/classify.hpp"
#include "cnmixt/ecm.hpp"
#include "cnmixt/errors.hpp"

namespace cnmixt {

std::string to_string(CriterionCode code) {
  static const char* names[] = {"AIC",  "AIC3", "AICc", "AICu",
                                "AWE",  "BIC",  "CAIC", "ICL"};
  return names[static_cast<int>(code)];
}

CriterionCode parse_criterion(const std::string& name) {
  for (CriterionCode c : kAllCriteria) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown information criterion '" + name + "'");
}

int free_param_count(StructureCode code, int groups, int p, bool alpha_fixed,
                     bool eta_fixed) {
  int q = (groups - 1) + groups * p + sigma_param_count(code, groups, p);
  if (!alpha_fixed) q += groups;
  if (!eta_fixed) q += groups;
  return q;
}

CriteriaValues criteria(double loglik, int q, int n, const Eigen::MatrixXd& z,
                        const std::vector<int>& labels) {
  const double l2 = 2.0 * loglik;
  const double qd = static_cast<double>(q);
  const double nd = static_cast<double>(n);
  const double neg_inf = -std::numeric_limits<double>::infinity();

  CriteriaValues out;
  auto set = [&out](CriterionCode c, double v) {
    out.value[static_cast<int>(c)] = v;
  };
  set(CriterionCode::AIC, l2 - 2.0 * qd);
  set(CriterionCode::AIC3, l2 - 3.0 * qd);
  if (n > q + 1) {
    const double aicc = l2 - 2.0 * qd - 2.0 * qd * (qd + 1.0) / (nd - qd - 1.0);
    set(CriterionCode::AICc, aicc);
    set(CriterionCode::AICu, aicc - nd * std::log(nd / (nd - qd - 1.0)));
  } else {
    set(CriterionCode::AICc, neg_inf);
    set(CriterionCode::AICu, neg_inf);
    out.degenerate = true;
  }
  set(CriterionCode::AWE, l2 - 2.0 * qd * (1.5 + std::log(nd)));
  const double bic = l2 - qd * std::log(nd);
  set(CriterionCode::BIC, bic);
  set(CriterionCode::CAIC, l2 - qd * (1.0 + std::log(nd)));

  // ICL: entropy term over unlabeled rows only.
  double entropy = 0.0;
  const std::vector<int> groups = map_assign(z);
  for (int i = 0; i < static_cast<int>(z.rows()); ++i) {
    if (!labels.empty() && labels[i] >= 0) continue;
    entropy += std::log(std::max(z(i, groups[i]),
                                 std::numeric_limits<double>::min()));
  }
  set(CriterionCode::ICL, bic + entropy);
  return out;
}

const FitResult& best_model(const std::vector<FitResult>& results,
                            CriterionCode criterion,
                            const std::set<int>& group_filter,
                            const std::set<StructureCode>& code_filter) {
  const FitResult* best = nullptr;
  std::ostringstream failures;
  for (const auto& r : results) {
    if (!group_filter.empty() && !group_filter.count(r.spec.groups)) continue;
    if (!code_filter.empty() && !code_filter.count(r.spec.code)) continue;
    if (!r.ok) {
      failures << "  " << to_string(r.spec.code) << " G=" << r.spec.groups
               << ": " << r.failure << "\n";
      continue;
    }
    if (!best) {
      best = &r;
      continue;
    }
    const double a = r.crit[criterion], b = best->crit[criterion];
    if (a > b ||
        (a == b && (r.free_params < best->free_params ||
                    (r.free_params == best->free_params &&
                     to_string(r.spec.code) < to_string(best->spec.code))))) {
      best = &r;
    }
  }
  if (!best) {
    throw DegenerateFitError("no successful fit among candidates:\n" +
                             failures.str());
  }
  return *best;
}

}  // namespace cnmixt
