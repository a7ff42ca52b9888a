#include <cmath>

#include "cnmixt/ecm.hpp"
#include "cnmixt/errors.hpp"
#include "cnmixt/selection.hpp"
#include "doctest.h"

using namespace cnmixt;

namespace {

FitResult candidate(StructureCode code, int groups, double bic_like,
                    int q, bool ok = true) {
  FitResult fit;
  fit.spec = {code, groups};
  fit.ok = ok;
  fit.failure = ok ? "" : "synthetic failure";
  fit.free_params = q;
  for (CriterionCode c : kAllCriteria) {
    fit.crit.value[static_cast<int>(c)] = bic_like;
  }
  return fit;
}

}  // namespace

TEST_CASE("criterion names round-trip") {
  for (CriterionCode code : kAllCriteria) {
    CHECK(parse_criterion(to_string(code)) == code);
  }
  CHECK_THROWS_AS(parse_criterion("MDL"), ConfigError);
}

TEST_CASE("free_param_count") {
  CHECK(free_param_count(StructureCode::EEI, 2, 2, false, false) == 11);
  CHECK(free_param_count(StructureCode::EII, 1, 2, true, true) == 3);
  CHECK(free_param_count(StructureCode::VVV, 3, 13, false, false) == 320);
  // Fixing alpha or eta drops G parameters each.
  CHECK(free_param_count(StructureCode::EEI, 2, 2, true, false) == 9);
  CHECK(free_param_count(StructureCode::EEI, 2, 2, false, true) == 9);
}

TEST_CASE("criteria arithmetic") {
  const int n = 420, q = 11;
  const double l = -1835.8;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, 2);
  for (int i = 0; i < n; ++i) z(i, i % 2) = 1.0;  // hard partition
  const CriteriaValues c = criteria(l, q, n, z, {});

  SUBCASE("published BIC value") {
    CHECK(c[CriterionCode::BIC] ==
          doctest::Approx(2 * l - q * std::log(n)).epsilon(1e-12));
    CHECK(std::abs(c[CriterionCode::BIC] - (-3738.0)) < 1.0);
  }

  SUBCASE("definitions") {
    CHECK(c[CriterionCode::AIC] == doctest::Approx(2 * l - 2 * q));
    CHECK(c[CriterionCode::AIC3] - c[CriterionCode::AIC] ==
          doctest::Approx(-q));
    CHECK(c[CriterionCode::AICc] ==
          doctest::Approx(c[CriterionCode::AIC] -
                          2.0 * q * (q + 1) / (n - q - 1)));
    CHECK(c[CriterionCode::AICu] ==
          doctest::Approx(c[CriterionCode::AICc] -
                          n * std::log(n / double(n - q - 1))));
    CHECK(c[CriterionCode::AWE] ==
          doctest::Approx(2 * l - 2 * q * (1.5 + std::log(n))));
    CHECK(c[CriterionCode::CAIC] ==
          doctest::Approx(2 * l - q * (1 + std::log(n))));
  }

  SUBCASE("hard z makes ICL equal BIC") {
    CHECK(c[CriterionCode::ICL] ==
          doctest::Approx(c[CriterionCode::BIC]).epsilon(1e-12));
  }

  SUBCASE("order relations") {
    CHECK(c[CriterionCode::ICL] <= c[CriterionCode::BIC] + 1e-12);
    CHECK(c[CriterionCode::CAIC] < c[CriterionCode::BIC]);
    CHECK(c[CriterionCode::AIC3] < c[CriterionCode::AIC]);
    CHECK(c[CriterionCode::AICc] < c[CriterionCode::AIC]);
  }
}

TEST_CASE("soft z gives ICL strictly below BIC; labels mask the penalty") {
  // ICL adds ln z at the MAP column per row: ln(1/2) for a 50/50 row.
  const int n = 40;
  Eigen::MatrixXd z = Eigen::MatrixXd::Constant(n, 2, 0.5);
  const CriteriaValues soft = criteria(-100.0, 5, n, z, {});
  CHECK(soft[CriterionCode::ICL] ==
        doctest::Approx(soft[CriterionCode::BIC] - n * std::log(2.0)));

  // Label half the rows: only unlabeled ones count toward the penalty.
  std::vector<int> labels(n, -1);
  for (int i = 0; i < n / 2; ++i) labels[i] = 0;
  const CriteriaValues masked = criteria(-100.0, 5, n, z, labels);
  CHECK(masked[CriterionCode::ICL] ==
        doctest::Approx(masked[CriterionCode::BIC] - n / 2 * std::log(2.0)));
}

TEST_CASE("AICc and AICu degenerate for tiny samples") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(5, 1);
  const CriteriaValues c = criteria(-10.0, 7, 5, z, {});
  CHECK(c.degenerate);
  CHECK(std::isinf(c[CriterionCode::AICc]));
  CHECK(c[CriterionCode::AICc] < 0);
  CHECK(std::isinf(c[CriterionCode::AICu]));
  CHECK(std::isfinite(c[CriterionCode::BIC]));
}

TEST_CASE("best_model selection") {
  SUBCASE("single candidate wins") {
    std::vector<FitResult> results = {candidate(StructureCode::EII, 2, -50, 4)};
    CHECK(&best_model(results, CriterionCode::BIC) == &results[0]);
  }

  SUBCASE("argmax of the criterion") {
    std::vector<FitResult> results = {
        candidate(StructureCode::EII, 2, -80, 4),
        candidate(StructureCode::VVV, 2, -40, 12),
        candidate(StructureCode::EEE, 3, -60, 9)};
    CHECK(best_model(results, CriterionCode::BIC).spec.code ==
          StructureCode::VVV);
  }

  SUBCASE("ties break by fewer free parameters, then name") {
    std::vector<FitResult> results = {
        candidate(StructureCode::VVI, 2, -50, 9),
        candidate(StructureCode::VEI, 2, -50, 5),
        candidate(StructureCode::EEI, 2, -50, 5)};
    CHECK(best_model(results, CriterionCode::AIC).spec.code ==
          StructureCode::EEI);  // q tie at 5, EEI < VEI lexicographically
  }

  SUBCASE("failed fits are skipped") {
    std::vector<FitResult> results = {
        candidate(StructureCode::VVV, 2, -10, 12, false),
        candidate(StructureCode::EII, 2, -90, 4)};
    CHECK(best_model(results, CriterionCode::BIC).spec.code ==
          StructureCode::EII);
  }

  SUBCASE("filters restrict the pool") {
    std::vector<FitResult> results = {
        candidate(StructureCode::EII, 2, -10, 4),
        candidate(StructureCode::EII, 3, -20, 5),
        candidate(StructureCode::VVV, 3, -30, 20)};
    CHECK(best_model(results, CriterionCode::BIC, {3}).spec.groups == 3);
    CHECK(best_model(results, CriterionCode::BIC, {3}, {StructureCode::VVV})
              .spec.code == StructureCode::VVV);
  }

  SUBCASE("all failed throws with the reasons") {
    std::vector<FitResult> results = {
        candidate(StructureCode::EII, 2, -10, 4, false)};
    CHECK_THROWS_AS(best_model(results, CriterionCode::BIC),
                    DegenerateFitError);
    try {
      best_model(results, CriterionCode::BIC);
    } catch (const DegenerateFitError& e) {
      CHECK(std::string(e.what()).find("synthetic failure") !=
            std::string::npos);
    }
  }
}
