#ifndef CNMIXT_CLASSIFY_HPP
#define CNMIXT_CLASSIFY_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cnmixt {

// Per-row argmax of the posterior; ties break toward the lowest index.
std::vector<int> map_assign(const Eigen::MatrixXd& z);

struct DetectionTable {
  std::vector<int> map_group;  // 0-based fitted group per observation
  std::vector<char> is_good;   // v at the MAP group strictly above 0.5
};

DetectionTable detect(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v);

// Cross tabulation of a given partition against the fitted one; bad points
// occupy their own final column instead of their fitted-group column.
struct AgreementTable {
  std::vector<std::string> given;            // row labels, sorted
  Eigen::MatrixXi counts;                    // rows x (G + 1)
  int compared = 0;                          // number of rows tallied
};

// `mask` (empty or length n) selects the compared observations; in
// classification mode the caller masks out the labeled rows.
AgreementTable agree(const DetectionTable& det,
                     const std::vector<std::string>& given_groups,
                     const std::vector<char>& mask = {});

std::string format(const AgreementTable& table);

}  // namespace cnmixt

#endif
