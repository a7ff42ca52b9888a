#ifndef CNMIXT_IO_HPP
#define CNMIXT_IO_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cnmixt {

struct Dataset {
  std::vector<std::string> columns;  // numeric column names
  Eigen::MatrixXd values;            // n x p
  std::vector<std::string> labels;   // extracted label column (may be empty)
};

// CSV with a mandatory header row and decimal-point numerics. When
// `label_column` is non-empty that column is extracted as strings and
// removed from the numeric block. Throws ConfigError on malformed input.
Dataset read_csv(const std::string& path, const std::string& label_column = "");

// n x G matrix from a headered CSV (used for manual start z / start v).
Eigen::MatrixXd read_matrix_csv(const std::string& path);

}  // namespace cnmixt

#endif
