#include "cnmixt/classify.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "cnmixt/errors.hpp"

namespace cnmixt {

std::vector<int> map_assign(const Eigen::MatrixXd& z) {
  std::vector<int> out(z.rows());
  for (int i = 0; i < static_cast<int>(z.rows()); ++i) {
    int best = 0;
    for (int g = 1; g < static_cast<int>(z.cols()); ++g) {
      if (z(i, g) > z(i, best)) best = g;
    }
    out[i] = best;
  }
  return out;
}

DetectionTable detect(const Eigen::MatrixXd& z, const Eigen::MatrixXd& v) {
  if (z.rows() != v.rows() || z.cols() != v.cols())
    throw ConfigError("posterior matrices have mismatched shapes");
  DetectionTable t;
  t.map_group = map_assign(z);
  t.is_good.resize(z.rows());
  for (int i = 0; i < static_cast<int>(z.rows()); ++i) {
    t.is_good[i] = v(i, t.map_group[i]) > 0.5 ? 1 : 0;
  }
  return t;
}

AgreementTable agree(const DetectionTable& det,
                     const std::vector<std::string>& given_groups,
                     const std::vector<char>& mask) {
  const int n = static_cast<int>(det.map_group.size());
  if (static_cast<int>(given_groups.size()) != n)
    throw ConfigError("given partition length does not match data");
  if (!mask.empty() && static_cast<int>(mask.size()) != n)
    throw ConfigError("mask length does not match data");

  int G = 0;
  for (int g : det.map_group) G = std::max(G, g + 1);

  std::map<std::string, int> row_of;
  for (const auto& s : given_groups) row_of.emplace(s, 0);
  int r = 0;
  for (auto& [label, idx] : row_of) idx = r++;

  AgreementTable t;
  t.given.reserve(row_of.size());
  for (const auto& [label, idx] : row_of) t.given.push_back(label);
  t.counts = Eigen::MatrixXi::Zero(r, G + 1);
  for (int i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const int row = row_of[given_groups[i]];
    if (det.is_good[i])
      t.counts(row, det.map_group[i])++;
    else
      t.counts(row, G)++;
    t.compared++;
  }
  return t;
}

std::string format(const AgreementTable& table) {
  const int G = static_cast<int>(table.counts.cols()) - 1;
  size_t label_w = 8;
  for (const auto& s : table.given) label_w = std::max(label_w, s.size());

  std::ostringstream oss;
  oss << std::left << std::setw(static_cast<int>(label_w) + 2) << "givgroup";
  for (int g = 1; g <= G; ++g) oss << std::right << std::setw(6) << g;
  oss << std::right << std::setw(12) << "bad points" << "\n";
  for (size_t r = 0; r < table.given.size(); ++r) {
    oss << std::left << std::setw(static_cast<int>(label_w) + 2)
        << table.given[r];
    for (int c = 0; c <= G; ++c) {
      oss << std::right << std::setw(c == G ? 12 : 6) << table.counts(r, c);
    }
    oss << "\n";
  }
  return oss.str();
}

}  // namespace cnmixt
