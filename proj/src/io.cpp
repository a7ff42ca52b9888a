#include "cnmixt/io.hpp"

#include <fstream>
#include <sstream>

#include "cnmixt/errors.hpp"

namespace cnmixt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream iss(line);
  while (std::getline(iss, field, ',')) {
    // Trim surrounding whitespace and a trailing CR.
    size_t b = field.find_first_not_of(" \t\r");
    size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, int line_no,
                    const std::string& column) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    std::ostringstream oss;
    oss << "line " << line_no << ", column '" << column
        << "': not a number: '" << s << "'";
    throw ConfigError(oss.str());
  }
}

}  // namespace

Dataset read_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("'" + path + "' is empty (header row required)");

  const std::vector<std::string> header = split_line(line);
  int label_idx = -1;
  Dataset ds;
  for (size_t j = 0; j < header.size(); ++j) {
    if (!label_column.empty() && header[j] == label_column) {
      label_idx = static_cast<int>(j);
    } else {
      ds.columns.push_back(header[j]);
    }
  }
  if (!label_column.empty() && label_idx < 0)
    throw ConfigError("label column '" + label_column + "' not found in '" +
                      path + "'");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream oss;
      oss << "line " << line_no << ": expected " << header.size()
          << " fields, got " << fields.size();
      throw ConfigError(oss.str());
    }
    std::vector<double> row;
    row.reserve(ds.columns.size());
    for (size_t j = 0; j < fields.size(); ++j) {
      if (static_cast<int>(j) == label_idx) {
        ds.labels.push_back(fields[j]);
      } else {
        row.push_back(parse_number(fields[j], line_no, header[j]));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("'" + path + "' has no data rows");

  ds.values.resize(rows.size(), ds.columns.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) ds.values(i, j) = rows[i][j];
  }
  return ds;
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  return read_csv(path).values;
}

}  // namespace cnmixt
