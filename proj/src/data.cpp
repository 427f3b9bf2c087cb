#include "nrc/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "nrc/errors.hpp"
#include "nrc/random.hpp"

namespace nrc {

namespace {

std::vector<std::string> split(const std::string& line, bool commas_only) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_field = false;
  for (char ch : line) {
    const bool sep = commas_only ? ch == ',' : (ch == ',' || ch == ' ' || ch == '\t');
    if (ch == '\r') continue;
    if (sep) {
      if (commas_only || in_field) fields.push_back(cur);
      cur.clear();
      in_field = false;
    } else {
      cur.push_back(ch);
      in_field = true;
    }
  }
  if (commas_only || in_field) fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& text, const std::string& path, int line_no) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  if (first == std::string::npos) throw ParseError(path + ":" + std::to_string(line_no) + ": empty field");
  const std::string trimmed = text.substr(first, last - first + 1);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(trimmed.c_str(), &end);
  if (end != trimmed.c_str() + trimmed.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + trimmed + "'");
  }
  return v;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

struct Table {
  std::vector<std::vector<double>> rows;
  int blank_lines = 0;
};

Table read_table(const std::string& path, std::size_t expected_fields, bool commas_only) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Table table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      ++table.blank_lines;
      continue;
    }
    const auto fields = split(line, commas_only);
    if (fields.size() != expected_fields) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(expected_fields) +
                       " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, path, line_no));
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw ParseError(path + ": no data rows");
  return table;
}

}  // namespace

const std::vector<std::string>& spambase_columns() {
  static const std::vector<std::string> names = [] {
    const char* words[] = {"make",     "address", "all",        "3d",     "our",     "over",    "remove",
                           "internet", "order",   "mail",       "receive", "will",    "people",  "report",
                           "addresses", "free",   "business",   "email",  "you",     "credit",  "your",
                           "font",     "000",     "money",      "hp",     "hpl",     "george",  "650",
                           "lab",      "labs",    "telnet",     "857",    "data",    "415",     "85",
                           "technology", "1999",  "parts",      "pm",     "direct",  "cs",      "meeting",
                           "original", "project", "re",         "edu",    "table",   "conference"};
    std::vector<std::string> out;
    for (const char* w : words) out.push_back(std::string("word_freq_") + w);
    for (const char* c : {";", "(", "[", "!", "$", "#"}) out.push_back(std::string("char_freq_") + c);
    out.push_back("capital_run_length_average");
    out.push_back("capital_run_length_longest");
    out.push_back("capital_run_length_total");
    return out;
  }();
  return names;
}

Dataset load_spambase(const std::string& path, const std::vector<std::string>& features) {
  const auto& columns = spambase_columns();
  std::vector<int> picked;
  for (const auto& name : features) {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) it = std::find(columns.begin(), columns.end(), "word_freq_" + name);
    if (it == columns.end()) throw ParseError("unknown spambase column '" + name + "'");
    picked.push_back(static_cast<int>(it - columns.begin()));
  }
  if (picked.empty()) throw InvalidArgument("select at least one spambase column");

  const Table table = read_table(path, columns.size() + 1, true);
  Dataset ds;
  ds.kind = TaskKind::Classification;
  ds.blank_lines_skipped = table.blank_lines;
  ds.features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(picked.size()));
  ds.targets.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (int c : picked) ds.feature_names.push_back(columns[static_cast<std::size_t>(c)]);

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t k = 0; k < picked.size(); ++k) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = row[static_cast<std::size_t>(picked[k])];
    }
    const double label = row.back();
    if (label != 0.0 && label != 1.0) {
      throw ParseError(path + ": row " + std::to_string(r + 1) + " has label " + std::to_string(label) +
                       ", expected 0 or 1");
    }
    ds.targets(static_cast<Eigen::Index>(r)) = label == 1.0 ? 1.0 : -1.0;
  }
  return ds;
}

const std::vector<std::string>& housing_columns() {
  static const std::vector<std::string> names = {"CRIM", "ZN",  "INDUS",   "CHAS", "NOX",   "RM",   "AGE",
                                                 "DIS",  "RAD", "TAX",     "PTRATIO", "B",  "LSTAT", "MEDV"};
  return names;
}

Dataset load_housing(const std::string& path, const std::vector<int>& feature_columns) {
  const auto& columns = housing_columns();
  const int target = static_cast<int>(columns.size()) - 1;
  if (feature_columns.empty()) throw InvalidArgument("select at least one housing column");
  for (int c : feature_columns) {
    if (c < 0 || c >= target) throw InvalidArgument("housing feature column " + std::to_string(c) + " out of range");
  }

  const Table table = read_table(path, columns.size(), false);
  Dataset ds;
  ds.kind = TaskKind::Regression;
  ds.blank_lines_skipped = table.blank_lines;
  ds.features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(feature_columns.size()));
  ds.targets.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (int c : feature_columns) ds.feature_names.push_back(columns[static_cast<std::size_t>(c)]);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t k = 0; k < feature_columns.size(); ++k) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          table.rows[r][static_cast<std::size_t>(feature_columns[k])];
    }
    ds.targets(static_cast<Eigen::Index>(r)) = table.rows[r][static_cast<std::size_t>(target)];
  }
  return ds;
}

void standardize(Dataset& ds) {
  for (Eigen::Index c = 0; c < ds.cols(); ++c) {
    auto col = ds.features.col(c);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(ds.rows(), 1)));
    if (sd > 0.0) col /= sd;
  }
}

std::vector<Dataset> partition(const Dataset& ds, int agents, std::uint64_t seed) {
  if (agents < 1) throw InvalidArgument("partition needs at least one agent");
  if (agents > ds.rows()) throw InvalidArgument("more agents than examples");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(ds.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  const auto total = static_cast<std::size_t>(ds.rows());
  const auto n = static_cast<std::size_t>(agents);
  const std::size_t base = total / n;
  const std::size_t extra = total % n;

  std::vector<Dataset> parts;
  parts.reserve(n);
  std::size_t pos = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t size = base + (a < extra ? 1 : 0);
    Dataset part;
    part.kind = ds.kind;
    part.feature_names = ds.feature_names;
    part.features.resize(static_cast<Eigen::Index>(size), ds.cols());
    part.targets.resize(static_cast<Eigen::Index>(size));
    for (std::size_t r = 0; r < size; ++r, ++pos) {
      part.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(order[pos]);
      part.targets(static_cast<Eigen::Index>(r)) = ds.targets(order[pos]);
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

CostSet to_costs(const std::vector<Dataset>& parts, const LossParams& params) {
  if (!(params.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(params.beta > 0.0)) throw InvalidArgument("beta must be positive");
  CostSet costs;
  costs.reserve(parts.size());
  for (const auto& part : parts) {
    if (part.kind == TaskKind::Classification) {
      costs.push_back(std::make_shared<BinomialDevianceCost>(part.features, part.targets, params.gamma));
    } else {
      costs.push_back(std::make_shared<SmoothHuberCost>(part.features, part.targets, params.beta, params.gamma));
    }
  }
  return costs;
}

}  // namespace nrc
