#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "predstab/dataset.hpp"
#include "predstab/errors.hpp"

namespace predstab {

namespace detail {

// One physical line -> fields. Comma separated, optional double-quote
// quoting with "" escapes, trailing \r stripped.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // CRLF line ending
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::optional<double> parse_double(const std::string& s) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  if (b == e) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) return std::nullopt;
  return v;
}

}  // namespace detail

// Read a headed CSV into a Dataset. All columns other than the outcome
// and the optional subgroup column become predictors, in file order.
// Fails fast on anything malformed, naming the row and column.
inline Dataset load_csv(const std::string& path, const std::string& outcome_column,
                        const std::string& subgroup_column = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("load_csv: cannot open file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw InvalidInput("load_csv: '" + path + "' is empty (no header row)");
  const auto header = detail::split_csv_line(line);

  std::ptrdiff_t outcome_idx = -1, subgroup_idx = -1;
  std::vector<std::size_t> pred_idx;
  std::vector<std::string> pred_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == outcome_column) {
      if (outcome_idx >= 0)
        throw InvalidInput("load_csv: duplicate outcome column '" + outcome_column + "'");
      outcome_idx = static_cast<std::ptrdiff_t>(j);
    } else if (!subgroup_column.empty() && header[j] == subgroup_column) {
      subgroup_idx = static_cast<std::ptrdiff_t>(j);
    } else {
      pred_idx.push_back(j);
      pred_names.push_back(header[j]);
    }
  }
  if (outcome_idx < 0)
    throw InvalidInput("load_csv: outcome column '" + outcome_column +
                       "' not found in header of '" + path + "'");
  if (!subgroup_column.empty() && subgroup_idx < 0)
    throw InvalidInput("load_csv: subgroup column '" + subgroup_column +
                       "' not found in header of '" + path + "'");
  if (pred_idx.empty())
    throw InvalidInput("load_csv: no predictor columns left in '" + path + "'");

  Dataset ds;
  ds.n_cols = pred_idx.size();
  ds.predictor_names = pred_names;

  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "load_csv: row " << row << " has " << fields.size()
          << " fields, header has " << header.size();
      throw InvalidInput(msg.str());
    }
    for (std::size_t k = 0; k < pred_idx.size(); ++k) {
      const auto v = detail::parse_double(fields[pred_idx[k]]);
      if (!v) {
        std::ostringstream msg;
        msg << "load_csv: row " << row << ", column '" << pred_names[k]
            << "': non-numeric value '" << fields[pred_idx[k]] << "'";
        throw InvalidInput(msg.str());
      }
      ds.predictors.push_back(*v);
    }
    const auto y = detail::parse_double(fields[static_cast<std::size_t>(outcome_idx)]);
    if (!y || (*y != 0.0 && *y != 1.0)) {
      std::ostringstream msg;
      msg << "load_csv: row " << row << ", column '" << outcome_column
          << "': outcome must be 0 or 1, got '"
          << fields[static_cast<std::size_t>(outcome_idx)] << "'";
      throw InvalidInput(msg.str());
    }
    ds.outcome.push_back(static_cast<int>(*y));
    if (subgroup_idx >= 0)
      ds.subgroup.push_back(fields[static_cast<std::size_t>(subgroup_idx)]);
    ++ds.n_rows;
  }
  if (ds.n_rows == 0)
    throw InvalidInput("load_csv: '" + path + "' has a header but no data rows");
  ds.validate();
  return ds;
}

}  // namespace predstab
