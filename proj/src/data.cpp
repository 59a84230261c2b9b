#include "droboost/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "droboost/errors.hpp"

namespace droboost {

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string location(std::size_t line, std::size_t column) {
  return "row " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(trim(field));
  return fields;
}

Dataset read_csv(std::istream& in, const Schema& schema, const CsvOptions& options) {
  if (options.skip_rows < 0) throw std::invalid_argument("skip_rows must be >= 0");
  const auto* generic = std::get_if<GenericSchema>(&schema);
  if (generic && options.skip_rows < 1) throw DataError("the generic schema needs a header row");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  for (int k = 0; k < options.skip_rows; ++k) {
    if (!std::getline(in, line)) throw DataError("file is empty");
    ++line_no;
    header = split_csv_line(line);
  }

  std::size_t width = 0;
  std::size_t label_col = 0;
  if (generic) {
    auto it = std::find(header.begin(), header.end(), generic->label_column);
    if (it == header.end()) throw DataError("label column '" + generic->label_column + "' not found in header");
    label_col = static_cast<std::size_t>(it - header.begin());
    width = header.size();
    if (width < 2) throw DataError("generic schema needs at least one feature column");
  } else {
    width = kUciPredictors + 2;
    label_col = width - 1;
  }

  std::vector<double> features;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + " at row " + std::to_string(line_no));
    }
    if (cells.size() != width) {
      throw DataError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col) continue;
      if (!generic && c == 0) continue;  // ID column
      double value = 0.0;
      if (!parse_double(cells[c], value)) {
        throw DataError("non-numeric value '" + cells[c] + "' at " + location(line_no, c + 1));
      }
      features.push_back(value);
    }
    const std::string& y = cells[label_col];
    if (generic) {
      labels.push_back(y == generic->positive_value ? 1 : -1);
    } else if (y == "1") {
      labels.push_back(1);
    } else if (y == "0") {
      labels.push_back(-1);
    } else {
      throw DataError("default flag '" + y + "' at " + location(line_no, label_col + 1) + " is not 0 or 1");
    }
  }
  if (labels.empty()) throw DataError("file has no data rows");
  const std::size_t d = generic ? width - 1 : kUciPredictors;
  return Dataset(std::move(features), d, std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_csv(in, schema, options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  SplitMix64 gen(master ^ (0xD1B54A32D192ED03ull * (k + 1)));
  return gen.next();
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  if (spec.train_size == 0 || spec.train_size >= data.size()) {
    throw std::invalid_argument("train_size must lie in (0, " + std::to_string(data.size()) + "), got " +
                                std::to_string(spec.train_size));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (spec.shuffle) {
    SplitMix64 rng(spec.seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  }
  std::span<const std::size_t> all(order);
  return {data.subset(all.first(spec.train_size)), data.subset(all.subspan(spec.train_size))};
}

}  // namespace droboost
