#include "causalkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "causalkit/error.hpp"

namespace causalkit {

Dataset::Dataset(std::vector<std::string> columns)
    : columns_(std::move(columns)), data_(columns_.size()) {
  if (std::set<std::string>(columns_.begin(), columns_.end()).size() != columns_.size()) {
    throw Error(ErrorCode::InvalidDataset, "duplicate column name");
  }
}

Dataset::Dataset(std::vector<std::string> columns,
                 std::vector<std::vector<std::uint8_t>> data,
                 std::optional<std::vector<double>> weights)
    : columns_(std::move(columns)), data_(std::move(data)), weights_(std::move(weights)) {
  if (std::set<std::string>(columns_.begin(), columns_.end()).size() != columns_.size()) {
    throw Error(ErrorCode::InvalidDataset, "duplicate column name");
  }
  if (data_.size() != columns_.size()) {
    throw Error(ErrorCode::InvalidDataset, "column count does not match names");
  }
  rows_ = data_.empty() ? (weights_ ? weights_->size() : 0) : data_.front().size();
  for (std::size_t c = 0; c < data_.size(); ++c) {
    if (data_[c].size() != rows_) {
      throw Error(ErrorCode::InvalidDataset, "column '" + columns_[c] + "' has wrong length");
    }
    if (std::any_of(data_[c].begin(), data_[c].end(), [](std::uint8_t v) { return v > 1; })) {
      throw Error(ErrorCode::InvalidDataset, "column '" + columns_[c] + "' is not binary");
    }
  }
  if (weights_) {
    if (weights_->size() != rows_) {
      throw Error(ErrorCode::InvalidDataset, "weight vector has wrong length");
    }
    for (double w : *weights_) {
      if (!std::isfinite(w) || w < 0) {
        throw Error(ErrorCode::InvalidDataset, "weights must be finite and non-negative");
      }
    }
    if (rows_ > 0 && total_weight() <= 0) {
      throw Error(ErrorCode::InvalidDataset, "weights sum to zero");
    }
  }
}

bool Dataset::has_column(std::string_view name) const {
  return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::size_t Dataset::column_index(std::string_view name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) {
    throw Error(ErrorCode::UnknownColumn, "no column named '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - columns_.begin());
}

double Dataset::total_weight() const {
  if (!weights_) return static_cast<double>(rows_);
  return std::accumulate(weights_->begin(), weights_->end(), 0.0);
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const {
  std::vector<std::vector<std::uint8_t>> data;
  data.reserve(names.size());
  for (const auto& n : names) data.push_back(data_[column_index(n)]);
  Dataset out;
  out.columns_ = names;
  out.data_ = std::move(data);
  out.weights_ = weights_;
  out.rows_ = rows_;
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
    throw Error(ErrorCode::InvalidDataset, "duplicate column name");
  }
  return out;
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<std::uint8_t>> data(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    data[c].reserve(rows.size());
    for (auto r : rows) data[c].push_back(data_[c].at(r));
  }
  std::optional<std::vector<double>> weights;
  if (weights_) {
    weights.emplace();
    weights->reserve(rows.size());
    for (auto r : rows) weights->push_back((*weights_)[r]);
  }
  return Dataset(columns_, std::move(data), std::move(weights));
}

Dataset Dataset::with_weights(std::vector<double> weights) const {
  return Dataset(columns_, data_, std::move(weights));
}

Dataset Dataset::without_weights() const {
  Dataset out = *this;
  out.weights_.reset();
  return out;
}

Dataset apply_selection(const Dataset& data, const SelectionRule& rule) {
  auto column = data.column(rule.node);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (column[r] == rule.value) keep.push_back(r);
  }
  if (keep.empty()) return Dataset(data.columns());
  return data.take_rows(keep);
}

CompressedRows compress_rows(const Dataset& data) {
  const std::size_t k = data.cols();
  if (k > 63) throw Error(ErrorCode::InvalidDataset, "too many columns to compress");
  std::vector<std::uint64_t> keys(data.rows(), 0);
  for (std::size_t c = 0; c < k; ++c) {
    auto col = data.column(c);
    const std::uint64_t bit = std::uint64_t{1} << (k - 1 - c);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      if (col[r]) keys[r] |= bit;
    }
  }
  std::vector<std::uint64_t> distinct = keys;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  CompressedRows out;
  out.row_pattern.resize(data.rows());
  std::vector<double> weights(distinct.size(), 0.0);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    auto id = static_cast<std::uint32_t>(
        std::lower_bound(distinct.begin(), distinct.end(), keys[r]) - distinct.begin());
    out.row_pattern[r] = id;
    weights[id] += data.weight(r);
  }
  std::vector<std::vector<std::uint8_t>> columns(k, std::vector<std::uint8_t>(distinct.size()));
  for (std::size_t p = 0; p < distinct.size(); ++p) {
    for (std::size_t c = 0; c < k; ++c) columns[c][p] = (distinct[p] >> (k - 1 - c)) & 1u;
  }
  if (distinct.empty()) {
    out.patterns = Dataset(data.columns());
  } else {
    out.patterns = Dataset(data.columns(), std::move(columns), std::move(weights));
  }
  return out;
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    if (c) out += ',';
    out += data.columns()[c];
  }
  if (data.weighted()) out += (data.cols() ? "," : "") + std::string(kWeightColumn);
  out += '\n';
  out.reserve(out.size() + data.rows() * (data.cols() * 2 + (data.weighted() ? 24 : 0)));
  char buf[32];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += static_cast<char>('0' + data.column(c)[r]);
    }
    if (data.weighted()) {
      std::snprintf(buf, sizeof buf, "%.17g", data.weight(r));
      if (data.cols()) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  for (auto& cell : cells) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
  }
  return cells;
}

}  // namespace

Dataset parse_csv(std::string_view text) {
  std::size_t pos = 0;
  int lineno = 0;
  auto next_line = [&](std::string_view& line) {
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  };

  std::string_view line;
  if (!next_line(line)) throw Error(ErrorCode::ParseError, "empty CSV input", 1);
  auto header = split_commas(line);
  std::vector<std::string> names;
  std::optional<std::size_t> weight_index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == kWeightColumn) {
      weight_index = c;
    } else {
      if (header[c].empty()) {
        throw Error(ErrorCode::ParseError, "line 1: empty column name", 1);
      }
      names.emplace_back(header[c]);
    }
  }
  std::vector<std::vector<std::uint8_t>> data(names.size());
  std::optional<std::vector<double>> weights;
  if (weight_index) weights.emplace();

  while (next_line(line)) {
    auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()),
                  lineno);
    }
    std::size_t col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string_view cell = cells[c];
      if (weight_index && c == *weight_index) {
        double w = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), w);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(w) || w < 0) {
          throw Error(ErrorCode::ParseError,
                      "line " + std::to_string(lineno) + ", column " +
                          std::string(kWeightColumn) + ": bad weight '" + std::string(cell) + "'",
                      lineno);
        }
        weights->push_back(w);
        continue;
      }
      if (cell != "0" && cell != "1") {
        throw Error(ErrorCode::NonBinaryValue,
                    "line " + std::to_string(lineno) + ", column " + names[col] +
                        ": value '" + std::string(cell) + "' is not 0 or 1",
                    lineno, {names[col]});
      }
      data[col].push_back(cell == "1" ? 1 : 0);
      ++col;
    }
  }
  try {
    return Dataset(std::move(names), std::move(data), std::move(weights));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

void write_csv_file(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << to_csv(data);
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace causalkit
