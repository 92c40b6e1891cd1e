#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace causalkit {

/// Rows of named 0/1 columns, stored column-major, with optional per-row
/// non-negative weights. Weights are read either as frequency weights
/// (sampled data) or as probabilities (an enumerated population); the
/// caller decides which.
class Dataset {
 public:
  Dataset() = default;
  /// Empty dataset with the given columns.
  explicit Dataset(std::vector<std::string> columns);
  /// Throws Error(InvalidDataset) on ragged columns, non-binary values,
  /// duplicate names or bad weights.
  Dataset(std::vector<std::string> columns, std::vector<std::vector<std::uint8_t>> data,
          std::optional<std::vector<double>> weights = std::nullopt);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<std::string>& columns() const noexcept { return columns_; }

  bool has_column(std::string_view name) const;
  /// Throws Error(UnknownColumn).
  std::size_t column_index(std::string_view name) const;
  std::span<const std::uint8_t> column(std::size_t index) const { return data_[index]; }
  std::span<const std::uint8_t> column(std::string_view name) const {
    return data_[column_index(name)];
  }

  bool weighted() const noexcept { return weights_.has_value(); }
  /// Row weight, 1 for unweighted data.
  double weight(std::size_t row) const { return weights_ ? (*weights_)[row] : 1.0; }
  std::span<const double> weights() const {
    return weights_ ? std::span<const double>(*weights_) : std::span<const double>();
  }
  double total_weight() const;

  /// Same rows restricted to `names`, in that order. Weights are kept.
  Dataset select_columns(const std::vector<std::string>& names) const;
  /// Rows whose index is listed, in the listed order.
  Dataset take_rows(std::span<const std::size_t> rows) const;
  /// Replace (or attach) row weights.
  Dataset with_weights(std::vector<double> weights) const;
  Dataset without_weights() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::uint8_t>> data_;
  std::optional<std::vector<double>> weights_;
  std::size_t rows_ = 0;
};

struct SelectionRule {
  std::string node;
  int value = 1;

  bool operator==(const SelectionRule&) const = default;
};

/// Rows where `rule.node == rule.value`, order preserved, column retained.
Dataset apply_selection(const Dataset& data, const SelectionRule& rule);

/// Distinct rows of a dataset. Binary data over a few columns has at most
/// 2^cols distinct rows, so estimators fit on these instead of on every row.
struct CompressedRows {
  /// Distinct rows in lexicographic order, weighted by the summed weight of
  /// the rows they stand for.
  Dataset patterns;
  /// Pattern index of each input row.
  std::vector<std::uint32_t> row_pattern;
};

/// Throws Error(InvalidDataset) above 63 columns.
CompressedRows compress_rows(const Dataset& data);

/// Name of the optional weight column in CSV files.
inline constexpr std::string_view kWeightColumn = "__weight";

/// Header row then one line per row; weights (if any) go last as `__weight`
/// printed with 17 significant digits so a round trip is lossless.
std::string to_csv(const Dataset& data);
/// Throws Error(ParseError) or Error(NonBinaryValue) naming line and column.
Dataset parse_csv(std::string_view text);

void write_csv_file(const Dataset& data, const std::string& path);
Dataset read_csv_file(const std::string& path);

}  // namespace causalkit
