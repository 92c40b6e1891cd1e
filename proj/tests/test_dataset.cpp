#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <functional>

#include "causalkit/dataset.hpp"
#include "causalkit/error.hpp"

using namespace causalkit;

namespace {

Dataset small() {
  return Dataset({"a", "b"}, {{0, 1, 1, 0, 1}, {1, 1, 0, 0, 1}});
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidDataset;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("construction checks shape and values") {
  auto d = small();
  CHECK(d.rows() == 5);
  CHECK(d.cols() == 2);
  CHECK(d.total_weight() == 5.0);
  CHECK_FALSE(d.weighted());
  CHECK(code_of([] { Dataset({"a", "a"}); }) == ErrorCode::InvalidDataset);
  CHECK(code_of([] { Dataset({"a", "b"}, {{0, 1}, {1}}); }) == ErrorCode::InvalidDataset);
  CHECK(code_of([] { Dataset({"a"}, {{0, 2}}); }) == ErrorCode::InvalidDataset);
  CHECK(code_of([] { Dataset({"a"}, {{0, 1}}, std::vector<double>{1.0, -1.0}); }) ==
        ErrorCode::InvalidDataset);
  CHECK(code_of([] { Dataset({"a"}, {{0, 1}}, std::vector<double>{0.0, 0.0}); }) ==
        ErrorCode::InvalidDataset);
  CHECK(code_of([] { small().column("zzz"); }) == ErrorCode::UnknownColumn);
}

TEST_CASE("column selection and row subsets") {
  auto d = small();
  auto b = d.select_columns({"b"});
  CHECK(b.columns() == std::vector<std::string>{"b"});
  CHECK(b.rows() == 5);
  std::vector<std::size_t> rows = {4, 0};
  auto t = d.take_rows(rows);
  CHECK(t.rows() == 2);
  CHECK(t.column("a")[0] == 1);
  CHECK(t.column("b")[1] == 1);
  auto w = d.with_weights({1, 2, 3, 4, 5});
  CHECK(w.total_weight() == 15.0);
  CHECK(w.take_rows(rows).weight(0) == 5.0);
  CHECK(w.without_weights() == d);
}

TEST_CASE("apply_selection keeps matching rows in order") {
  auto d = small();
  auto s = apply_selection(d, {"a", 1});
  CHECK(s.rows() == 3);
  CHECK(s.columns() == d.columns());
  CHECK(s.column("b")[0] == 1);
  CHECK(s.column("b")[1] == 0);
  CHECK(apply_selection(s, {"a", 1}) == s);

  auto zeros = Dataset({"z", "y"}, {{0, 0, 0}, {1, 0, 1}});
  auto empty = apply_selection(zeros, {"z", 1});
  CHECK(empty.rows() == 0);
  CHECK(empty.columns() == zeros.columns());
  CHECK(code_of([&] { apply_selection(d, {"q", 1}); }) == ErrorCode::UnknownColumn);
}

TEST_CASE("compress_rows sums weights per distinct row") {
  auto d = small().with_weights({0.5, 1, 2, 4, 8});
  auto c = compress_rows(d);
  // Distinct rows: (0,0) (0,1) (1,0) (1,1)
  REQUIRE(c.patterns.rows() == 4);
  CHECK(c.patterns.weight(0) == 4.0);
  CHECK(c.patterns.weight(1) == 0.5);
  CHECK(c.patterns.weight(2) == 2.0);
  CHECK(c.patterns.weight(3) == 9.0);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    auto p = c.row_pattern[r];
    CHECK(c.patterns.column("a")[p] == d.column("a")[r]);
    CHECK(c.patterns.column("b")[p] == d.column("b")[r]);
  }
  CHECK(compress_rows(Dataset({"a"})).patterns.rows() == 0);
}

TEST_CASE("CSV round trip is lossless, weights included") {
  auto d = small().with_weights({0.1, 1.0 / 3.0, 2e-17, 5, 1e10});
  auto back = parse_csv(to_csv(d));
  CHECK(back == d);
  CHECK(parse_csv(to_csv(small())) == small());
  CHECK(to_csv(small()).substr(0, 4) == "a,b\n");
}

TEST_CASE("CSV parse errors name line and column") {
  try {
    parse_csv("x,y\n0,1\n1,2\n");
    FAIL("accepted a non-binary value");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonBinaryValue);
    CHECK(e.line() == 3);
    CHECK(e.nodes() == std::vector<std::string>{"y"});
    CHECK(std::string(e.what()).find("line 3, column y") != std::string::npos);
  }
  CHECK(code_of([] { parse_csv("x,y\n0\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv("x,__weight\n0,abc\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_csv("x,x\n0,1\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("CSV tolerates CRLF and surrounding spaces") {
  auto d = parse_csv("a , b\r\n 1, 0\r\n0 ,1\r\n");
  CHECK(d.columns() == std::vector<std::string>{"a", "b"});
  CHECK(d.rows() == 2);
  CHECK(d.column("a")[0] == 1);
}

TEST_CASE("file round trip") {
  auto path = std::filesystem::temp_directory_path() / "causalkit_dataset_test.csv";
  write_csv_file(small(), path.string());
  CHECK(read_csv_file(path.string()) == small());
  std::filesystem::remove(path);
  CHECK(code_of([] { read_csv_file("/nonexistent/file.csv"); }) == ErrorCode::IoError);
}

}  // TEST_SUITE
