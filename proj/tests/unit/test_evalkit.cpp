#include <cmath>
#include <sstream>

#include "doctest.h"
#include "simuda/core/errors.hpp"
#include "simuda/datakit/synthetic.hpp"
#include "simuda/evalkit/evaluate.hpp"
#include "simuda/evalkit/table.hpp"
#include "support.hpp"

using namespace simuda;
using namespace simuda::evalkit;

namespace {

const std::vector<std::string> kVisda{"aeroplane", "bicycle", "bus",        "car",   "horse", "knife",
                                      "motorcycle", "person", "plant", "skateboard", "train", "truck"};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

std::vector<std::string> lines(const std::string& text) { return split(text, '\n'); }

EvalReport random_report(Rng& rng, const std::vector<std::string>& classes, int per_class, const std::string& label) {
  std::vector<int> y, p;
  const int c = static_cast<int>(classes.size());
  for (int k = 0; k < c; ++k)
    for (int i = 0; i < per_class; ++i) {
      y.push_back(k);
      p.push_back(bernoulli(rng, 0.7) ? k : static_cast<int>(uniform_int(rng, 0, c - 1)));
    }
  auto r = report_from_predictions(classes, y, p);
  r.label = label;
  return r;
}

}  // namespace

TEST_CASE("hand-counted macro and micro") {
  // class a: 3 of 3 right, class b: 0 of 1 right -> macro 50, micro 75.
  const auto r = report_from_predictions({"a", "b"}, {0, 0, 0, 1}, {0, 0, 0, 0});
  CHECK(r.per_class_top1[0] == doctest::Approx(100.0));
  CHECK(r.per_class_top1[1] == doctest::Approx(0.0));
  CHECK(r.macro_mean == doctest::Approx(50.0));
  CHECK(r.micro_accuracy == doctest::Approx(75.0));
  CHECK(r.confusion(1, 0) == 1);
  CHECK(r.confusion.sum() == 4);
  CHECK(r.n_samples == 4);
}

TEST_CASE("report is independent of sample order") {
  std::vector<int> y{0, 1, 2, 2, 1, 0, 2}, p{0, 2, 2, 1, 1, 0, 0};
  const auto a = report_from_predictions({"a", "b", "c"}, y, p);
  std::reverse(y.begin(), y.end());
  std::reverse(p.begin(), p.end());
  const auto b = report_from_predictions({"a", "b", "c"}, y, p);
  CHECK(a.confusion == b.confusion);
  CHECK(a.macro_mean == b.macro_mean);
}

TEST_CASE("class with no samples is excluded from the macro mean") {
  const auto r = report_from_predictions({"a", "b", "c"}, {0, 0, 1}, {0, 1, 1});
  CHECK(std::isnan(r.per_class_top1[2]));
  CHECK(r.macro_mean == doctest::Approx(75.0));
  const auto n = confusion_normalized(r);
  CHECK(n.empty_rows == std::vector<int>{2});
  CHECK(std::isnan(n.values(2, 0)));
}

TEST_CASE("duplication invariances") {
  Rng rng(3);
  std::vector<int> y, p;
  for (int i = 0; i < 40; ++i) {
    y.push_back(i % 4);
    p.push_back(static_cast<int>(uniform_int(rng, 0, 3)));
  }
  const auto a = report_from_predictions({"a", "b", "c", "d"}, y, p);
  auto y2 = y, p2 = p;
  y2.insert(y2.end(), y.begin(), y.end());
  p2.insert(p2.end(), p.begin(), p.end());
  const auto b = report_from_predictions({"a", "b", "c", "d"}, y2, p2);
  CHECK(a.macro_mean == doctest::Approx(b.macro_mean));
  CHECK(a.micro_accuracy == doctest::Approx(b.micro_accuracy));
}

TEST_CASE("normalized confusion") {
  const auto perfect = report_from_predictions({"a", "b", "c"}, {0, 1, 2, 2}, {0, 1, 2, 2});
  CHECK(confusion_normalized(perfect).values.isIdentity());

  Rng rng(11);
  const int c = 5, per = 2000;
  std::vector<int> y, p;
  for (int k = 0; k < c; ++k)
    for (int i = 0; i < per; ++i) {
      y.push_back(k);
      p.push_back(static_cast<int>(uniform_int(rng, 0, c - 1)));
    }
  const auto r = report_from_predictions({"a", "b", "c", "d", "e"}, y, p);
  const auto n = confusion_normalized(r);
  const double sigma = std::sqrt((1.0 / c) * (1 - 1.0 / c) / per);
  for (int i = 0; i < c; ++i) {
    CHECK(std::abs(n.values.row(i).sum() - 1.0) < 1e-9);
    for (int j = 0; j < c; ++j) CHECK(std::abs(n.values(i, j) - 1.0 / c) < 3 * sigma);
  }
}

TEST_CASE("table structure") {
  Rng rng(5);
  const auto a = random_report(rng, kVisda, 10, "FT");
  const auto b = random_report(rng, kVisda, 10, "UDA cdan_mcc (CH)");

  const auto csv = lines(render_table({a, b}, TableFormat::csv));
  REQUIRE(csv.size() == 3);
  const auto header = split(csv[0], ',');
  CHECK(header.size() == 1 + 12 + 2);
  CHECK(header[0] == "Method");
  CHECK(header[1] == "Pl");
  CHECK(header[12] == "Tck");
  CHECK(header[13] == "Mean");
  const auto row = split(csv[1], ',');
  CHECK(row.size() == header.size());
  for (std::size_t i = 1; i < row.size(); ++i) {
    const auto dot = row[i].find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(row[i].size() - dot - 1 == 2);
  }

  const auto md = render_table({a, b}, TableFormat::markdown);
  CHECK(md.find("**") != std::string::npos);
  const auto single = render_table({a}, TableFormat::markdown);
  CHECK(single.find("**") == std::string::npos);
}

TEST_CASE("table errors and ordering") {
  Rng rng(6);
  const auto a = random_report(rng, {"x", "y"}, 4, "a");
  const auto b = random_report(rng, {"x", "z"}, 4, "b");
  CHECK_THROWS_AS(render_table({a, b}, TableFormat::csv), ConfigError);
  TableOptions opt;
  opt.class_order = {"y", "x"};
  const auto header = split(lines(render_table({a}, TableFormat::csv, opt))[0], ',');
  CHECK(header[1] == "y");
  opt.class_order = {"y"};
  CHECK_THROWS_AS(render_table({a}, TableFormat::csv, opt), ConfigError);
  auto unstable = a;
  unstable.status = "aborted-unstable";
  CHECK(render_table({unstable}, TableFormat::csv).find("a [aborted-unstable]") != std::string::npos);
  CHECK_THROWS_AS(parse_table_format("xlsx"), ConfigError);
}

TEST_CASE("emit_table and confusion csv") {
  testing::TempDir dir("table");
  Rng rng(7);
  const auto a = random_report(rng, {"x", "y", "z"}, 5, "a");
  emit_table({a}, TableFormat::markdown, dir / "t.md");
  CHECK(std::filesystem::file_size(dir / "t.md") > 0);
  const auto rows = lines(render_confusion_csv(a));
  CHECK(rows.size() == 1 + 3 + 3);
  CHECK(rows[0] == "kind,true,x,y,z");
}

TEST_CASE("evaluate is deterministic") {
  const auto pair = datakit::make_synthetic_pair(3, 4, datakit::ShiftSpec::benchmark(), 2, 32);
  Rng rng(3);
  backbone::ClassifierModel model(backbone::BackboneSpec::compact(16, 32), 3, rng);
  const auto r1 = evaluate(model, pair.target, 5);
  const auto r2 = evaluate(model, pair.target, 12, 3);
  CHECK(r1.confusion == r2.confusion);
  CHECK(r1.n_samples == 12);
  backbone::ClassifierModel wrong(backbone::BackboneSpec::compact(16, 32), 4, rng);
  CHECK_THROWS_AS(evaluate(wrong, pair.target, 5), ConfigError);
}

TEST_CASE("argmax ties go to the lowest index") {
  nn::Matrix<float> z(2, 3);
  z << 1, 3, 3, 2, 2, 2;
  CHECK(argmax_rows(z) == std::vector<int>{1, 0});
}
