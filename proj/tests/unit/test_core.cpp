#include <set>

#include "doctest.h"
#include "simuda/core/errors.hpp"
#include "simuda/core/fileio.hpp"
#include "simuda/core/keyvalue.hpp"
#include "simuda/core/random.hpp"
#include "support.hpp"

using namespace simuda;

TEST_CASE("keyvalue parses scalars, arrays and sections") {
  const auto doc = KeyValueDoc::parse(R"(
# comment
name = "a \"quoted\" word"
[optim]
lr = 0.01        # trailing comment
epochs = 20
flag = true
grid = [1e-3, 0.1, 10]
)");
  CHECK(doc.find("name")->as_string("name") == "a \"quoted\" word");
  CHECK(doc.find("optim.lr")->as_real("optim.lr") == doctest::Approx(0.01));
  CHECK(doc.find("optim.epochs")->as_integer("optim.epochs") == 20);
  CHECK(doc.find("optim.epochs")->as_real("optim.epochs") == 20.0);
  CHECK(doc.find("optim.flag")->as_boolean("optim.flag"));
  CHECK(doc.find("optim.grid")->as_array("optim.grid").size() == 3);
  CHECK_THROWS_AS(doc.find("optim.lr")->as_string("optim.lr"), ConfigError);
}

TEST_CASE("keyvalue render round-trips") {
  const auto doc = KeyValueDoc::parse("b = [1, 2.5]\na = \"x\\ty\"\nc = false\nd = -3\ne = 1e-05\n");
  const auto again = KeyValueDoc::parse(doc.render());
  CHECK(again.entries() == doc.entries());
  CHECK(again.render() == doc.render());
}

TEST_CASE("keyvalue rejects malformed input") {
  CHECK_THROWS_AS(KeyValueDoc::parse("x = bare"), ConfigError);
  CHECK_THROWS_AS(KeyValueDoc::parse("x = \"open"), ConfigError);
  CHECK_THROWS_AS(KeyValueDoc::parse("x = [1, [2]]"), ConfigError);
  CHECK_THROWS_AS(KeyValueDoc::parse("[unterminated\n"), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorKind::config) == 2);
  CHECK(exit_code_for(ErrorKind::data) == 3);
  CHECK(exit_code_for(ErrorKind::dependency) == 4);
  CHECK(exit_code_for(IngestionError("x").kind()) == 3);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(42, a, b));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(42, 1) == derive_seed(42, 1));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

TEST_CASE("truncated normal stays in two sigma") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double v = truncated_normal(rng, 0.02);
    CHECK(std::abs(v) <= 0.04);
  }
}

TEST_CASE("atomic write and fnv hash") {
  testing::TempDir dir("core");
  const auto p = dir / "sub/file.txt";
  write_text_atomic(p, "hello");
  CHECK(read_text(p) == "hello");
  write_text_atomic(p, "again");
  CHECK(read_text(p) == "again");
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}
