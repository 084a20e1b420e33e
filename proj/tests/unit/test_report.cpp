#include <doctest.h>

#include <json.hpp>

#include "core/report.hpp"
#include "support.hpp"

using namespace splitcv;

TEST_CASE("doubles round-trip through their text form (property)") {
  testing::Gen g(99);
  for (int i = 0; i < 1000; ++i) {
    const double v = g.normal() * std::pow(10.0, g.uniform(-30, 30));
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("CSV quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(split_csv_line("\"a,b\",c,\"x\"\"y\"") == std::vector<std::string>{"a,b", "c", "x\"y"});
}

TEST_CASE("score table layout") {
  ScoreReport r;
  r.model_label = "gaussian:2";
  r.metric = Metric::Phi2;
  r.phi2 = 1.25;
  r.alpha = 0.1;
  r.k_realizations = 3;
  r.n_samples = 4;
  r.l_samples = 5;
  r.seed = SeedSpec{42, {}};
  const std::string csv = score_csv(std::span(&r, 1));
  CHECK(csv == std::string("model,metric,value,alpha,K,N,L,master_seed\ngaussian:2,phi2,1.25,0.10000000000000001,3,4,5,42\n") +
                   "# seed=42, version=" + version() + "\n");
  const auto j = nlohmann::json::parse(score_report_json(r));
  CHECK(j["phi2"] == 1.25);
  CHECK(j["K"] == 3);
  CHECK(j["master_seed"] == 42);
}

TEST_CASE("rankings table") {
  const std::vector<RankedCandidate> ranking{{1, "b", 0.5, 1, false}, {0, "a", 0.7, 2, false}};
  const std::string csv = rankings_csv(ranking, SeedSpec{1, {}});
  CHECK(csv.rfind("candidate,score,rank,tie\nb,0.5,1,0\na,0.69999999999999996,2,0\n# seed=1", 0) == 0);
}

TEST_CASE("partials parse and reject garbage") {
  const std::string text = partial_line(0, -1.5) + partial_line(2, 3.25) + partial_line(1, -INFINITY);
  const auto p = parse_partials(text);
  REQUIRE(p.size() == 3);
  CHECK(p.at(0) == -1.5);
  CHECK(p.at(2) == 3.25);
  CHECK(p.at(1) == -INFINITY);
  CHECK_THROWS_KIND(parse_partials("0,abc\n"), ErrorKind::Format);
  CHECK_THROWS_KIND(parse_partials("0.5,1\n"), ErrorKind::Format);
  CHECK_THROWS_KIND(parse_items_csv("item_id,label,metric,value\nx,maybe,phi1,1\n"), ErrorKind::Format);
}

TEST_CASE("text files") {
  testing::TempDir dir("report");
  write_text_file(dir.path / "a.txt", "hello\n");
  CHECK(read_text_file(dir.path / "a.txt") == "hello\n");
  CHECK_THROWS_KIND(read_text_file(dir.path / "missing.txt"), ErrorKind::Io);
  CHECK_THROWS_KIND(write_text_file(dir.path / "no" / "such" / "dir.txt", "x"), ErrorKind::Io);
}
