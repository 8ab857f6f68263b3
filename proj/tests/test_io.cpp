#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "fbb/channel_io.hpp"

using namespace fbb;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    path = std::string("fbb_test_") + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
           ".json";
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("channel file parsing") {
  SUBCASE("valid file with cost") {
    TempFile f(R"({"input_alphabet":["a","b"],"output_alphabet":["0","1"],
                   "matrix":[[0.9,0.1],[0.2,0.8]],"cost":[0,1]})");
    ChannelFile cf = load_channel(f.path);
    CHECK(cf.channel.input_size == 2);
    CHECK(cf.channel.w(1, 0) == doctest::Approx(0.2));
    CHECK(cf.channel.cost[1] == doctest::Approx(1.0));
    CHECK(cf.input_labels[1] == "b");
  }
  SUBCASE("missing cost defaults to zero") {
    TempFile f(R"({"input_alphabet":["a","b"],"output_alphabet":["0","1"],
                   "matrix":[[0.5,0.5],[0.5,0.5]]})");
    CHECK(load_channel(f.path).channel.cost == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("tiny row-sum drift is renormalized") {
    TempFile f(R"({"input_alphabet":["a","b"],"output_alphabet":["0","1"],
                   "matrix":[[0.9000000003,0.1],[0.1,0.9]]})");
    ChannelFile cf = load_channel(f.path);
    CHECK_FALSE(validate_channel(cf.channel).has_value());
  }
  SUBCASE("large row-sum drift is rejected") {
    TempFile f(R"({"input_alphabet":["a","b"],"output_alphabet":["0","1"],
                   "matrix":[[0.95,0.1],[0.1,0.9]]})");
    CHECK_THROWS_AS(load_channel(f.path), channel_io_error);
  }
  SUBCASE("dimension mismatch is rejected") {
    TempFile f(R"({"input_alphabet":["a","b"],"output_alphabet":["0","1"],
                   "matrix":[[1.0,0.0]]})");
    CHECK_THROWS_AS(load_channel(f.path), channel_io_error);
  }
  SUBCASE("negative entries are rejected") {
    TempFile f(R"({"input_alphabet":["a","b"],"output_alphabet":["0","1"],
                   "matrix":[[1.1,-0.1],[0.5,0.5]]})");
    CHECK_THROWS_AS(load_channel(f.path), channel_io_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_channel("definitely_not_here.json"), channel_io_error);
  }
}

TEST_CASE("csv rows round-trip exactly") {
  CHECK(std::string(kResultCsvHeader) ==
        "n,R,Gamma,variant,value,raw,gamma_star,type_star,penalty_log2,wall_time_ms");
  ResultRow r;
  r.n = 100;
  r.rate = 1.1;
  r.gamma_budget = kInf;
  r.variant = "converse_underline";
  r.value = 1.0 - 101.0 / 1024.0;
  r.raw = r.value;
  r.gamma_star = 0.1 + 1e-16;
  r.type_star = "50:50";
  r.penalty_log2 = -3.3355551234;
  r.wall_time_ms = 12.25;
  ResultRow back = parse_csv_row(to_csv(r));
  CHECK(back.n == r.n);
  CHECK(back.rate == r.rate);
  CHECK(back.gamma_budget == r.gamma_budget);
  CHECK(back.variant == r.variant);
  CHECK(back.value == r.value);
  CHECK(back.raw == r.raw);
  CHECK(back.gamma_star == r.gamma_star);
  CHECK(back.type_star == r.type_star);
  CHECK(back.penalty_log2 == r.penalty_log2);
  CHECK(back.wall_time_ms == r.wall_time_ms);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0, kInf}) {
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("json lines carry the row fields") {
  ResultRow r;
  r.n = 20;
  r.rate = 0.4;
  r.gamma_budget = kInf;
  r.variant = "achievability_J";
  std::string line = to_json_line(r);
  CHECK(line.find("\"n\":20") != std::string::npos);
  CHECK(line.find("\"Gamma\":null") != std::string::npos);
  CHECK(line.find("\"variant\":\"achievability_J\"") != std::string::npos);

  r.gamma_budget = 0.25;
  CHECK(to_json_line(r).find("\"Gamma\":0.25") != std::string::npos);
}

TEST_CASE("grid specs") {
  GridSpec g = parse_grid("R=0.1:0.9:0.1");
  CHECK_FALSE(g.over_n);
  CHECK(grid_values(g).size() == 9);

  GridSpec gn = parse_grid("n=50:200:50");
  CHECK(gn.over_n);
  auto vals = grid_values(gn);
  REQUIRE(vals.size() == 4);
  CHECK(vals[3] == doctest::Approx(200.0));

  CHECK_THROWS_AS(parse_grid("x=1:2:1"), channel_io_error);
  CHECK_THROWS_AS(parse_grid("R=1:2"), channel_io_error);
  CHECK_THROWS_AS(parse_grid("R=2:1:0.5"), channel_io_error);
  CHECK_THROWS_AS(parse_grid("R=1:2:0"), channel_io_error);
}
