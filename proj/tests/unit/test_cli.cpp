#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "ietrial/error.hpp"
#include "published.hpp"
#include "report.hpp"
#include "reproduce.hpp"

using namespace ietrial;
using namespace ietrial::cli;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(IETRIAL_BINARY) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = std::string(IETRIAL_TEST_TMP) + "/" + name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

const char* kFigure1Decomposition =
    "table,events_screen,nonevents_screen,events_control,nonevents_control\n"
    "ever,650,1850,750,1750\n"
    "never,250,47250,250,47250\n";

// screen / control non-compliance 40/80 among D+, 80/40 among D-
const char* kFigureS3Decomposition =
    "table,events_screen,nonevents_screen,events_control,nonevents_control\n"
    "ever,390,370,150,1050\n"
    "never,150,9450,50,28350\n"
    "unknown,360,39280,800,19600\n";

const std::vector<Cell>& find_row(const Report& r, const std::string& analysis, const std::string& est) {
  for (const auto& row : r.rows) {
    if (std::get<std::string>(row[0]) == analysis && std::get<std::string>(row[2]) == est) return row;
  }
  FAIL("row not found: " << analysis << " " << est);
  static std::vector<Cell> none;
  return none;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config defaults and fields") {
    const RunConfig c = parse_config(R"({"scenario": {"p_m": 0.1, "rr_pos": 0.9, "rr": 0.95},
                                         "sim": {"reps": 200, "seed": 4}})");
    REQUIRE(c.cells.size() == 1);
    CHECK(c.cells[0].scenario.p_m == 0.1);
    CHECK(c.cells[0].scenario.total_n == 100000);
    CHECK(c.cells[0].reps == 200);
    CHECK(c.cells[0].seed == 4);
    CHECK_FALSE(c.cells[0].sampling);
    CHECK(default_config().cells.size() == 1);
  }

  TEST_CASE("config mechanisms") {
    const RunConfig c = parse_config(R"({"mechanisms": {
        "sampling": {"f_event": 0.95, "f_nonevent": 0.5},
        "degradation": {"loss_event": 0.1, "loss_nonevent": 0.2, "retest_correction": true}},
        "output": {"format": "json", "path": "x.json"}})");
    REQUIRE(c.cells.size() == 1);
    REQUIRE(c.cells[0].sampling);
    CHECK(c.cells[0].sampling->fraction(0) == 0.95);
    CHECK(c.cells[0].degradation->loss_nonevent == 0.2);
    CHECK(c.cells[0].retest_correction);
    CHECK(c.format == Format::json);
    CHECK(c.out_path == "x.json");
  }

  TEST_CASE("config sweeps expand as a cartesian product, first axis slowest") {
    const RunConfig c = parse_config(R"({"scenario": {"total_n": [50000, 100000]},
        "mechanisms": {"degradation": {"loss_event": [0.0, 0.1, 0.2], "loss_nonevent": 0.5}}})");
    REQUIRE(c.cells.size() == 6);
    CHECK(c.cells[0].scenario.total_n == 50000);
    CHECK(c.cells[2].scenario.total_n == 50000);
    CHECK(c.cells[3].scenario.total_n == 100000);
    CHECK(c.cells[1].degradation->loss_event == 0.1);
    CHECK(c.cells[5].degradation->loss_event == 0.2);
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scenaro": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"pm": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"p_m": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": {"p_m": "x"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sim": {"reps": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"mechanisms": {"sampling": {"f_event": 1.0}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"output": {"format": "xml"}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
    try {
      parse_config(R"({"sim": {"rep": 5}})");
      FAIL("no throw");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("rep") != std::string::npos);
    }
  }

  TEST_CASE("decomposition input") {
    std::istringstream in(kFigure1Decomposition);
    const TrialDecomposition d = read_decomposition(in);
    CHECK(d.ever.events_screen == 650);
    CHECK(d.never.nonevents_control == 47250);
    CHECK(d.unknown.is_zero());

    auto error_of = [](const std::string& text) {
      std::istringstream s(text);
      try {
        read_decomposition(s);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    const std::string header = "table,events_screen,nonevents_screen,events_control,nonevents_control\n";
    CHECK(error_of(header + "ever,1,2,3,x\nnever,1,1,1,1\n").find("line 2") != std::string::npos);
    CHECK(error_of(header + "ever,1,2,3,x\nnever,1,1,1,1\n").find("nonevents_control") != std::string::npos);
    CHECK(error_of(header + "ever,1,2,3,-4\nnever,1,1,1,1\n").find("line 2") != std::string::npos);
    CHECK(error_of(header + "ever,1,2,3,4\never,1,1,1,1\n").find("duplicate") != std::string::npos);
    CHECK(error_of(header + "ever,1,2,3,4\n").find("never") != std::string::npos);
    CHECK(error_of(header + "sometimes,1,2,3,4\n").find("sometimes") != std::string::npos);
    CHECK_FALSE(error_of("a,b\n").empty());
    CHECK_FALSE(error_of("").empty());
    CHECK_THROWS_AS(load_decomposition("/nonexistent.csv"), IoError);
  }

  TEST_CASE("analyze the default scenario's expected tables") {
    std::istringstream in(kFigure1Decomposition);
    const Report r = analyze_report(read_decomposition(in), std::nullopt);
    CHECK(r.rows.size() == 10);
    CHECK(std::get<double>(find_row(r, "observed", "RR")[3]) == doctest::Approx(0.9));
    CHECK(std::get<double>(find_row(r, "observed", "RR_pos")[3]) == doctest::Approx(13.0 / 15.0));
    CHECK(std::get<double>(find_row(r, "observed", "RR_neg")[3]) == doctest::Approx(1.0));
    CHECK(std::get<double>(find_row(r, "observed", "RR_neg")[7]) == doctest::Approx(1.0));
    CHECK(std::get<double>(find_row(r, "observed", "RR_pos")[7]) == doctest::Approx(0.0016).epsilon(0.15));
    const auto& c = find_row(r, "corrected", "RR_pos");
    CHECK(std::get<std::string>(c[1]) == "none");
    CHECK(std::get<double>(c[3]) == doctest::Approx(13.0 / 15.0));
  }

  TEST_CASE("analyze with non-compliance uses the compliance correction") {
    std::istringstream in(kFigureS3Decomposition);
    const Report r = analyze_report(read_decomposition(in), std::nullopt);
    CHECK(std::get<double>(find_row(r, "observed", "RR_pos")[3]) == doctest::Approx(4.104).epsilon(0.001));
    const auto& c = find_row(r, "corrected", "RR_pos");
    CHECK(std::get<std::string>(c[1]) == "compliance");
    CHECK(std::get<double>(c[3]) == doctest::Approx(0.912280701754386).epsilon(1e-9));
    CHECK(std::get<double>(find_row(r, "corrected", "RR_neg")[3]) == doctest::Approx(1.0).epsilon(1e-9));

    std::istringstream again(kFigureS3Decomposition);
    CHECK_THROWS_AS(analyze_report(read_decomposition(again), RetestSpec{0.9, 0.8}), ConfigError);
  }

  TEST_CASE("analyze with a retest correction") {
    const std::string text =
        "table,events_screen,nonevents_screen,events_control,nonevents_control\n"
        "ever,650,1850,675,1400\n"
        "never,250,47250,325,47600\n";
    std::istringstream in(text);
    const Report r = analyze_report(read_decomposition(in), parse_retest("0.9,0.8"));
    const auto& c = find_row(r, "corrected", "RR_pos");
    CHECK(std::get<std::string>(c[1]) == "retest");
    CHECK(std::get<double>(c[3]) == doctest::Approx(13.0 / 15.0).epsilon(1e-9));
    CHECK(std::get<double>(find_row(r, "corrected", "RR_neg")[3]) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::get<double>(find_row(r, "observed", "RR_pos")[3]) == doctest::Approx(0.7993).epsilon(1e-4));

    CHECK(parse_retest("0.5,0.6,100,200").basis_nonevent == 200);
    CHECK_THROWS_AS(parse_retest("0.5"), ConfigError);
    CHECK_THROWS_AS(parse_retest("0.5,abc"), ConfigError);
    CHECK_THROWS_AS(parse_retest("0,0.5"), ConfigError);
  }

  TEST_CASE("report formatting") {
    Report r;
    r.columns = {"name", "n", "x", "flag", "missing"};
    r.add_row({std::string("a,b"), std::int64_t{12}, 0.123456789, true, std::monostate{}});
    std::ostringstream csv;
    write_csv(csv, r);
    CHECK(csv.str() == "name,n,x,flag,missing\n\"a,b\",12,0.123457,true,\n");
    std::ostringstream js;
    write_json(js, r);
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j[0]["x"].get<double>() == 0.123456789);
    CHECK(j[0]["missing"].is_null());
    CHECK(j[0]["n"].get<std::int64_t>() == 12);
    CHECK_THROWS_AS(parse_format("tsv"), ConfigError);
    CHECK_THROWS_AS(r.add_row({std::int64_t{1}}), std::exception);
  }

  TEST_CASE("simulate json round-trips every double bit for bit") {
    RunConfig c = parse_config(R"({"sim": {"reps": 300, "seed": 9},
        "mechanisms": {"degradation": {"loss_event": 0.1, "loss_nonevent": 0.2, "retest_correction": true}}})");
    const std::vector<SimSummary> results{run_study(c.cells[0])};
    const Report r = simulate_report(c.cells, results);
    CHECK(r.columns == simulate_columns());
    std::ostringstream js;
    write_json(js, r);
    const auto j = nlohmann::json::parse(js.str());
    CHECK(j[0]["power_rr_pos"].get<double>() == results[0].power_rr_pos);
    CHECK(j[0]["mean_rr_pos"].get<double>() == results[0].mean_rr_pos);
    CHECK(j[0]["mean_corrected_rr_neg"].get<double>() == *results[0].mean_corrected_rr_neg);
    CHECK(j[0]["seed"].get<std::uint64_t>() == 9);
  }

  TEST_CASE("published reference data is compiled in") {
    for (Target t : all_targets()) {
      CAPTURE(to_string(t));
      CHECK_FALSE(published_values(to_string(t)).empty());
      CHECK(parse_target(to_string(t)) == t);
    }
    CHECK_THROWS_AS(published_text("table9"), ConfigError);
    CHECK_THROWS_AS(parse_target("table9"), ConfigError);
    CHECK(rate_tolerance(0.5, 100) == doctest::Approx(0.15));
    CHECK(rate_tolerance(0.5, 1000000) == 0.02);
  }

  TEST_CASE("reproduce the exact non-compliance arithmetic") {
    for (Target t : {Target::figS2, Target::figS3}) {
      for (const ReproRow& row : reproduce(t, ReproOptions{})) {
        CAPTURE(row.row);
        CAPTURE(row.quantity);
        if (row.pass) CHECK(*row.pass);
      }
    }
  }

  TEST_CASE("binary exit codes") {
    CHECK(run("--help").status == 0);
    CHECK(run("power").status == 0);
    CHECK(run("frobnicate").status == 1);
    CHECK(run("power --alpha 2").status == 1);
    const std::string bad = write_temp("bad_key.json", R"({"scenario": {"pee_m": 0.1}})");
    CHECK(run("power --config " + bad).status == 1);
    const std::string rr1 = write_temp("rr1.json", R"({"scenario": {"rr": 1.0, "rr_pos": 1.0}})");
    CHECK(run("power --config " + rr1).status == 2);
    const std::string infeasible = write_temp("infeasible.json", R"({"scenario": {"rr": 0.5, "rr_pos": 0.9}})");
    CHECK(run("power --config " + infeasible).status == 2);
    CHECK(run("simulate --config " + infeasible + " --reps 10").status == 2);
    CHECK(run("power --config /nonexistent/c.json").status == 3);
    CHECK(run("analyze /nonexistent/d.csv").status == 3);
    CHECK(run("power --out /nonexistent/dir/out.csv").status == 3);
    const std::string trunc = write_temp("trunc.csv", "table,events_screen\never,1\n");
    CHECK(run("analyze " + trunc).status == 1);
  }

  TEST_CASE("binary output is byte-identical across runs and worker counts") {
    const Run a = run("simulate --reps 500 --seed 3 --workers 1");
    const Run b = run("simulate --reps 500 --seed 3 --workers 4");
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("power_rr_pos") != std::string::npos);
    const Run c = run("simulate --reps 1 --seed 3");
    CHECK(c.status == 0);
    CHECK(c.out == run("simulate --reps 1 --seed 3").out);

    const std::string d = write_temp("fig1.csv", kFigure1Decomposition);
    const Run j = run("analyze " + d + " --format json");
    CHECK(j.status == 0);
    CHECK(nlohmann::json::parse(j.out).size() == 10);
  }
}
