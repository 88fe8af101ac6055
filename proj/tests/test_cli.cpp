#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chorate/cli.hpp"
#include "chorate/io.hpp"

using namespace chorate;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& rel) { return std::string(CHORATE_DATA_DIR) + "/" + rel; }

std::filesystem::path temp_file(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "chorate_test_cli";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::size_t count_lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("rate prints the label")
{
    const auto r = run_cli({"rate", "--ladder", "cat_el", "--value", "0.025"});
    CHECK(r.code == 0);
    CHECK(r.out == "B\n");
    const auto file = run_cli({"rate", "--ladder", data("ladders/clo_avg_el.json"), "--value", "0.0005"});
    CHECK(file.out == "Aa3\n");
}

TEST_CASE("check-h reports a failing indicator with a witness")
{
    const auto r = run_cli({"check-h", "--family", "var-indicator", "--p", "0.8"});
    CHECK(r.code == 0);
    CHECK(r.out.find("result: fail") != std::string::npos);
    CHECK(r.out.find("witness:") != std::string::npos);
    const auto ok = run_cli({"check-h", "--family", "tabulated", "--knots", "0:0,0.5:0.8,1:1"});
    CHECK(ok.out.find("result: pass") != std::string::npos);
}

TEST_CASE("check-g runs both grid checks")
{
    const auto r = run_cli({"check-g", "--criterion", "avg_var", "--param", "0.8", "--grid", "21"});
    CHECK(r.code == 0);
    CHECK(r.out.find("result: fail") != std::string::npos);
    const auto ind = run_cli({"check-g", "--indicator", "max-positive", "--grid", "21"});
    CHECK(ind.code == 0);
    const auto pd = run_cli({"check-g", "--criterion", "avg_pd"});
    CHECK(pd.code == cli::kExitValidation);
}

TEST_CASE("exit codes")
{
    CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"measure", "--input", "/nonexistent.json", "--criterion", "avg_el"}).code == cli::kExitNoInput);
    const auto bad = run_cli({"rate", "--ladder", "cat_el", "--value", "1.5"});
    CHECK(bad.code == cli::kExitValidation);
    CHECK(count_lines(bad.err) == 1);
    CHECK(run_cli({"rate", "--ladder", "cat_el"}).code == cli::kExitValidation);
    CHECK(run_cli({"pool", "--model", data("models/clo.json"), "--criterion", "avg_el", "--mode", "exact"}).code ==
          cli::kExitValidation);
}

TEST_CASE("every subcommand has help")
{
    for (const char* sub : {"measure", "rate", "check-h", "check-g", "pool", "clo", "cat", "verify"}) {
        const auto r = run_cli({sub, "--help"});
        CHECK(r.code == 0);
        CHECK_FALSE(r.out.empty());
    }
}

TEST_CASE("measure on a scenario loss file")
{
    const auto r = run_cli({"measure", "--input", data("examples/two_scenarios.json"), "--criterion", "avg_es",
                            "--param", "0.9", "--ladder", "clo_avg_es"});
    CHECK(r.code == 0);
    CHECK(r.out.find("avg_es(p=0.9),0.75") != std::string::npos);
}

TEST_CASE("clo writes one row per criterion and pool size")
{
    const auto path = temp_file("clo.csv");
    const auto r = run_cli({"clo", "--ell-max", "50", "--paths", "2000", "--seed", "42", "--out", path.string()});
    REQUIRE(r.code == 0);
    const auto text = read_text_file(path);
    CHECK(count_lines(text) == 1 + 50 * 6);
    CHECK(text.rfind("key,criterion,value,rating\n", 0) == 0);
}

TEST_CASE("config files supply defaults that flags override")
{
    const auto config = temp_file("clo_config.json");
    std::ofstream(config) << R"({"schema": "chorate.config.clo/1", "ell_max": 3, "paths": 1000, "seed": 7})";
    const auto from_file = run_cli({"clo", "--config", config.string()});
    REQUIRE(from_file.code == 0);
    CHECK(count_lines(from_file.out) == 1 + 3 * 6);
    const auto overridden = run_cli({"clo", "--config", config.string(), "--ell-max", "2"});
    CHECK(count_lines(overridden.out) == 1 + 2 * 6);

    const auto wrong = temp_file("wrong_schema.json");
    std::ofstream(wrong) << R"({"schema": "chorate.config.cat/1"})";
    CHECK(run_cli({"clo", "--config", wrong.string()}).code == cli::kExitValidation);
}

TEST_CASE("outputs are byte-identical across runs")
{
    const std::vector<std::string> args{"pool", "--model", data("models/clo.json"), "--criterion", "avg_es",
                                        "--param", "0.9", "--ell-max", "4", "--attachment", "0.1",
                                        "--mode", "mc", "--paths", "5000", "--ladder", "clo_avg_es"};
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(count_lines(a.out) == 5);
}

TEST_CASE("cat study from the synthetic CSV")
{
    const auto specs = temp_file("specs.csv");
    const auto r = run_cli({"cat", "--data", data("cat/synthetic_state_losses.csv"), "--states", "Kansas,Michigan",
                            "--paths", "20000", "--specs-out", specs.string()});
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 1 + 2 * 4);
    CHECK(count_lines(read_text_file(specs)) == 3);
    CHECK(run_cli({"cat", "--states", "Atlantis", "--paths", "1000"}).code == cli::kExitValidation);
}

TEST_CASE("verify reproduces the classification fixtures")
{
    const auto r = run_cli({"verify", "--grid", "21", "--trials", "2000"});
    CHECK(r.code == 0);
    CHECK(r.out.find("UNEXPECTED") == std::string::npos);
}

TEST_CASE("the installed binary maps errors to exit codes")
{
    const std::string bin = CHORATE_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    CHECK(status("rate --ladder cat_el --value 0.025") == 0);
    CHECK(status("nonsense") == 64);
    CHECK(status("measure --input /nonexistent.json --criterion avg_el") == 66);
    CHECK(status("rate --ladder cat_el --value 7") == 2);
}
