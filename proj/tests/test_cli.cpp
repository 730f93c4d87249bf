#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "nsqstab/io.hpp"

namespace fs = std::filesystem;
using Catch::Approx;

namespace {

std::string binary_path() {
    const char* env = std::getenv("NSQSTAB_BIN");
    REQUIRE(env != nullptr);
    return env;
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "nsqstab_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunResult {
    int code;
    std::string output;
};

RunResult run(const std::string& args) {
    fs::path out = scratch_dir() / "cmd_output.txt";
    std::string cmd = binary_path() + " " + args + " > " + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return {WEXITSTATUS(rc), slurp(out)};
}

const char* kIdentityColumns = "2 3\n2 1\n1 1 0\n0 0 1\n";
const char* kIndefiniteDiag = "2 2\n1 1\n-1 0\n0 1\n";

} // namespace

TEST_CASE("vl sim on the identity-columns example") {
    fs::path file = scratch_dir() / "idcols.txt";
    write_file(file, kIdentityColumns);
    fs::path report = scratch_dir() / "vl.json";
    auto r = run("--report " + report.string() + " vl " + file.string() + " --mode=sim");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["command"] == "vl");
    CHECK(j["result"]["verdict"]["status"] == "FEASIBLE");
    CHECK(j["result"]["verdict"]["margin"].get<double>() == Approx(2.0).margin(1e-6));
    CHECK(j["config"]["input_hash"].get<std::string>().size() == 16);
}

TEST_CASE("vl ind exit codes") {
    fs::path file = scratch_dir() / "neg.txt";
    write_file(file, "1 1\n1\n-1\n");
    auto r = run("vl " + file.string() + " --mode=ind");
    CHECK(r.code == 1);
}

TEST_CASE("dus refutes an indefinite diagonal with a witness") {
    fs::path file = scratch_dir() / "inddiag.txt";
    write_file(file, kIndefiniteDiag);
    fs::path report = scratch_dir() / "dus.json";
    auto r = run("--report " + report.string() + " dus " + file.string() +
                 " --samples 5 --seed 1");
    CHECK(r.code == 1);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["result"]["sweep"]["verdict"] == "REFUTED");
    CHECK_FALSE(j["result"]["sweep"]["witness"].is_null());
}

TEST_CASE("dus holds on the identity-columns example") {
    fs::path file = scratch_dir() / "idcols2.txt";
    write_file(file, kIdentityColumns);
    auto r = run("dus " + file.string() + " --samples 20 --seed 3 --falsify-budget 100");
    CHECK(r.code == 0);
}

TEST_CASE("conjecture with budget zero is UNKNOWN") {
    auto r = run("conjecture --p 1,1 --seed 1 --budget 0");
    CHECK(r.code == 2);
}

TEST_CASE("enum counts") {
    fs::path report = scratch_dir() / "enum.json";
    auto r = run("--report " + report.string() + " enum --p 2,3,2");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["result"]["count"] == 12);

    auto r2 = run("--report " + report.string() + " enum --p 2,1 --k 1");
    CHECK(r2.code == 0);
    auto j2 = nlohmann::json::parse(slurp(report));
    CHECK(j2["result"]["count"] == 3);
}

TEST_CASE("usage and IO error codes") {
    CHECK(run("vl").code == 64);                       // missing required file
    CHECK(run("no-such-command").code == 64);          // unknown subcommand
    CHECK(run("vl /no/such/file.txt").code == 66);     // missing input
    fs::path bad = scratch_dir() / "bad.txt";
    write_file(bad, "2 3\n1 1\n1 2 3\n4 5 6\n"); // sizes sum to 2, header says 3
    CHECK(run("vl " + bad.string()).code == 65);
    auto r = run("enum"); // neither file nor --p
    CHECK(r.code == 65);
}

TEST_CASE("NSQSTAB_CAP caps enumeration") {
    fs::path out = scratch_dir() / "cap_out.txt";
    std::string cmd = "NSQSTAB_CAP=5 " + binary_path() + " enum --p 2,3,2 > " +
                      out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    CHECK(WEXITSTATUS(rc) == 65);
    CHECK(slurp(out).find("cap") != std::string::npos);
    // the flag wins over the environment
    std::string cmd2 = "NSQSTAB_CAP=5 " + binary_path() + " --cap 100 enum --p 2,3,2 > " +
                       out.string() + " 2>&1";
    rc = std::system(cmd2.c_str());
    CHECK(WEXITSTATUS(rc) == 0);
}

TEST_CASE("reports are byte-identical across reruns") {
    fs::path file = scratch_dir() / "idcols3.txt";
    write_file(file, kIdentityColumns);
    fs::path r1 = scratch_dir() / "rep1.json";
    fs::path r2 = scratch_dir() / "rep2.json";
    CHECK(run("--report " + r1.string() + " dus " + file.string() + " --samples 30 --seed 5")
              .code == 0);
    CHECK(run("--report " + r2.string() + " dus " + file.string() + " --samples 30 --seed 5")
              .code == 0);
    CHECK(slurp(r1) == slurp(r2));
    CHECK(nlohmann::json::parse(slurp(r1)).contains("config"));
}

TEST_CASE("demo decays on a stable loop") {
    fs::path file = scratch_dir() / "demo.txt";
    write_file(file, std::string(kIdentityColumns) + "E\n1 0\n1\n"); // AEK = I
    fs::path report = scratch_dir() / "demo.json";
    auto r = run("--report " + report.string() + " demo " + file.string() +
                 " --dt 0.01 --t 20");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["result"]["decayed"] == true);
    CHECK(j["result"]["norm_ratio"].get<double>() == Approx(std::exp(-20.0)).epsilon(1e-5));
}

TEST_CASE("gamma-verify on the worked file") {
    fs::path file = scratch_dir() / "gamma.txt";
    write_file(file, "2 3\n2 1\n1 2 3\n4 5 6\nK\n1 2\n1\n");
    fs::path report = scratch_dir() / "gamma.json";
    auto r = run("--report " + report.string() + " gamma-verify " + file.string());
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["result"]["residual"].get<double>() <= 1e-10);
    CHECK(j["result"]["ratio_law"] == true);
}

TEST_CASE("theorem2 pipeline over the CLI") {
    fs::path file = scratch_dir() / "t2.txt";
    write_file(file, "2 3\n2 1\n2 2 1\n1 1 2\n");
    auto r = run("theorem2 " + file.string() + " --seed 2 --samples 20");
    CHECK(r.code == 0);

    fs::path bad = scratch_dir() / "t2bad.txt";
    write_file(bad, "2 2\n1 1\n1 1\n0 1\n"); // non-normal squared matrix
    CHECK(run("theorem2 " + bad.string() + " --seed 2").code == 1);
}
