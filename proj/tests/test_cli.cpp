#include "doctest.h"

#include "emq/catalog.hpp"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace emq;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

// stdout captured, stderr dropped; the prefix lets tests set env vars
RunResult run_cli(const std::string& args, const std::string& prefix = {}) {
    std::string cmd = prefix + EMQ_CLI_PATH " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
    int status = pclose(p);
    RunResult r;
    r.out = std::move(out);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("verify covers every builtin") {
    auto r = run_cli("verify --all-builtin");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"overall\": \"pass\""));
    CHECK(count_of(r.out, "\"title\"") == 3);
    for (const auto& name : builtin_names())
        CHECK(contains(r.out, "\"title\": \"" + name + "\""));
    // the sweep, trajectory and structure stages all left records
    CHECK(contains(r.out, "\"id\": \"brst-sweep\""));
    CHECK(contains(r.out, "\"id\": \"wronskian\""));
    CHECK(contains(r.out, "\"id\": \"alpha-weights\""));
    CHECK(contains(r.out, "\"id\": \"euler-weights\""));
}

TEST_CASE("reduce prints the emergent Hamiltonian") {
    auto r = run_cli("reduce pendulum-free");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"id\": \"kstar\""));
    CHECK(contains(r.out, "\"lhs\": \"a1*Pbar^2\""));
    CHECK(contains(r.out, "\"rhs\": \"a1*Pbar^2\""));
    CHECK(contains(r.out, "\"id\": \"q1star\""));
    CHECK(contains(r.out, "\"lhs\": \"-a1*Pbar\""));
    CHECK(contains(r.out, "-Q1*Pbar"));
    CHECK(contains(r.out, "\"overall\": \"pass\""));
}

TEST_CASE("reduce accepts a spec file") {
    const std::string path = "/tmp/emq_cli_pendulum_free.json";
    save_spec(builtin("pendulum-free"), path);
    auto r = run_cli("reduce " + path);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"lhs\": \"a1*Pbar^2\""));
    std::remove(path.c_str());
}

TEST_CASE("analyze flags a drifting charge") {
    auto r = run_cli("analyze " EMQ_SOURCE_DIR "/tests/data/drifting_charge.json");
    CHECK(r.exit_code == 1);
    CHECK(contains(r.out, "\"overall\": \"fail\""));
    // the failing record names the bracket residual
    CHECK(contains(r.out, "\"id\": \"c1-conserved\""));
    CHECK(contains(r.out, "\"lhs\": \"-2*x*y\""));
    CHECK(contains(r.out, "\"status\": \"fail\""));
}

TEST_CASE("usage and io problems exit with 2") {
    CHECK(run_cli("bogus").exit_code == 2);
    CHECK(run_cli("analyze /tmp/emq_no_such_spec.json").exit_code == 2);
    CHECK(run_cli("verify").exit_code == 2);
    CHECK(run_cli("verify pendulum-free --all-builtin").exit_code == 2);
    CHECK(run_cli("simulate pendulum-free --dt 0.001").exit_code == 2);
    CHECK(run_cli("simulate pendulum-free --t2 1 --dt 0.3").exit_code == 2);
    CHECK(run_cli("simulate pendulum-free --t2 1 --dt 0.001 --q0 1").exit_code == 2);
    CHECK(run_cli("verify pendulum-free --param m").exit_code == 2);
    CHECK(run_cli("verify pendulum-free --param m=abc").exit_code == 2);
    CHECK(run_cli("verify pendulum-free --param a1=2").exit_code == 2);
    CHECK(run_cli("spectrum roessler-duffing").exit_code == 2);
    // parse-time spec rejections surface as io errors, not check failures
    CHECK(run_cli("analyze " EMQ_SOURCE_DIR "/tests/data/bad_charge.json").exit_code == 2);
}

TEST_CASE("reports are byte-identical across runs") {
    auto a = run_cli("verify pendulum-oscillator --seed 7");
    auto b = run_cli("verify pendulum-oscillator --seed 7");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);

    auto c = run_cli("brst roessler-duffing --slices 5 --trials 3 --seed 11");
    auto d = run_cli("brst roessler-duffing --slices 5 --trials 3 --seed 11");
    CHECK(c.exit_code == 0);
    CHECK(c.out == d.out);

    // the env fallback feeds the same generator as the flag
    auto e = run_cli("brst pendulum-free --slices 4 --trials 2",
                     "EMERGENTQ_SEED=11 ");
    auto f = run_cli("brst pendulum-free --slices 4 --trials 2 --seed 11");
    CHECK(e.out == f.out);
}

TEST_CASE("simulate writes the trajectory table") {
    const std::string csv = "/tmp/emq_cli_traj.csv";
    auto r = run_cli("simulate pendulum-free --t1 1 --t2 3 --dt 0.001"
                     " --q0 1,0 --qb0 0,1 --out " + csv);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"trajectory_csv\": \"" + csv + "\""));
    CHECK(contains(r.out, "\"id\": \"c1-drift\""));
    CHECK(contains(r.out, "\"id\": \"wronskian\""));
    auto table = read_file(csv);
    CHECK(contains(table, "t,q_1,q_2,qb_1,qb_2,detK,divint"));
    // time labels start at --t1
    CHECK(contains(table, "\n1,1,0,0,1,1,0"));
    CHECK(count_of(table, "\n") == 2002);   // header + 2001 slices
    std::remove(csv.c_str());
}

TEST_CASE("spectrum reports the harmonic ladder") {
    auto r = run_cli("spectrum pendulum-oscillator --levels 3");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"id\": \"harmonic-ladder\""));
    CHECK(contains(r.out, "\"id\": \"partition\""));
    CHECK(contains(r.out, "\"spectrum\""));
    CHECK(contains(r.out, "\"max_abs_dev\""));
    CHECK(contains(r.out, "\"reference\""));

    // free kinetic term lands on the exact lattice box levels
    auto f = run_cli("spectrum pendulum-free --n 256 --levels 4");
    CHECK(f.exit_code == 0);
    CHECK(contains(f.out, "\"id\": \"free-box\""));
    CHECK(contains(f.out, "\"overall\": \"pass\""));
}
