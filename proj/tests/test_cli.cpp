/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "confluxlab/cli.hpp"
#include "confluxlab/matrix.hpp"
#include "testing.hpp"

using confluxlab::testing::data_path;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "confluxlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = confluxlab::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l))
        if (!l.empty()) out.push_back(l);
    return out;
}

std::string value_of(const std::string& text, const std::string& key) {
    for (const auto& l : lines(text))
        if (l.rfind(key + " ", 0) == 0) return l.substr(key.size() + 1);
    return "";
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("confluxlab_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("derive") {
    Result lu = cli({"derive", "--program", data_path("programs/lu.daap"), "--memory", "4",
                     "--n", "4"});
    CHECK(lu.code == 0);
    // The generic pipeline value; see the README for how it relates to the
    // closed form.
    CHECK(lu.out.find("\nQ >= 20\n") != std::string::npos);
    CHECK(lu.out.find("leading term: 2/3*N^3/(P*M^(1/2))") != std::string::npos);

    Result ch = cli({"derive", "--program", data_path("programs/cholesky.daap"), "--memory", "16",
                     "--quiet"});
    CHECK(ch.code == 0);
    CHECK(ch.out.find("leading term: 1/3*N^3/(P*M^(1/2))") != std::string::npos);
    CHECK(ch.out.find("Q >=") == std::string::npos);

    const std::string bad = temp_path("bad.daap");
    std::ofstream(bad) << "param N\nfoo bar\n";
    Result e = cli({"derive", "--program", bad, "--memory", "4"});
    CHECK(e.code == 2);
    CHECK(e.err.find("2:1") != std::string::npos);

    Result csv = cli({"derive", "--program", data_path("programs/lu.daap"), "--memory", "4",
                      "--n", "4", "--csv", "-", "--quiet"});
    CHECK(csv.code == 0);
    CHECK(csv.out.find("# schema_version=1\nstatement,depth,V,rho,X0,u,Q\n") != std::string::npos);
}

TEST_CASE("factorize") {
    Result r = cli({"factorize", "--kind", "lu", "--n", "256", "--grid", "2,2,2", "--block", "16",
                    "--seed", "1", "--check"});
    CHECK(r.code == 0);
    CHECK(std::stod(value_of(r.out, "residual")) <= 1e-8 * 256);
    CHECK(value_of(r.out, "M") == "16384");
    CHECK(value_of(r.out, "max_recv_words") == "33676");
    const double ratio = std::stod(value_of(r.out, "measured_over_model"));
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 4.0);

    Result again = cli({"factorize", "--kind", "lu", "--n", "256", "--grid", "2,2,2", "--block",
                        "16", "--seed", "1", "--check"});
    CHECK(again.out == r.out);

    Result nd = cli({"factorize", "--kind", "lu", "--n", "250", "--grid", "2,2,2", "--block", "16"});
    CHECK(nd.code == 3);
    CHECK(nd.err.find("N mod v") != std::string::npos);
    Result pad = cli({"factorize", "--kind", "lu", "--n", "250", "--grid", "2,2,2", "--block",
                      "16", "--pad", "--check"});
    CHECK(pad.code == 0);
    CHECK(value_of(pad.out, "N") == "256 (padded from 250)");

    const std::string neg = temp_path("neg.bin");
    confluxlab::DenseMatrix A = confluxlab::DenseMatrix::identity(8);
    A(3, 3) = -1.0;
    confluxlab::save_matrix(A, neg);
    Result ch = cli({"factorize", "--kind", "chol", "--n", "8", "--grid", "1,1,1", "--block", "2",
                     "--input", neg});
    CHECK(ch.code == 3);
    CHECK(ch.err.find("positive definite") != std::string::npos);

    Result bad_grid = cli({"factorize", "--kind", "lu", "--n", "64", "--grid", "2,x,1"});
    CHECK(bad_grid.code == 2);
}

TEST_CASE("factorize csv and save") {
    const std::string csv = temp_path("f.csv");
    const std::string prefix = temp_path("fac");
    Result r = cli({"factorize", "--kind", "lu", "--n", "64", "--grid", "2,2,1", "--block", "8",
                    "--csv", csv, "--save", prefix});
    CHECK(r.code == 0);
    auto rows = lines(slurp(csv));
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "# schema_version=1");
    CHECK(rows[1] == "rank,pi,pj,pk,sent_words,recv_words,msgs,peak_words");
    CHECK(std::filesystem::exists(prefix + ".L.bin"));
    CHECK(std::filesystem::exists(prefix + ".U.bin"));
    CHECK(confluxlab::load_matrix(prefix + ".L.bin").rows == 64);
}

TEST_CASE("sweep") {
    Result s = cli({"sweep", "--kind", "lu", "--n-list", "64", "--grids", "1,1,1", "2,2,1",
                    "2,2,2", "--block", "8", "--models", "conflux,mkl2d,candmc"});
    CHECK(s.code == 0);
    auto rows = lines(s.out);
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "# schema_version=1");
    CHECK(rows[1] ==
          "kind,N,Px,Py,Pz,v,M,rank,recv_words,sent_words,model,model_words,ratio,approximate");
    // One row per rank per model for each of the three configurations.
    CHECK(rows.size() - 2 == (1 + 4 + 8) * 3);

    // A single-configuration sweep carries the same per-rank volumes as factorize.
    const std::string csv = temp_path("one.csv");
    cli({"factorize", "--kind", "lu", "--n", "64", "--grid", "2,2,1", "--block", "8", "--csv", csv});
    auto fac = lines(slurp(csv));
    Result one = cli({"sweep", "--kind", "lu", "--n-list", "64", "--grids", "2,2,1", "--block",
                      "8", "--models", "conflux"});
    auto sw = lines(one.out);
    REQUIRE(sw.size() == fac.size());
    for (std::size_t i = 2; i < sw.size(); ++i) {
        auto split = [](const std::string& l) {
            std::vector<std::string> f;
            std::stringstream ss(l);
            std::string x;
            while (std::getline(ss, x, ',')) f.push_back(x);
            return f;
        };
        auto a = split(fac[i]);
        auto b = split(sw[i]);
        CHECK(a[0] == b[7]);
        CHECK(a[4] == b[9]);
        CHECK(a[5] == b[8]);
    }
}

TEST_CASE("pebble") {
    Result c = cli({"pebble", "--cdag", data_path("cdags/chain.cdag"), "--memory", "2",
                    "--brute-force"});
    CHECK(c.code == 0);
    CHECK(value_of(c.out, "Q_opt") == "2");

    Result s = cli({"pebble", "--cdag", data_path("cdags/chain.cdag"), "--memory", "2",
                    "--schedule", data_path("cdags/chain.sched")});
    CHECK(s.code == 0);
    CHECK(value_of(s.out, "schedule_legal") == "yes");
    CHECK(value_of(s.out, "schedule_Q") == "2");

    Result lu = cli({"pebble", "--program", data_path("programs/lu.daap"), "--n", "3", "--memory",
                     "4", "--brute-force"});
    CHECK(lu.code == 0);
    const std::string bound = value_of(lu.out, "derived_bound");
    const std::string q = value_of(lu.out, "Q_opt");
    REQUIRE_FALSE(bound.empty());
    REQUIRE_FALSE(q.empty());
    CHECK(std::stod(q) >= std::stod(bound));

    Result big = cli({"pebble", "--program", data_path("programs/gemm.daap"), "--n", "3",
                      "--memory", "4", "--brute-force"});
    CHECK(big.code == 4);
    CHECK(big.err.find("limited to") != std::string::npos);
}

TEST_CASE("models and audit") {
    Result m = cli({"models", "--n", "4096", "--procs", "64", "--memory", "1048576"});
    CHECK(m.code == 0);
    CHECK(m.out.find("conflux,4096,64,1048576,1048832,1048576,1") != std::string::npos);
    CHECK(m.err.empty());
    Result w = cli({"models", "--n", "4096", "--procs", "64", "--memory", "100", "--model",
                    "conflux"});
    CHECK(w.code == 0);
    CHECK(w.err.find("warning") != std::string::npos);
    CHECK(lines(w.out).size() == 3);
    CHECK(cli({"models", "--n", "4096", "--procs", "64", "--memory", "1", "--model", "nope"})
              .code == 3);

    Result a = cli({"audit", "--kind", "lu", "--n", "64", "--grid", "2,2,2", "--block", "8",
                    "--t", "1"});
    CHECK(a.code == 0);
    auto rows = lines(a.out);
    CHECK(rows[1] == "t,step,measured_words,predicted_words");
    CHECK(rows.size() == 2 + 12);
    CHECK(std::find(rows.begin(), rows.end(), "1,7,0,0") != rows.end());
    CHECK(std::find(rows.begin(), rows.end(), "1,3,72,72") != rows.end());
}

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"factorize", "--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    CHECK(cli({"derive", "--memory", "4"}).code == 2);
}

TEST_CASE("installed binary reports exit codes") {
    const std::string bin = CONFLUXLAB_CLI_PATH;
    auto status = [&](const std::string& args) {
        int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("models --n 64 --procs 4 --memory 1024") == 0);
    CHECK(status("factorize --kind lu --n 250 --grid 2,2,2 --block 16") == 3);
    CHECK(status("derive") == 2);
    CHECK(status("pebble --program " + data_path("programs/gemm.daap") +
                  " --n 3 --memory 4 --brute-force") == 4);
}
