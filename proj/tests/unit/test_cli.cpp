#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "testing.hpp"

using namespace fsindex;
using namespace fsindex::testing;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) { return std::string(FSINDEX_TEST_TMP_DIR) + "/cli_" + name; }

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Fixture {
  std::string matrix = tmp("toy.mat"), fasta = tmp("toy.fa"), index = tmp("toy.idx");
  Fixture() {
    write(matrix, toy_matrix_text());
    write(fasta, ">one\nABDA\n>two\nCCBXD\n>three\nddd\n");
  }
  Run build(const std::string& out, const std::string& spec = "AC,BD", bool suffix = false) const {
    std::vector<std::string> a{"build", "--fasta", fasta, "--matrix", matrix, "--partition", spec, "-m", "3", "-o", out};
    if (suffix) a.push_back("--suffix");
    return run(a);
  }
};

}  // namespace

TEST_CASE("build writes a deterministic index and a manifest") {
  Fixture f;
  auto r = f.build(f.index);
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["n"] == 4);  // ABD, BDA, CCB, DDD
  CHECK(j["bins"] == 8);
  CHECK(j["records"] == 3);
  CHECK(j["rejected_windows"] == 2);

  auto again = tmp("toy2.idx");
  REQUIRE(f.build(again).code == 0);
  CHECK(slurp(again) == slurp(f.index));

  auto bad = f.build(tmp("bad.idx"), "AC,BX");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("'X'") != std::string::npos);
}

TEST_CASE("search: kNN, thresholds and output formats") {
  Fixture f;
  REQUIRE(f.build(f.index).code == 0);

  auto k1 = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "ABD", "-k", "1"});
  REQUIRE(k1.code == 0);
  std::istringstream lines(k1.out);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "sequence\toffset\tfragment\tvalue\trank");
  CHECK(first == "one\t0\tABD\t0\t1");

  auto thr = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "ABD", "--similarity-threshold", "9"});
  REQUIRE(thr.code == 0);
  CHECK(thr.out.find("# radius\t7\n") != std::string::npos);

  auto tsv = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "ABD", "-r", "30"});
  auto json = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "ABD", "-r", "30", "--format", "json"});
  REQUIRE(tsv.code == 0);
  REQUIRE(json.code == 0);
  std::multiset<std::string> from_tsv, from_json;
  std::istringstream t(tsv.out);
  std::string line;
  std::getline(t, line);
  while (std::getline(t, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cols(line);
    std::string id, off, frag, val;
    cols >> id >> off >> frag >> val;
    from_tsv.insert(id + ":" + off + ":" + val);
  }
  auto j = nlohmann::json::parse(json.out);
  for (const auto& h : j["hits"])
    from_json.insert(h["sequence"].get<std::string>() + ":" + std::to_string(h["offset"].get<int>()) + ":" +
                     std::to_string(h["value"].get<int>()));
  CHECK(from_tsv.size() == 4);
  CHECK(from_tsv == from_json);
  CHECK(j["stats"]["hits"] == 4);

  auto out_file = tmp("hits.tsv");
  auto to_file = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "ABD", "-r", "30", "--out", out_file});
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  auto written = slurp(out_file);
  CHECK(written.substr(0, written.find("# elapsed_ms")) == tsv.out.substr(0, tsv.out.find("# elapsed_ms")));
}

TEST_CASE("search: PSSM input and metrics") {
  Fixture f;
  REQUIRE(f.build(f.index).code == 0);
  auto pssm = tmp("q.pssm");
  write(pssm, "# orientation: score\nA B C D\n5 0 0 0\n0 5 0 0\n0 0 0 5\n");
  auto r = run({"search", "--index", f.index, "--pssm", pssm, "-k", "1", "--format", "json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["hits"][0]["fragment"] == "ABD");
  CHECK(j["hits"][0]["value"] == -15);

  auto avg = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "ABD", "-k", "2", "--metric", "average",
                  "--format", "json"});
  REQUIRE(avg.code == 0);
  CHECK(nlohmann::json::parse(avg.out)["scale"] == 2);
}

TEST_CASE("search: length rules") {
  Fixture f;
  REQUIRE(f.build(f.index).code == 0);
  auto wrong = run({"search", "--index", f.index, "--matrix", f.matrix, "-q", "AB", "-r", "5"});
  CHECK(wrong.code == 1);
  CHECK(wrong.err.find("suffix mode") != std::string::npos);

  auto sfx = tmp("sfx.idx");
  REQUIRE(f.build(sfx, "AC,BD", true).code == 0);
  auto shortq = run({"search", "--index", sfx, "--matrix", f.matrix, "-q", "DD", "-r", "0"});
  REQUIRE(shortq.code == 0);
  CHECK(shortq.out.find("three\t0\tDD\t0") != std::string::npos);
  CHECK(shortq.out.find("three\t1\tDD\t0") != std::string::npos);
  auto longq = run({"search", "--index", sfx, "--matrix", f.matrix, "-q", "ABDA", "-r", "0"});
  REQUIRE(longq.code == 0);
  CHECK(longq.out.find("one\t0\tABDA\t0") != std::string::npos);
}

TEST_CASE("verify-matrix") {
  Fixture f;
  auto toy = run({"verify-matrix", f.matrix});
  REQUIRE(toy.code == 0);
  CHECK(toy.out.find("quasi-metric\tyes") != std::string::npos);

  auto b62 = run({"verify-matrix", "--format", "json", path_in_data("matrices/BLOSUM62")});
  REQUIRE(b62.code == 0);
  auto j = nlohmann::json::parse(b62.out);
  CHECK(j["quasi_metric"] == true);
  CHECK(j["triangle_violations"] == 0);

  auto b55 = nlohmann::json::parse(run({"verify-matrix", "--format", "json", path_in_data("matrices/BLOSUM55")}).out);
  CHECK(b55["quasi_metric"] == false);
  CHECK(b55["distinct_violations"] == 1);
  CHECK(b55["coweightable"] == true);
}

TEST_CASE("stats and bench") {
  Fixture f;
  REQUIRE(f.build(f.index).code == 0);
  auto st = run({"stats", f.index});
  REQUIRE(st.code == 0);
  auto j = nlohmann::json::parse(st.out);
  CHECK(j["n"] == 4);
  CHECK(j["audit"] == true);
  CHECK(j["empty_bins"].get<int>() + j["occupied_bins"].get<int>() == 8);

  auto rows = tmp("rows.tsv");
  auto b = run({"bench", "--index", f.index, "--matrix", f.matrix, "--queries", "5", "-k", "1,2", "--oracle", "--flat",
                "--rows", rows});
  REQUIRE(b.code == 0);
  auto bj = nlohmann::json::parse(b.out);
  CHECK(bj["schema"] == "fsindex-bench");
  CHECK(bj["aggregates"].size() == 2);
  CHECK(bj["aggregates"][0]["oracle_failures"] == 0);
  CHECK(slurp(rows).rfind("query\tk", 0) == 0);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"search", "--index"}).code == 1);
  CHECK(run({"stats", "/nonexistent/file"}).code == 1);
  auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("verify-matrix") != std::string::npos);
}
