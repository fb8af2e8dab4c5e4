#include <gtest/gtest.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rdis/cli/commands.hpp"
#include "rdis/cli/diff.hpp"
#include "rdis/pipeline/pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace rdis;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("rdis_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

int run_rdis(std::vector<std::string> args, std::string& out) {
  args.insert(args.begin(), support::rdis_executable().string());
  return support::run_process(args, out);
}

// Disassembles `elf` into `dir` with every output enabled.
int disasm_all(const fs::path& elf, const fs::path& dir, int jobs) {
  std::string out;
  return run_rdis({"disasm", elf.string(), "-o", (dir / "out.s").string(), "--asm-db", (dir / "out.db").string(), "--report",
               (dir / "out.report").string(), "--dump-relations", (dir / "rel").string(), "--jobs", std::to_string(jobs)},
              out);
}

}  // namespace

TEST(Cli, PrintedConfigReappliesToTheSameBehavior) {
  pipeline::PipelineConfig c;
  c.analyses.step_limit = 3;
  c.symbolization.weights.aligned += 1;
  c.ibi.outgoing = 2;
  std::stringstream text;
  c.print(text);
  pipeline::PipelineConfig back;
  std::istringstream in(text.str());
  back.apply(in, "printed");
  std::stringstream again;
  back.print(again);
  EXPECT_EQ(again.str(), text.str());
  auto a = support::disassemble(support::fixture_elf("conflict"), c);
  auto b = support::disassemble(support::fixture_elf("conflict"), back);
  EXPECT_EQ(support::print(a.program), support::print(b.program));
}

TEST(Cli, PrintConfigThroughTheBinaryRoundTrips) {
  TempDir t;
  std::string printed;
  ASSERT_EQ(run_rdis({"disasm", "--print-config", "--set", "analyses.step_limit=4"}, printed), 0);
  std::ofstream(t.path / "cfg") << printed;
  std::string again;
  ASSERT_EQ(run_rdis({"disasm", "--print-config", "--config", (t.path / "cfg").string()}, again), 0);
  EXPECT_EQ(again, printed);
  EXPECT_NE(printed.find("analyses.step_limit = 4"), std::string::npos);
}

TEST(Cli, BadConfigExitsThree) {
  TempDir t;
  std::ofstream(t.path / "unknown") << "no.such.key=1\n";
  std::ofstream(t.path / "malformed") << "analyses.step_limit=many\n";
  std::string elf = support::fixture_elf("ex1").string(), out;
  EXPECT_EQ(run_rdis({"disasm", elf, "--config", (t.path / "unknown").string()}, out), cli::kExitConfig);
  EXPECT_EQ(run_rdis({"disasm", elf, "--config", (t.path / "malformed").string()}, out), cli::kExitConfig);
  EXPECT_EQ(run_rdis({"disasm", elf, "--set", "ibi.incoming"}, out), cli::kExitConfig);
  EXPECT_EQ(run_rdis({"disasm", elf, "--config", (t.path / "missing").string()}, out), cli::kExitConfig);
  EXPECT_EQ(run_rdis({"disasm", elf, "--bogus-flag"}, out), cli::kExitConfig);
}

TEST(Cli, MalformedElfExitsOneAndNamesTheKind) {
  TempDir t;
  std::ofstream(t.path / "text") << "not an elf file at all\n";
  std::string elf = slurp(support::fixture_elf("ex1"));
  std::ofstream(t.path / "short", std::ios::binary) << elf.substr(0, 40);
  std::map<std::string, std::string> expected = {{"text", "NotElf"}, {"short", "MalformedHeader"}, {"absent", "IoError"}};
  for (const auto& [name, kind] : expected) {
    cli::DisasmOptions o;
    o.input = (t.path / name).string();
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_disasm(o, out, err), cli::kExitInput) << name;
    EXPECT_NE(err.str().find(kind), std::string::npos) << name << ": " << err.str();
  }
}

TEST(Cli, DisasmWritesEveryArtifact) {
  TempDir t;
  ASSERT_EQ(disasm_all(support::corpus_stripped("dispatch_O1"), t.path, 1), 0);
  for (const char* f : {"out.s", "out.s.link", "out.db", "out.report"}) EXPECT_FALSE(slurp(t.path / f).empty()) << f;
  EXPECT_TRUE(fs::exists(t.path / "rel" / "jump_table_start.facts"));
  std::string out;
  ASSERT_EQ(run_rdis({"stretch", (t.path / "out.db").string(), "-o", (t.path / "st.s").string()}, out), 0);
  EXPECT_NE(slurp(t.path / "st.s").find("  nop\n"), std::string::npos);
}

TEST(Cli, DumpedRelationsFromFactsMatchGoldens) {
  TempDir t;
  std::string out;
  ASSERT_EQ(run_rdis({"disasm", "--from-facts", (support::fixture_dir() / "ex1" / "facts").string(), "--dump-relations",
                  t.path.string()},
                 out),
            0);
  auto def_used = support::read_rows(t.path / "def_used.facts");
  EXPECT_EQ(def_used, support::read_rows(support::fixture_dir() / "ex1" / "golden" / "def_used.facts"));
  auto daps = support::read_rows(t.path / "data_access_pattern.facts");
  for (const support::Row& r : support::read_rows(support::fixture_dir() / "ex1" / "golden" / "data_access_pattern.facts"))
    EXPECT_TRUE(daps.count(r)) << r[0];
}

TEST(Cli, OutputsAreIdenticalAcrossJobCounts) {
  for (const fs::path& elf : {support::fixture_elf("tar_jt"), support::corpus_stripped("dispatch_O1")}) {
    TempDir a, b;
    ASSERT_EQ(disasm_all(elf, a.path, 1), 0);
    ASSERT_EQ(disasm_all(elf, b.path, 4), 0);
    auto x = tree(a.path), y = tree(b.path);
    ASSERT_EQ(x.size(), y.size());
    for (const auto& [name, text] : x) {
      if (name == "out.s.link") continue;  // names the output paths
      EXPECT_TRUE(y[name] == text) << elf << ": " << name;
    }
  }
}

TEST(Cli, DiffOfFaithfulRunIsAllZero) {
  TempDir t;
  ASSERT_EQ(disasm_all(support::corpus_stripped("dispatch_O1"), t.path, 1), 0);
  std::string out;
  EXPECT_EQ(run_rdis({"diff", (t.path / "out.report").string(), support::corpus_twin("dispatch_O1").string()}, out), 0);
  EXPECT_EQ(out.substr(0, out.find('\n')), "FP=0 FN=0 WS=0");
}

TEST(Cli, DiffCountsASeededFalseNegative) {
  TempDir t;
  const std::string bin = "dispatch_O1";
  ASSERT_EQ(disasm_all(support::corpus_stripped(bin), t.path, 1), 0);
  std::string table;
  ASSERT_EQ(run_rdis({"diff", (t.path / "out.report").string(), support::corpus_twin(bin).string()}, table), 0);
  // Drop the report line of the first location the diff counted as correct.
  std::istringstream rows(table);
  std::string line, victim;
  while (std::getline(rows, line) && victim.empty()) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string x; std::getline(ls, x, '\t');) f.push_back(x);
    if (f.size() >= 4 && f[3] == "OK") victim = f[0] + '\t' + f[1] + '\t' + f[2] + '\t';
  }
  ASSERT_FALSE(victim.empty());
  std::istringstream report(slurp(t.path / "out.report"));
  std::ofstream seeded(t.path / "seeded.report");
  int dropped = 0;
  while (std::getline(report, line)) {
    std::string key = line;
    std::string upper_victim = victim;
    for (char& c : upper_victim) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::string upper_key = key.substr(0, victim.size());
    for (char& c : upper_key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper_key == upper_victim) {
      ++dropped;
      continue;
    }
    seeded << line << '\n';
  }
  seeded.close();
  ASSERT_EQ(dropped, 1);
  std::string out;
  EXPECT_EQ(run_rdis({"diff", (t.path / "seeded.report").string(), support::corpus_twin(bin).string()}, out),
            cli::kExitDiffMismatch);
  EXPECT_EQ(out.substr(0, out.find('\n')), "FP=0 FN=1 WS=0");
}

TEST(Cli, DiffAgainstTheWrongTwinIsGroundTruthMismatch) {
  TempDir t;
  ASSERT_EQ(disasm_all(support::corpus_stripped("dispatch_O1"), t.path, 1), 0);
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_diff((t.path / "out.report").string(), support::corpus_twin("records_O0").string(), "", out, err),
            cli::kExitInput);
  EXPECT_NE(err.str().find("GroundTruthMismatch"), std::string::npos);
}
