#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cli_util.hpp"
#include "qrelcmp/synthetic.hpp"
#include "qrelcmp/trec_io.hpp"

namespace fs = std::filesystem;
using namespace qrelcmp;

namespace {

struct Fixture {
  fs::path root;
  fs::path data;

  explicit Fixture(const std::string& name)
      : root(fs::temp_directory_path() / ("qrelcmp_cli_" + name)), data(root / "data") {
    fs::remove_all(root);
    synthetic::CollectionSpec spec;
    spec.topics = 6;
    spec.docs_per_topic = 20;
    synthetic::write_collection(synthetic::make_collection(spec), data);
  }
  ~Fixture() { fs::remove_all(root); }

  std::string q(const fs::path& p) const { return "'" + p.string() + "'"; }
  cli::Result run(const std::string& args) const { return cli::run(args, root / "io"); }
};

}  // namespace

TEST_CASE("compare prints a report row; identity gives perfect scores") {
  Fixture f("identity");
  const auto r = f.run("compare --runs " + f.q(f.data / "runs") + " --gt " + f.q(f.data / "qrels.txt") +
                       " --cand " + f.q(f.data / "qrels.txt") + " --permutations 500 --dataset mini" +
                       " --label self --out-dir " + f.q(f.root / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("dataset,qrels,kappa,tau,delta_sens,p1,r1,p2,r2,bac,mcc,fp,fn") == 0);
  CHECK(r.out.find("mini,self,1.0000,1.0000,0.0000,") != std::string::npos);
  CHECK(fs::exists(f.root / "out" / "report.csv"));
  CHECK(fs::exists(f.root / "out" / "report.json"));
  CHECK(fs::exists(f.root / "out" / "pairs.csv"));
}

TEST_CASE("missing qrels file exits with the usage code and names the path") {
  Fixture f("missing");
  const auto r = f.run("compare --runs " + f.q(f.data / "runs") + " --gt " + f.q(f.data / "nope.txt") +
                       " --cand " + f.q(f.data / "qrels.txt"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("nope.txt") != std::string::npos);
}

TEST_CASE("unknown subcommand and missing options are usage errors") {
  Fixture f("usage");
  CHECK(f.run("frobnicate").exit_code == 2);
  CHECK(f.run("compare --gt x").exit_code == 2);
}

TEST_CASE("malformed qrels report the line") {
  Fixture f("malformed");
  std::ofstream(f.root / "bad.qrels") << "1 0 D1 1\n1 0 D2 x\n";
  const auto r = f.run("compare --runs " + f.q(f.data / "runs") + " --gt " + f.q(f.root / "bad.qrels") +
                       " --cand " + f.q(f.data / "qrels.txt"));
  CHECK(r.exit_code != 0);
  CHECK(r.err.find(":2") != std::string::npos);
}

TEST_CASE("config file supplies defaults and the command line wins") {
  Fixture f("config");
  std::ofstream(f.root / "run.cfg") << "# defaults\nalpha = 0.5\npermutations = 200\ndataset = fromcfg\n"
                                    << "label = cfglabel\n";
  const std::string base = "compare --runs " + f.q(f.data / "runs") + " --gt " +
                           f.q(f.data / "qrels.txt") + " --cand " + f.q(f.data / "qrels.txt") +
                           " --out-dir " + f.q(f.root / "out");
  auto r = f.run("--config " + f.q(f.root / "run.cfg") + " " + base);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("fromcfg,cfglabel,") != std::string::npos);

  r = f.run("--config " + f.q(f.root / "run.cfg") + " " + base + " --dataset cli");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("cli,cfglabel,") != std::string::npos);

  std::ofstream(f.root / "bad.cfg") << "no_such_key = 1\n";
  r = f.run("--config " + f.q(f.root / "bad.cfg") + " " + base);
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("no_such_key") != std::string::npos);
}

TEST_CASE("generate sample writes parseable qrels") {
  Fixture f("generate");
  const auto r = f.run("generate sample --qrels " + f.q(f.data / "qrels.txt") +
                       " --fraction 0.5 --repetitions 2 --out-dir " + f.q(f.root / "gen"));
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(f.root / "gen" / "sample_0.5_0.qrels"));
  CHECK(fs::exists(f.root / "gen" / "sample_0.5_1.qrels"));
  const auto gt = parse_qrels_file(f.data / "qrels.txt").qrels;
  const auto sampled = parse_qrels_file(f.root / "gen" / "sample_0.5_0.qrels").qrels;
  CHECK(sampled.size() == gt.size());

  const auto pop = f.run("generate popularity --qrels " + f.q(f.data / "qrels.txt") + " --runs " +
                         f.q(f.data / "runs") + " --depth 10 --out-dir " + f.q(f.root / "gen"));
  REQUIRE(pop.exit_code == 0);
  CHECK(fs::exists(f.root / "gen" / "popularity_d10_0.qrels"));
}

TEST_CASE("sweep, plot and evaluate") {
  Fixture f("sweep");
  auto r = f.run("sweep --runs " + f.q(f.data / "runs") + " --gt " + f.q(f.data / "qrels.txt") +
                 " --fractions 0.3,1.0 --repetitions 2 --permutations 300 --out-dir " +
                 f.q(f.root / "out"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("fraction,metric,mean,variance,defined") == 0);
  REQUIRE(fs::exists(f.root / "out" / "sweep.csv"));

  r = f.run("plot " + f.q(f.root / "out" / "sweep.csv"));
  REQUIRE(r.exit_code == 0);
  const auto svg = cli::slurp(f.root / "out" / "sweep.svg");
  CHECK(svg.find("<polyline class=\"metric-bac\"") != std::string::npos);

  r = f.run("evaluate --runs " + f.q(f.data / "runs") + " --qrels " + f.q(f.data / "qrels.txt") +
            " --out-dir " + f.q(f.root / "eval"));
  REQUIRE(r.exit_code == 0);
  CHECK(cli::slurp(f.root / "eval" / "scores.csv").rfind("system,", 0) == 0);

  r = f.run("plot " + f.q(f.root / "eval" / "scores.csv"));
  CHECK(r.exit_code != 0);
  CHECK(r.err.find("fraction") != std::string::npos);
}
