#include <filesystem>
#include <fstream>

#include "cli_runner.hpp"
#include "doctest.h"
#include "json.hpp"
#include "setcover/app/experiment.hpp"
#include "setcover/csv_io.hpp"
#include "support.hpp"

using namespace setcover;
using testing::run;

namespace {

const std::vector<std::string> kSmallData{"--n_train_domains", "4", "--n_test_domains", "3",
                                          "--max_domain_size", "120", "--max_test_domain_size",
                                          "80"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> small_experiment(const std::filesystem::path& out,
                                          const std::string& methods, const std::string& seeds) {
  return {"run-experiment",
          "--output_dir", out.string(),
          "--methods", methods,
          "--seeds", seeds,
          "--set", "synthetic.n_train_domains=4",
          "--set", "synthetic.n_test_domains=3",
          "--set", "synthetic.max_domain_size=120",
          "--set", "synthetic.max_test_domain_size=80",
          "--set", "erm.epochs=3",
          "--set", "setcover.epochs=3"};
}

}  // namespace

TEST_CASE("gen-data writes deterministic CSVs") {
  testing::TempDir tmp;
  REQUIRE(run(with({"gen-data", "--out", (tmp / "a").string()}, kSmallData)).code == 0);
  REQUIRE(run(with({"gen-data", "--out", (tmp / "b").string()}, kSmallData)).code == 0);
  CHECK(testing::read_file(tmp / "a/train.csv") == testing::read_file(tmp / "b/train.csv"));
  CHECK(testing::read_file(tmp / "a/test.csv") == testing::read_file(tmp / "b/test.csv"));
  const auto train = load_csv(tmp / "a/train.csv");
  const auto test = load_csv(tmp / "a/test.csv");
  CHECK(train.num_domains() == 4);
  CHECK(test.num_domains() == 3);
  CHECK(testing::count_lines(tmp / "a/train.csv") == 1 + train.num_instances());
  for (const auto& b : train.domains()) CHECK(b.size() <= 120);
  for (const auto& b : test.domains()) CHECK(b.size() <= 80);

  REQUIRE(run(with({"gen-data", "--out", (tmp / "c").string(), "--seed", "9"}, kSmallData)).code == 0);
  CHECK(testing::read_file(tmp / "a/train.csv") != testing::read_file(tmp / "c/train.csv"));
}

TEST_CASE("gen-data default benchmark layout") {
  testing::TempDir tmp;
  REQUIRE(run({"gen-data", "--out", tmp.path().string(), "--max_domain_size", "30",
               "--max_test_domain_size", "30"})
              .code == 0);
  const auto train = load_csv(tmp / "train.csv");
  const auto test = load_csv(tmp / "test.csv");
  CHECK(train.num_domains() == 25);
  CHECK(test.num_domains() == 25);
  for (int id : test.domain_ids()) CHECK(train.find_domain(id) < 0);
}

TEST_CASE("stage commands chain together") {
  testing::TempDir tmp;
  const auto d = tmp.path();
  REQUIRE(run(with({"gen-data", "--out", d.string()}, kSmallData)).code == 0);
  const auto train = (d / "train.csv").string();
  const auto test = (d / "test.csv").string();
  REQUIRE(run({"train-erm", "--train", train, "--out", (d / "erm.json").string(), "--epochs", "3"}).code == 0);
  REQUIRE(run({"train-setcover", "--train", train, "--out", (d / "sc.json").string(), "--trace",
               (d / "trace.csv").string(), "--epochs", "3"})
              .code == 0);
  CHECK(testing::count_lines(d / "trace.csv") > 1);
  REQUIRE(run({"calibrate", "--train", train, "--mode", "robust", "--model",
               (d / "erm.json").string(), "--out", (d / "robust.json").string()})
              .code == 0);
  CHECK(run({"calibrate", "--train", train, "--mode", "trainc", "--out",
             (d / "trainc.json").string()})
            .code == 1);
  REQUIRE(run({"evaluate", "--test", test, "--method", "robust_conformal", "--model",
               (d / "erm.json").string(), "--thresholds", (d / "robust.json").string(), "--out",
               (d / "eval").string()})
              .code == 0);
  CHECK(testing::count_lines(d / "eval/per_domain.csv") == 1 + 3);
  REQUIRE(run({"evaluate", "--test", test, "--method", "setcover", "--model",
               (d / "sc.json").string(), "--out", (d / "eval_sc").string()})
              .code == 0);
  CHECK(run({"evaluate", "--test", test, "--method", "pooling_trainc", "--model",
             (d / "erm.json").string(), "--out", (d / "eval2").string()})
            .code == 1);
}

TEST_CASE("argument and config errors exit with code 1") {
  testing::TempDir tmp;
  CHECK(run({}).code == 1);
  CHECK(run({"no-such-command"}).code == 1);
  CHECK(run({"gen-data"}).code == 1);
  CHECK(run({"theory", "shatter"}).code == 1);
  CHECK(run({"theory", "shatter", "--n", "0"}).code == 1);
  CHECK(run({"run-experiment", "--methods", "bogus", "--output_dir", tmp.path().string()}).code == 1);
  CHECK(run({"run-experiment", "--gamma", "1.5", "--output_dir", tmp.path().string()}).code == 1);
  CHECK(run({"run-experiment", "--set", "novalue", "--output_dir", tmp.path().string()}).code == 1);
  CHECK(run({"train-erm", "--train", (tmp / "missing.csv").string(), "--out", "x.json"}).code == 1);
}

TEST_CASE("config file and section layering") {
  testing::TempDir tmp;
  {
    std::ofstream cfg(tmp / "exp.cfg");
    cfg << "n_train_domains = 3\nsynthetic.n_test_domains = 2\nsynthetic.max_domain_size = 50\n"
           "synthetic.max_test_domain_size = 40\n";
  }
  REQUIRE(run({"gen-data", "--config", (tmp / "exp.cfg").string(), "--out",
               (tmp / "d").string(), "--n_test_domains", "5"})
              .code == 0);
  CHECK(load_csv(tmp / "d/train.csv").num_domains() == 3);
  CHECK(load_csv(tmp / "d/test.csv").num_domains() == 5);
}

TEST_CASE("run-experiment with a single method and seed") {
  testing::TempDir tmp;
  const auto out = tmp / "res";
  const auto r = run(small_experiment(out, "erm", "0"));
  REQUIRE(r.code == 0);
  std::size_t per_domain = 0, aggregate_files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(out)) {
    per_domain += e.path().filename() == "per_domain.csv" ? 1 : 0;
    aggregate_files += e.path().filename() == "aggregate.csv" ? 1 : 0;
  }
  CHECK(per_domain == 1);
  CHECK(aggregate_files == 1);
  CHECK(testing::count_lines(out / "seed_0/aggregate.csv") == 2);
  CHECK(testing::count_lines(out / "seed_0/per_domain.csv") == 1 + 3);
  CHECK(std::filesystem::exists(out / "summary.csv"));
  const auto manifest = nlohmann::json::parse(testing::read_file(out / "manifest.json"));
  CHECK(manifest["seeds"].size() == 1);
  CHECK(manifest["seeds"][0]["status"] == "ok");
}

TEST_CASE("conformal methods share the ERM checkpoint") {
  testing::TempDir tmp;
  const auto out = tmp / "res";
  REQUIRE(run(small_experiment(out, "erm,robust_conformal,pooling_trainc", "1")).code == 0);
  const auto manifest = nlohmann::json::parse(testing::read_file(out / "manifest.json"));
  const auto& seed = manifest["seeds"][0];
  CHECK(seed["erm_checkpoint_fnv1a"] == app::file_hash(out / "seed_1/erm.json"));
  CHECK(seed["methods_from_erm_checkpoint"].size() == 3);
  CHECK(testing::count_lines(out / "seed_1/aggregate.csv") == 4);
}

TEST_CASE("thread count does not change results") {
  testing::TempDir tmp;
  auto one = small_experiment(tmp / "t1", "erm,setcover", "0,1,2");
  auto two = small_experiment(tmp / "t2", "erm,setcover", "0,1,2");
  two.push_back("--threads");
  two.push_back("2");
  REQUIRE(run(one).code == 0);
  REQUIRE(run(two).code == 0);
  for (const std::string seed : {"seed_0", "seed_1", "seed_2"}) {
    for (const std::string f : {"per_domain.csv", "aggregate.csv", "crossplot.csv", "setcover.json"}) {
      CHECK(testing::read_file(tmp / "t1" / seed / f) == testing::read_file(tmp / "t2" / seed / f));
    }
  }
  CHECK(testing::read_file(tmp / "t1/summary.csv") == testing::read_file(tmp / "t2/summary.csv"));
}

TEST_CASE("failing seeds are recorded and all-failed exits with code 2") {
  testing::TempDir tmp;
  const auto r = run({"run-experiment", "--output_dir", (tmp / "res").string(), "--seeds", "0,1",
                      "--set", "data.source=csv", "--set",
                      "data.train_csv=" + (tmp / "missing_train.csv").string(), "--set",
                      "data.test_csv=" + (tmp / "missing_test.csv").string()});
  CHECK(r.code == 2);
  const auto manifest = nlohmann::json::parse(testing::read_file(tmp / "res/manifest.json"));
  for (const auto& s : manifest["seeds"]) {
    CHECK(s["status"] == "failed");
    CHECK_FALSE(s["error"].get<std::string>().empty());
  }
}

TEST_CASE("theory subcommands") {
  testing::TempDir tmp;
  const auto sh = run({"theory", "shatter", "--n", "3", "--out", (tmp / "shatter.csv").string()});
  CHECK(sh.code == 0);
  CHECK(sh.out.find("8/8") != std::string::npos);
  CHECK(testing::count_lines(tmp / "shatter.csv") == 1 + 8 * 3);

  const auto lb = run({"theory", "linear-bound", "--configs", "3", "--sweep", "500", "--out",
                       (tmp / "lb.csv").string()});
  CHECK(lb.code == 0);
  CHECK(std::filesystem::exists(tmp / "lb.csv"));

  const auto gc = run({"theory", "gaussian-cert", "--dim", "3", "--samples", "2000", "--out",
                       (tmp / "cert.json").string()});
  CHECK(gc.code == 0);
  const auto cert = nlohmann::json::parse(testing::read_file(tmp / "cert.json"));
  CHECK(cert.is_object());

  const auto uc = run({"theory", "uc-curve", "--m", "5,10", "--trials", "2", "--fresh", "30",
                       "--out", (tmp / "uc.csv").string()});
  CHECK(uc.code == 0);
  CHECK(testing::read_file(tmp / "uc.csv").rfind("m,trials,infeasible,mean_violation\n", 0) == 0);
  CHECK(testing::count_lines(tmp / "uc.csv") == 3);
}
