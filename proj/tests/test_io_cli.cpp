#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mixfht/cli.hpp>
#include <mixfht/common.hpp>
#include <mixfht/fht.hpp>
#include <mixfht/io.hpp>
#include <mixfht/model.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace mixfht;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / "mixfht_iocli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& cwd) {
  std::string cmd = "cd " + cwd.string() + " && " + MIXFHT_BIN_PATH + " " +
                    args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

model::Dataset tiny_dataset() {
  model::Dataset data;
  model::SubjectRecord a;
  a.id = "a01";
  a.x = {1.0, 0.1, -1.0 / 3.0};
  a.t = {12.5, 0.1 + 0.2, 30.0};
  a.event = {uint8_t(1), uint8_t(1), uint8_t(0)};
  model::SubjectRecord b;
  b.id = "b-2";
  b.x = {1.0, -2.75, 1e-15};
  b.t = {90.0};
  b.event = {0};
  data.push_back(a);
  data.push_back(b);
  return data;
}

}  // namespace

TEST_CASE("doubles survive a text round trip") {
  const double vals[] = {0.0,        0.1,     -1.0 / 3.0, 1e-300,
                         -2.5e17,    1e308,   5e-324,     3.141592653589793,
                         -0.4945695 };
  for (double v : vals) {
    std::string s = io::format_double(v);
    CHECK(io::parse_double(s, 1) == v);
  }
  CHECK(io::parse_double("42", 1) == 42.0);
  CHECK_THROWS_AS(io::parse_double("", 3), IngestError);
  CHECK_THROWS_AS(io::parse_double("abc", 3), IngestError);
  CHECK_THROWS_AS(io::parse_double("1.5x", 3), IngestError);
  try {
    io::parse_double("oops", 17);
    FAIL("expected a throw");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("line 17") != std::string::npos);
  }
}

TEST_CASE("variant and mode names round trip") {
  for (auto v : {model::Variant::cs_c_fv, model::Variant::cs_i_fv,
                 model::Variant::cs_i, model::Variant::cs_n})
    CHECK(io::variant_from_string(io::variant_to_string(v)) == v);
  CHECK_THROWS_AS(io::variant_from_string("cs-x"), ConfigError);
  CHECK(io::mode_from_string("interval") == model::LikelihoodMode::interval_censored);
  CHECK(io::mode_from_string("continuous") == model::LikelihoodMode::continuous);
  CHECK(io::mode_to_string(model::LikelihoodMode::continuous) == "continuous");
  CHECK_THROWS_AS(io::mode_from_string("exact"), ConfigError);
}

TEST_CASE("dataset files round trip bit for bit") {
  fs::path dir = fresh_dir("ds_rt");
  fs::path f = dir / "d.csv";
  model::Dataset data = tiny_dataset();
  io::write_dataset(f.string(), data, {"age", "dose"}, "00c0ffee00c0ffee");

  io::DatasetFile back = io::read_dataset(f.string());
  CHECK(back.manifest_digest == "00c0ffee00c0ffee");
  CHECK(back.covariate_names == std::vector<std::string>{"age", "dose"});
  REQUIRE(back.data.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back.data[i].id == data[i].id);
    CHECK(back.data[i].x == data[i].x);
    CHECK(back.data[i].t == data[i].t);
    CHECK(back.data[i].event == data[i].event);
  }

  // a second write of what was read is byte-identical
  fs::path f2 = dir / "d2.csv";
  io::write_dataset(f2.string(), back.data, back.covariate_names,
                    back.manifest_digest);
  CHECK(slurp(f) == slurp(f2));

  CHECK(io::read_manifest_digest(f.string()) == "00c0ffee00c0ffee");

  // mismatched covariate names are a shape error, not silent truncation
  CHECK_THROWS_AS(io::write_dataset((dir / "bad.csv").string(), data, {"age"}, ""),
                  ShapeError);
}

TEST_CASE("dataset ingest rejects malformed files with line numbers") {
  fs::path dir = fresh_dir("ds_err");
  auto expect_reject = [&](const std::string& name, const std::string& body,
                           const std::string& needle) {
    fs::path f = dir / name;
    write_text(f, body);
    try {
      io::read_dataset(f.string());
      FAIL("expected a throw for ", name);
    } catch (const IngestError& e) {
      INFO("file ", name, " message: ", e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  CHECK_THROWS_AS(io::read_dataset((dir / "absent.csv").string()), IngestError);
  expect_reject("empty.csv", "", "empty file");
  expect_reject("hdr.csv", "id,gap,event\na,1,0\n", "line 1");
  expect_reject("hdr2.csv", "subject_id,gap_time\n", "header");
  expect_reject("cells.csv",
                "subject_id,gap_time,event,x1\na,5,1,0.5\na,3,0\n",
                "line 3: expected 4 cells, got 3");
  expect_reject("id1.csv", "subject_id,gap_time,event\n,5,0\n",
                "line 2: empty subject_id");
  expect_reject("id2.csv", "subject_id,gap_time,event\ns 01,5,0\n",
                "letters, digits");
  expect_reject("gap1.csv", "subject_id,gap_time,event\na,-1,0\n",
                "nonnegative");
  expect_reject("gap2.csv", "subject_id,gap_time,event\na,12x,0\n",
                "line 2: not a number");
  expect_reject("ev1.csv", "subject_id,gap_time,event\na,5,2\n",
                "event must be 0 or 1");
  expect_reject("ev2.csv", "subject_id,gap_time,event\na,5,0.5\n",
                "not an integer");
  expect_reject("tail1.csv", "subject_id,gap_time,event\na,5,1\n",
                "exactly one censored row");
  expect_reject("tail2.csv", "subject_id,gap_time,event\na,5,0\na,3,0\n",
                "line 3: subject a has rows after its censored row");
  expect_reject("contig.csv",
                "subject_id,gap_time,event\na,5,1\na,3,0\nb,4,0\na,2,0\n",
                "line 5: rows of subject a must be contiguous");
  expect_reject("covchg.csv",
                "subject_id,gap_time,event,x1\na,5,1,0.5\na,3,0,0.6\n",
                "line 3: covariates of subject a change between rows");
  expect_reject("norows.csv", "subject_id,gap_time,event\n", "no data rows");
}

TEST_CASE("dataset ingest tolerates comments and captures the digest") {
  fs::path dir = fresh_dir("ds_ok");
  fs::path f = dir / "d.csv";
  write_text(f,
             "# manifest deadbeef01234567\n"
             "subject_id,gap_time,event,x1\n"
             "# a mid-file note\n"
             "s1,5,1,0.25\n"
             "\n"
             "s1,3,0,0.25\n"
             "s2,9,0,-1\n");
  io::DatasetFile df = io::read_dataset(f.string());
  CHECK(df.manifest_digest == "deadbeef01234567");
  REQUIRE(df.data.size() == 2);
  CHECK(df.data[0].t == std::vector<double>{5.0, 3.0});
  CHECK(df.data[0].event == std::vector<std::uint8_t>{1, 0});
  CHECK(df.data[1].x == std::vector<double>{1.0, -1.0});
}

TEST_CASE("draws files round trip and reorder by chain and iteration") {
  fs::path dir = fresh_dir("draws_rt");
  fs::path f = dir / "draws.csv";
  std::vector<std::string> names = {"alpha[0]", "beta1[0]", "theta2"};
  std::vector<std::vector<std::vector<double>>> chains = {
      {{0.1, -2.0, 0.5}, {0.2, -1.0 / 7.0, 0.25}},
      {{-0.3, 1e-12, 2.0}, {0.4, 5.5, 1e300}}};
  io::write_draws(f.string(), names, chains, "feedface00000001");

  io::DrawsFile back = io::read_draws(f.string());
  CHECK(back.manifest_digest == "feedface00000001");
  CHECK(back.names == names);
  REQUIRE(back.chains.size() == 2);
  CHECK(back.chains[0] == chains[0]);
  CHECK(back.chains[1] == chains[1]);

  // rows shuffled on disk come back in (chain, iteration) order
  fs::path g = dir / "shuffled.csv";
  write_text(g,
             "chain,iteration,parameter,value\n"
             "2,1,a,21\n"
             "1,2,a,12\n"
             "1,1,a,11\n"
             "2,2,a,22\n");
  io::DrawsFile sh = io::read_draws(g.string());
  REQUIRE(sh.chains.size() == 2);
  CHECK(sh.chains[0][0][0] == 11.0);
  CHECK(sh.chains[0][1][0] == 12.0);
  CHECK(sh.chains[1][0][0] == 21.0);
  CHECK(sh.chains[1][1][0] == 22.0);

  CHECK_THROWS_AS(io::write_draws((dir / "bad.csv").string(), names,
                                  {{{1.0, 2.0}}}, ""),
                  ShapeError);
}

TEST_CASE("draws ingest rejects structural defects") {
  fs::path dir = fresh_dir("draws_err");
  auto expect_reject = [&](const std::string& name, const std::string& body,
                           const std::string& needle) {
    fs::path f = dir / name;
    write_text(f, body);
    try {
      io::read_draws(f.string());
      FAIL("expected a throw for ", name);
    } catch (const IngestError& e) {
      INFO("file ", name, " message: ", e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_reject("empty.csv", "", "empty file");
  expect_reject("hdr.csv", "chain,iter,parameter,value\n1,1,a,0\n",
                "header must be chain,iteration,parameter,value");
  expect_reject("cells.csv", "chain,iteration,parameter,value\n1,1,a\n",
                "line 2: expected 4 cells");
  expect_reject("dup.csv",
                "chain,iteration,parameter,value\n1,1,a,0\n1,1,a,1\n",
                "duplicate value for a");
  expect_reject("hole.csv",
                "chain,iteration,parameter,value\n"
                "1,1,a,0\n1,1,b,1\n1,2,a,2\n",
                "chain 1 iteration 2 is missing parameters");
  expect_reject("nodata.csv", "chain,iteration,parameter,value\n", "no draws");
  expect_reject("badnum.csv", "chain,iteration,parameter,value\n1,1,a,x\n",
                "not a number");
  expect_reject("badchain.csv", "chain,iteration,parameter,value\nq,1,a,0\n",
                "not an integer");
}

TEST_CASE("config loading fills defaults and rejects unknown keys") {
  fs::path dir = fresh_dir("cfg");

  SUBCASE("partial config keeps defaults") {
    fs::path f = dir / "partial.json";
    write_text(f, R"({"model": "cs-i", "sampler": {"seed": 99}})");
    io::RunConfig c = io::load_config(f.string());
    CHECK(c.model == "cs-i");
    CHECK(c.mode == "interval");
    CHECK(c.x0 == 10.0);
    CHECK(c.nu == 3.9);
    CHECK(c.chains == 2);
    CHECK(c.jobs == 1);
    CHECK(c.mc_s == 1000);
    CHECK(c.mc_draws == 0);
    CHECK(c.tolerance == 1e-10);
    CHECK(c.standardize == false);
    CHECK(c.out_dir == ".");
    CHECK(c.sampler.seed == 99);
    CHECK(c.sampler.n_iter == 20000);
    CHECK(c.sampler.burn_in == 10000);
    CHECK(c.sampler.thin == 10);
    CHECK(c.prior.var_alpha == 100.0);
    CHECK(c.prior.xi == std::vector<double>{1.0, 1.0});
  }

  SUBCASE("full config lands in every field") {
    fs::path f = dir / "full.json";
    write_text(f, R"({
      "model": "cs-n", "mode": "continuous", "x0": 12.0, "nu": 2.5,
      "prior": {"var_alpha": 25, "var_beta": 16, "ig_shape": 2,
                "ig_scale": 3, "xi": [2, 5]},
      "sampler": {"n_iter": 5000, "burn_in": 1000, "thin": 4,
                  "adapt_interval": 25, "target_scalar": 0.4,
                  "target_vector": 0.25, "init_scale": 0.5,
                  "retain_latents": true, "trace_scales": true, "seed": 7},
      "chains": 3, "jobs": 2, "mc_s": 500, "mc_draws": 40,
      "tolerance": 1e-8, "standardize": true, "out_dir": "run1"
    })");
    io::RunConfig c = io::load_config(f.string());
    CHECK(c.model == "cs-n");
    CHECK(c.mode == "continuous");
    CHECK(c.x0 == 12.0);
    CHECK(c.nu == 2.5);
    CHECK(c.prior.var_alpha == 25.0);
    CHECK(c.prior.var_beta == 16.0);
    CHECK(c.prior.ig_shape == 2.0);
    CHECK(c.prior.ig_scale == 3.0);
    CHECK(c.prior.xi == std::vector<double>{2.0, 5.0});
    CHECK(c.sampler.n_iter == 5000);
    CHECK(c.sampler.burn_in == 1000);
    CHECK(c.sampler.thin == 4);
    CHECK(c.sampler.adapt_interval == 25);
    CHECK(c.sampler.target_scalar == 0.4);
    CHECK(c.sampler.target_vector == 0.25);
    CHECK(c.sampler.init_scale == 0.5);
    CHECK(c.sampler.retain_latents == true);
    CHECK(c.sampler.trace_scales == true);
    CHECK(c.sampler.seed == 7);
    CHECK(c.chains == 3);
    CHECK(c.jobs == 2);
    CHECK(c.mc_s == 500);
    CHECK(c.mc_draws == 40);
    CHECK(c.tolerance == 1e-8);
    CHECK(c.standardize == true);
    CHECK(c.out_dir == "run1");
  }

  SUBCASE("unknown keys are rejected at every level") {
    auto reject = [&](const std::string& name, const std::string& body,
                      const std::string& needle) {
      fs::path f = dir / name;
      write_text(f, body);
      try {
        io::load_config(f.string());
        FAIL("expected a throw for ", name);
      } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
      }
    };
    reject("top.json", R"({"modle": "cs-i"})", "unknown config key 'modle'");
    reject("prior.json", R"({"prior": {"vr_alpha": 1}})",
           "unknown prior key 'vr_alpha'");
    reject("sampler.json", R"({"sampler": {"iters": 10}})",
           "unknown sampler key 'iters'");
  }

  SUBCASE("malformed files are config errors") {
    fs::path f = dir / "broken.json";
    write_text(f, "{not json");
    CHECK_THROWS_AS(io::load_config(f.string()), ConfigError);
    write_text(f, "[1,2]");
    CHECK_THROWS_AS(io::load_config(f.string()), ConfigError);
    write_text(f, R"({"chains": "two"})");
    CHECK_THROWS_AS(io::load_config(f.string()), ConfigError);
    CHECK_THROWS_AS(io::load_config((dir / "absent.json").string()),
                    ConfigError);
  }
}

TEST_CASE("config digests are stable and sensitive") {
  io::RunConfig a;
  io::RunConfig b;
  CHECK(io::config_digest(a) == io::config_digest(b));
  CHECK(io::config_digest(a).size() == 16);
  b.sampler.seed = 2;
  CHECK(io::config_digest(a) != io::config_digest(b));
  b = a;
  b.out_dir = "elsewhere";
  CHECK(io::config_digest(a) != io::config_digest(b));

  std::string canon = io::config_canonical(a);
  CHECK(canon == io::config_canonical(a));
  CHECK(canon.find("\"model\":\"cs-c-fv\"") != std::string::npos);
  auto parsed = nlohmann::json::parse(canon);
  CHECK(parsed.at("sampler").at("n_iter") == 20000);
}

TEST_CASE("run configs build specs with guarded knobs") {
  io::RunConfig cfg;
  model::ModelSpec spec = io::to_spec(cfg);
  CHECK(spec.variant == model::Variant::cs_c_fv);
  CHECK(spec.mode == model::LikelihoodMode::interval_censored);
  CHECK(spec.prior.xi == std::vector<double>{1.0, 1.0});

  cfg.model = "cs-n";
  CHECK(io::to_spec(cfg).prior.xi == std::vector<double>{1.0});

  cfg = io::RunConfig{};
  cfg.model = "bogus";
  CHECK_THROWS_AS(io::to_spec(cfg), ConfigError);
  cfg = io::RunConfig{};
  cfg.mode = "exact";
  CHECK_THROWS_AS(io::to_spec(cfg), ConfigError);
  cfg = io::RunConfig{};
  cfg.chains = 0;
  CHECK_THROWS_AS(io::to_spec(cfg), ConfigError);
  cfg = io::RunConfig{};
  cfg.jobs = 0;
  CHECK_THROWS_AS(io::to_spec(cfg), ConfigError);
  cfg = io::RunConfig{};
  cfg.mc_s = 0;
  CHECK_THROWS_AS(io::to_spec(cfg), ConfigError);
  cfg = io::RunConfig{};
  cfg.mc_draws = -1;
  CHECK_THROWS_AS(io::to_spec(cfg), ConfigError);
}

TEST_CASE("summary and criteria writers emit one row per entry") {
  fs::path dir = fresh_dir("writers");
  diagnostics::SummaryRow r1;
  r1.name = "alpha[0]";
  r1.mean = 1.5;
  r1.sd = 0.25;
  r1.hpd_lo = 1.0;
  r1.hpd_hi = 2.0;
  r1.rhat = 1.01;
  r1.ess = 150.0;
  r1.mcse = 0.02;
  r1.hw_evaluated = true;
  r1.hw_pass = true;
  r1.hw_discard = 0.5;
  diagnostics::SummaryRow r2 = r1;
  r2.name = "theta2";
  r2.hw_evaluated = false;
  fs::path f = dir / "summary.csv";
  io::write_summary(f.string(), {r1, r2}, "0123456789abcdef");
  std::string text = slurp(f);
  CHECK(text.find("# manifest 0123456789abcdef\n") == 0);
  CHECK(text.find("alpha[0],1.5,0.25,1,2,1.01") != std::string::npos);
  CHECK(text.find(",1,0.5\n") != std::string::npos);   // hw pass flag
  CHECK(text.find(",NA,") != std::string::npos);       // hw not evaluated

  selection::CriteriaResult crit;
  crit.dic = 100.5;
  crit.p_d = 3.25;
  crit.dev_at_mean = 94.0;
  crit.mean_dev = 97.25;
  crit.lpml = -50.125;
  crit.mc_S = 1000;
  crit.draws_used = 40;
  crit.log_zero_count = 2;
  fs::path g = dir / "criteria.csv";
  io::write_criteria(g.string(), {{"cs-i", crit}}, "");
  std::string ct = slurp(g);
  CHECK(ct.find("model,dic,") == 0);
  CHECK(ct.find("cs-i,100.5,3.25,94,97.25,-50.125,1000,40,2\n") !=
        std::string::npos);
}

TEST_CASE("cli simulate writes a loadable cohort deterministically") {
  fs::path d1 = fresh_dir("sim_a");
  fs::path d2 = fresh_dir("sim_b");
  std::string args =
      "simulate --n 10 --model cs-c-fv --seed 42 --followup 400 --out simout";
  CHECK(run_cli(args, d1) == 0);
  CHECK(run_cli(args, d2) == 0);

  io::DatasetFile df = io::read_dataset((d1 / "simout" / "dataset.csv").string());
  CHECK(df.data.size() == 10);
  CHECK(df.data.front().id == "s0001");
  CHECK(df.data.back().id == "s0010");
  CHECK(df.covariate_names == std::vector<std::string>{"x1", "x2"});
  for (const auto& subj : df.data) {
    REQUIRE(!subj.t.empty());
    CHECK(subj.event.back() == 0);
  }

  // truth rows: one per subject, components are 1-based
  std::string truth = slurp(d1 / "simout" / "truth.csv");
  long rows = -2;  // digest + header
  for (char c : truth) rows += (c == '\n');
  CHECK(rows == 10);
  CHECK(truth.find("s0001,") != std::string::npos);

  // same seed, same relative out dir: byte-identical artifacts
  CHECK(slurp(d1 / "simout" / "dataset.csv") ==
        slurp(d2 / "simout" / "dataset.csv"));
  CHECK(slurp(d1 / "simout" / "truth.csv") ==
        slurp(d2 / "simout" / "truth.csv"));

  auto manifest = nlohmann::json::parse(slurp(d1 / "simout" / "manifest.json"));
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("seed") == 42);
  CHECK(manifest.at("config_digest").get<std::string>() ==
        io::read_manifest_digest((d1 / "simout" / "dataset.csv").string()));
}

TEST_CASE("cli fit emits coherent artifacts and reruns bit for bit") {
  fs::path d1 = fresh_dir("fit_a");
  fs::path d2 = fresh_dir("fit_b");
  CHECK(run_cli("simulate --n 10 --seed 42 --followup 400 --out .", d1) == 0);
  fs::copy_file(d1 / "dataset.csv", d2 / "dataset.csv");

  std::string args =
      "fit --data dataset.csv --model cs-c-fv --mode continuous "
      "--x0 10 --nu 3.9 --iters 400 --burnin 200 --thin 10 --chains 2 "
      "--seed 77 --out art";
  int code1 = run_cli(args, d1);
  int code2 = run_cli(args, d2);
  CHECK(code1 == code2);
  CHECK((code1 == 0 || code1 == 13));

  io::DrawsFile draws = io::read_draws((d1 / "art" / "draws.csv").string());
  REQUIRE(draws.chains.size() == 2);
  CHECK(draws.chains[0].size() == 20);
  CHECK(draws.chains[1].size() == 20);
  io::RunConfig cfg;
  cfg.model = "cs-c-fv";
  CHECK(draws.names == model::parameter_names(io::to_spec(cfg), 3));

  auto manifest = nlohmann::json::parse(slurp(d1 / "art" / "manifest.json"));
  CHECK(manifest.at("command") == "fit");
  CHECK(manifest.at("config_digest").get<std::string>() == draws.manifest_digest);
  CHECK(manifest.at("config").at("sampler").at("seed") == 77);
  auto outputs = manifest.at("outputs").get<std::vector<std::string>>();
  CHECK(outputs == std::vector<std::string>{"draws.csv", "summary.csv",
                                            "acceptance.csv"});

  for (const char* name : {"draws.csv", "summary.csv", "acceptance.csv"})
    CHECK(slurp(d1 / "art" / name) == slurp(d2 / "art" / name));

  // summary carries one row per parameter
  std::string summary = slurp(d1 / "art" / "summary.csv");
  long rows = -2;
  for (char c : summary) rows += (c == '\n');
  CHECK(rows == long(draws.names.size()));

  // standardize flag changes the digest but still fits
  std::string args_std = args + " --standardize";
  fs::path d3 = fresh_dir("fit_c");
  fs::copy_file(d1 / "dataset.csv", d3 / "dataset.csv");
  int code3 = run_cli(args_std, d3);
  CHECK((code3 == 0 || code3 == 13));
  auto m3 = nlohmann::json::parse(slurp(d3 / "art" / "manifest.json"));
  CHECK(m3.at("standardization").contains("x1"));
  CHECK(m3.at("config_digest") != manifest.at("config_digest"));
}

TEST_CASE("cli maps error classes to exit codes") {
  fs::path dir = fresh_dir("codes");
  CHECK(run_cli("simulate --n 3 --seed 5 --followup 300 --out .", dir) == 0);

  // config errors
  CHECK(run_cli("fit --data dataset.csv --model bogus --iters 100 --burnin 10",
                dir) == 10);
  CHECK(run_cli("fit --data dataset.csv --iters 100 --burnin 100", dir) == 10);
  CHECK(run_cli("fit --data dataset.csv --iters 100 --burnin 10 --thin 0",
                dir) == 10);
  CHECK(run_cli("fit --data dataset.csv --mode exact --iters 100 --burnin 10",
                dir) == 10);

  // ingest errors
  CHECK(run_cli("fit --data no_such_file.csv --iters 100 --burnin 10", dir) ==
        11);
  write_text(dir / "mangled.csv", "subject_id,gap_time,event\na,5,1\n");
  CHECK(run_cli("fit --data mangled.csv --iters 100 --burnin 10", dir) == 11);

  // runaway generation trips the record cap
  CHECK(run_cli("simulate --n 1 --seed 5 --followup 1000000000 --out cap",
                dir) == 12);
}

TEST_CASE("cli predict reproduces the plug-in curve for a single draw") {
  fs::path dir = fresh_dir("predict");
  const double a0 = std::log(8.0);
  const double b0 = 0.8;
  write_text(dir / "draws.csv",
             "chain,iteration,parameter,value\n"
             "1,1,alpha[0]," + io::format_double(a0) + "\n"
             "1,1,beta1[0]," + io::format_double(b0) + "\n"
             "1,1,rho[1],1\n"
             "1,1,theta1[1],0.25\n"
             "1,1,theta2,0.09\n");
  CHECK(run_cli("predict --draws draws.csv --tmax 50 --steps 10 --out pred.csv",
                dir) == 0);

  fht::FhtParams fp{10.0, 3.9, 10.0 + std::exp(a0), std::exp(b0)};
  fht::SeriesEvaluator ev(fp, fht::SeriesConfig{});
  std::ifstream in(dir / "pred.csv");
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "t,F");
  double prev = -1.0;
  int g = 0;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    double t = io::parse_double(line.substr(0, comma), 0);
    double f = io::parse_double(line.substr(comma + 1), 0);
    CHECK(t == 50.0 * double(g) / 10.0);
    CHECK(f == doctest::Approx(ev.cdf(t)).epsilon(1e-12));
    CHECK(f >= prev);
    prev = f;
    ++g;
  }
  CHECK(g == 11);

  // profile names must match the draws dimension
  CHECK(run_cli("predict --draws draws.csv --profile x1=0.5 --out p2.csv",
                dir) == 11);
  // component index beyond the mixture is a config error
  CHECK(run_cli("predict --draws draws.csv --component 3 --out p3.csv", dir) ==
        10);
}

TEST_CASE("cli diagnose rewrites a summary from stored draws") {
  fs::path dir = fresh_dir("diagnose");
  std::vector<std::string> names = {"alpha[0]", "beta1[0]"};
  std::vector<std::vector<double>> chain;
  for (int i = 0; i < 60; ++i)
    chain.push_back({std::sin(0.7 * i), std::cos(1.3 * i)});
  io::write_draws((dir / "draws.csv").string(), names, {chain, chain},
                  "aaaabbbbccccdddd");
  CHECK(run_cli("diagnose --draws draws.csv --out report.csv", dir) == 0);
  std::string report = slurp(dir / "report.csv");
  CHECK(report.find("# manifest aaaabbbbccccdddd\n") == 0);
  CHECK(report.find("parameter,mean,sd,") != std::string::npos);
  CHECK(report.find("alpha[0],") != std::string::npos);
  CHECK(report.find("beta1[0],") != std::string::npos);
  long rows = -2;
  for (char c : report) rows += (c == '\n');
  CHECK(rows == 2);
}
