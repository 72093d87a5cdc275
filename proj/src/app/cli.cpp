#include "setcover/app/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <map>
#include <ostream>

#include "setcover/app/experiment.hpp"
#include "setcover/conformal.hpp"
#include "setcover/csv_io.hpp"
#include "setcover/erm.hpp"
#include "setcover/error.hpp"
#include "setcover/evaluation.hpp"
#include "setcover/setcover.hpp"
#include "setcover/synthetic.hpp"
#include "setcover/theory/gaussian_certificate.hpp"
#include "setcover/theory/linear_bound.hpp"
#include "setcover/theory/shatter.hpp"
#include "setcover/theory/uniform_convergence.hpp"

namespace setcover::app {

namespace {

const std::vector<std::string> kSyntheticKeys = {
    "profile", "dim",     "u_low",           "u_high",  "mu",
    "nu",      "nu1",     "nu2",             "sigma",   "random_covariance",
    "cov_std", "n_train_domains", "n_test_domains", "max_domain_size",
    "max_test_domain_size", "seed"};
const std::vector<std::string> kErmKeys = {"batch_size", "learning_rate", "epochs",
                                           "seed",       "architecture",  "hidden"};
const std::vector<std::string> kSetCoverKeys = {
    "gamma",  "initial_c", "c_update_frequency", "batch_size",   "learning_rate",
    "epochs", "seed",      "penalty_variant",    "architecture", "hidden"};
const std::vector<std::string> kExperimentKeys = {"methods", "gamma",     "seeds",
                                                  "output_dir", "cvc_folds", "threads"};

/// Config file, then `--<key>` flags, then `--set key=value` pairs.
struct KvOptions {
  std::string config_path;
  std::string section;
  std::map<std::string, std::string> flags;
  std::vector<std::string> sets;

  void attach(CLI::App& cmd, const std::vector<std::string>& keys, std::string config_section) {
    section = std::move(config_section);
    cmd.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : keys) cmd.add_option("--" + key, flags[key], "config key " + key);
    cmd.add_option("--set", sets, "extra key=value overrides");
  }

  KeyValueConfig resolve() const {
    KeyValueConfig kv;
    if (!config_path.empty()) {
      const auto file = KeyValueConfig::load(config_path);
      kv.merge(file);
      if (!section.empty()) kv.merge(file.section(section));
    }
    for (const auto& [key, value] : flags) {
      if (!value.empty()) kv.set(key, value);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
  }
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Set-valued prediction for multi-domain data"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate synthetic train/test CSVs");
  KvOptions gen_kv;
  std::string gen_out;
  gen_kv.attach(*gen, kSyntheticKeys, "synthetic");
  gen->add_option("--out", gen_out, "output directory")->required();

  // train-erm
  auto* erm_cmd = app.add_subcommand("train-erm", "train the ERM softmax classifier");
  KvOptions erm_kv;
  std::string erm_train, erm_out;
  erm_kv.attach(*erm_cmd, kErmKeys, "erm");
  erm_cmd->add_option("--train", erm_train, "training CSV")->required()->check(CLI::ExistingFile);
  erm_cmd->add_option("--out", erm_out, "checkpoint JSON")->required();

  // train-setcover
  auto* sc_cmd = app.add_subcommand("train-setcover", "train a SET-COVER scorer");
  KvOptions sc_kv;
  std::string sc_train, sc_out, sc_trace;
  sc_kv.attach(*sc_cmd, kSetCoverKeys, "setcover");
  sc_cmd->add_option("--train", sc_train, "training CSV")->required()->check(CLI::ExistingFile);
  sc_cmd->add_option("--out", sc_out, "checkpoint JSON")->required();
  sc_cmd->add_option("--trace", sc_trace, "multiplier trace CSV");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "calibrate conformal thresholds");
  KvOptions cal_kv;
  std::string cal_train, cal_model, cal_out, cal_mode;
  double cal_gamma = 0.1;
  std::size_t cal_folds = 5;
  cal_kv.attach(*cal, kErmKeys, "erm");
  cal->add_option("--train", cal_train, "training CSV")->required()->check(CLI::ExistingFile);
  cal->add_option("--mode", cal_mode, "robust | trainc | cvc")
      ->required()
      ->check(CLI::IsMember({"robust", "trainc", "cvc"}));
  cal->add_option("--model", cal_model, "ERM checkpoint (robust, trainc)");
  cal->add_option("--gamma", cal_gamma, "recall slack");
  cal->add_option("--folds", cal_folds, "CVC fold count");
  cal->add_option("--out", cal_out, "thresholds JSON")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "evaluate a set predictor on test domains");
  std::string ev_test, ev_method, ev_model, ev_thresholds, ev_out;
  double ev_gamma = 0.1;
  ev->add_option("--test", ev_test, "test CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--method", ev_method,
                 "erm | setcover | robust_conformal | pooling_trainc | pooling_cvc")
      ->required();
  ev->add_option("--model", ev_model, "scorer checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--thresholds", ev_thresholds, "thresholds JSON (conformal methods)");
  ev->add_option("--gamma", ev_gamma, "recall slack for success_pct");
  ev->add_option("--out", ev_out, "report directory")->required();

  // run-experiment
  auto* run = app.add_subcommand("run-experiment", "multi-seed experiment pipeline");
  KvOptions run_kv;
  run_kv.attach(*run, kExperimentKeys, "");

  // theory
  auto* theory = app.add_subcommand("theory", "executable checks of the theory");
  theory->require_subcommand(1);
  auto* shatter = theory->add_subcommand("shatter", "rectangle shattering construction");
  int sh_n = 0;
  double sh_gamma = 0.1;
  std::string sh_out;
  shatter->add_option("--n", sh_n, "number of domains")->required();
  shatter->add_option("--gamma", sh_gamma, "recall slack");
  shatter->add_option("--out", sh_out, "verdict CSV");

  auto* lb = theory->add_subcommand("linear-bound", "1-d threshold classifier bound");
  std::size_t lb_domains = 5, lb_configs = 1, lb_sweep = 10000;
  int lb_labels = 2;
  double lb_gamma = 0.1;
  std::uint64_t lb_seed = 0;
  std::string lb_out;
  lb->add_option("--domains", lb_domains, "domains per configuration");
  lb->add_option("--labels", lb_labels, "label count");
  lb->add_option("--configs", lb_configs, "random configurations");
  lb->add_option("--sweep", lb_sweep, "thresholds per orientation");
  lb->add_option("--gamma", lb_gamma, "recall slack");
  lb->add_option("--seed", lb_seed, "random seed");
  lb->add_option("--out", lb_out, "verdict CSV");

  auto* gc = theory->add_subcommand("gaussian-cert", "Gaussian non-shatterability certificate");
  std::size_t gc_dim = 2, gc_samples = 100000;
  double gc_gamma = 0.1;
  std::uint64_t gc_seed = 0;
  std::string gc_out;
  gc->add_option("--dim", gc_dim, "feature dimension d");
  gc->add_option("--samples", gc_samples, "random directions to test");
  gc->add_option("--gamma", gc_gamma, "recall slack");
  gc->add_option("--seed", gc_seed, "random seed");
  gc->add_option("--out", gc_out, "certificate JSON");

  auto* uc = theory->add_subcommand("uc-curve", "empirical uniform-convergence curve");
  std::vector<std::size_t> uc_m;
  std::size_t uc_trials = 20, uc_fresh = 200;
  double uc_gamma = 0.1;
  std::uint64_t uc_seed = 0;
  std::string uc_profile = "10d", uc_out;
  uc->add_option("--m", uc_m, "training domain counts, increasing")->required()->delimiter(',');
  uc->add_option("--trials", uc_trials, "trials per m");
  uc->add_option("--fresh", uc_fresh, "fresh domains per trial");
  uc->add_option("--gamma", uc_gamma, "recall slack");
  uc->add_option("--seed", uc_seed, "random seed");
  uc->add_option("--profile", uc_profile, "10d | 50d")->check(CLI::IsMember({"10d", "50d"}));
  uc->add_option("--out", uc_out, "curve CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      const auto cfg = synthetic_config_from(gen_kv.resolve());
      const auto data = generate_synthetic(cfg);
      const std::filesystem::path dir(gen_out);
      std::filesystem::create_directories(dir);
      save_csv(data.train, dir / "train.csv");
      save_csv(data.test, dir / "test.csv");
      out << "wrote " << data.train.num_instances() << " train rows (" << data.train.num_domains()
          << " domains) and " << data.test.num_instances() << " test rows ("
          << data.test.num_domains() << " domains) to " << dir.string() << '\n';
    } else if (erm_cmd->parsed()) {
      const auto cfg = erm_config_from(erm_kv.resolve());
      const auto data = load_csv(erm_train);
      const auto result = train_erm(data, cfg);
      save_scorer(result.classifier.net, erm_out);
      out << "erm: final epoch loss " << result.epoch_loss.back() << ", checkpoint " << erm_out
          << '\n';
    } else if (sc_cmd->parsed()) {
      const auto cfg = setcover_config_from(sc_kv.resolve());
      const auto data = load_csv(sc_train);
      const auto result = train_setcover(data, cfg);
      save_scorer(result.scorer, sc_out);
      if (!sc_trace.empty()) {
        std::ofstream trace(sc_trace);
        if (!trace) throw Error("cannot write " + sc_trace);
        write_trace_csv(trace, result.trace);
      }
      out << "setcover: " << result.trace.size() << " trace rows, checkpoint " << sc_out << '\n';
    } else if (cal->parsed()) {
      const auto data = load_csv(cal_train);
      ThresholdTable table;
      if (cal_mode == "cvc") {
        table = calibrate_pooling_cvc(data, cal_gamma, cal_folds, erm_config_from(cal_kv.resolve()));
      } else {
        if (cal_model.empty()) throw ConfigError("--model is required for mode " + cal_mode);
        const SoftmaxClassifier base{load_scorer(cal_model)};
        table = cal_mode == "robust" ? calibrate_robust(base, data, cal_gamma)
                                     : calibrate_pooling_trainc(base, data, cal_gamma);
      }
      save_thresholds(table, cal_out);
      out << "calibrated " << cal_mode << " thresholds, written to " << cal_out << '\n';
    } else if (ev->parsed()) {
      const Method method = parse_method(ev_method);
      const Scorer model = load_scorer(ev_model);
      const auto data = load_csv(ev_test, model.num_labels());
      const SoftmaxClassifier base{model};
      std::optional<ThresholdTable> table;
      if (method == Method::robust_conformal || method == Method::pooling_trainc ||
          method == Method::pooling_cvc) {
        if (ev_thresholds.empty()) throw ConfigError("--thresholds is required for " + ev_method);
        table = load_thresholds(ev_thresholds);
      }
      SetPredictor predictor;
      switch (method) {
        case Method::erm:
          predictor = [&](std::span<const double> x) {
            LabelSet s(model.num_labels());
            s.insert(erm_predict_singleton(base, x));
            return s;
          };
          break;
        case Method::setcover:
          predictor = [&](std::span<const double> x) { return predict_set(model, x); };
          break;
        case Method::robust_conformal:
          predictor = [&](std::span<const double> x) { return predict_robust(base, *table, x); };
          break;
        case Method::pooling_trainc:
        case Method::pooling_cvc:
          predictor = [&](std::span<const double> x) { return predict_pooling(base, *table, x); };
          break;
      }
      const std::vector<MethodReport> reports{
          make_report(ev_method, evaluate_domains(predictor, data), ev_gamma)};
      emit_report(ev_out, reports, data.num_labels());
      const auto& a = reports.front().aggregate;
      out << ev_method << ": success_pct " << a.success_pct << ", median min_recall "
          << a.min_recall.median << ", median avg_set_size " << a.avg_set_size.median << '\n';
    } else if (run->parsed()) {
      const auto cfg = experiment_config_from(run_kv.resolve());
      const auto outcome = run_experiment(cfg, err);
      for (const auto& row : outcome.summary) {
        out << row.method << ": success_pct " << row.success_pct.mean << " +- "
            << row.success_pct.std << ", median avg_set_size " << row.median_avg_set_size.mean
            << " +- " << row.median_avg_set_size.std << " (" << row.n_seeds << " seeds)\n";
      }
      if (outcome.failed() == outcome.seeds.size()) return kExitRuntime;
    } else if (shatter->parsed()) {
      const auto s = theory::build_rectangle_shatter(sh_n, sh_gamma);
      const auto verdicts = theory::verify_shatter(s);
      std::size_t ok = 0;
      for (const auto& v : verdicts) ok += v.verified ? 1 : 0;
      if (!sh_out.empty()) {
        std::ostringstream csv;
        theory::write_shatter_csv(csv, s, verdicts);
        write_text(sh_out, csv.str());
      }
      out << ok << "/" << verdicts.size() << " assignments verified\n";
      if (ok != verdicts.size()) return kExitRuntime;
    } else if (lb->parsed()) {
      Rng rng = make_rng(lb_seed, 0);
      std::ostringstream csv;
      csv << "config,witness,i_max,i_min,thresholds_checked,achiever_found\n";
      std::size_t achieved = 0;
      for (std::size_t c = 0; c < lb_configs; ++c) {
        std::vector<theory::OneDimDomain> domains;
        for (std::size_t i = 0; i < lb_domains; ++i) {
          domains.push_back(theory::random_gaussian_1d_domain(lb_labels, rng));
        }
        const auto r = theory::check_1d_linear_bound(domains, lb_gamma, lb_sweep);
        if (!r) {
          out << "bound not applicable: " << lb_domains << " domains <= 2|Y|\n";
          return kExitOk;
        }
        auto join = [](const std::vector<int>& v) {
          std::string s;
          for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
          return s;
        };
        csv << c << ',' << r->witness << ',' << join(r->i_max) << ',' << join(r->i_min) << ','
            << r->thresholds_checked << ',' << (r->achiever_found ? 1 : 0) << '\n';
        if (r->achiever_found) ++achieved;
      }
      if (!lb_out.empty()) write_text(lb_out, csv.str());
      out << achieved << "/" << lb_configs << " configurations had an achieving threshold\n";
      if (achieved != 0) return kExitRuntime;
    } else if (gc->parsed()) {
      Rng rng = make_rng(gc_seed, 1);
      const auto inst = theory::random_gaussian_instance(gc_dim, rng);
      const auto cert = theory::gaussian_nonshatter_certificate(inst.domains, inst.sigma_shared,
                                                                gc_gamma, gc_samples, gc_seed);
      if (!gc_out.empty()) write_text(gc_out, theory::certificate_to_json(cert).dump(2) + "\n");
      out << "residual " << cert.residual << ", " << cert.realized << "/" << cert.samples
          << " random directions realized the assignment\n";
      if (cert.realized != 0) return kExitRuntime;
    } else if (uc->parsed()) {
      theory::UcConfig cfg;
      cfg.family = uc_profile == "50d" ? SyntheticConfig::benchmark_50d()
                                       : SyntheticConfig::benchmark_10d();
      cfg.m_values = uc_m;
      cfg.trials = uc_trials;
      cfg.fresh_domains = uc_fresh;
      cfg.gamma = uc_gamma;
      cfg.seed = uc_seed;
      const auto curve = theory::empirical_uniform_convergence(cfg);
      std::ostringstream csv;
      theory::write_uc_csv(csv, curve);
      if (!uc_out.empty()) write_text(uc_out, csv.str());
      out << csv.str();
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace setcover::app
