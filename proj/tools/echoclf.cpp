// echoclf: command-line front end.
//
//   echoclf synth   --out DIR [synthetic spec flags]
//   echoclf select  --input data.csv --alpha 0.05 --alpha 0.01 --out DIR
//   echoclf fit     --input data.csv [--features survivors_0.05.txt] --model logit|esn|both --out DIR
//   echoclf compare --input data.csv --out DIR
//   echoclf roc     --model-file DIR/model_esn.txt --input data.csv --out DIR
//   echoclf roc     --points DIR/roc_esn_all.csv --out DIR
//
// Exit status: 0 success, 2 invalid configuration, 3 data/load error,
// 4 fit or numerical error, 1 anything else.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "echoclf/pipeline.hpp"

namespace {

enum ExitCode : int { ok = 0, other = 1, invalid_config = 2, load_error = 3, fit_error = 4 };

struct SynthFlags {
  bool use = false;
  std::size_t n = 804;
  std::size_t informative = 5;
  std::size_t noise = 15;
  double intercept = 0.0;
  std::vector<double> beta;
  std::string nonlinearity = "none";
  double strength = 3.0;
  double label_noise = 0.0;

  echoclf::SynthSpec spec() const {
    echoclf::SynthSpec s;
    s.n = n;
    s.p_informative = informative;
    s.p_noise = noise;
    s.planted_alpha = intercept;
    s.planted_beta = beta.empty() ? echoclf::default_planted_beta(informative) : beta;
    s.nonlinearity = echoclf::parse_nonlinearity(nonlinearity);
    s.nonlinear_strength = strength;
    s.label_noise = label_noise;
    return s;
  }
};

struct Flags {
  std::string input;
  std::string label = "label";
  std::string model = "both";
  std::string readout = "ridge";
  std::vector<double> alphas;
  SynthFlags synth;
  echoclf::RunConfig run;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.run.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", f.run.seed, "Master seed; all sub-seeds derive from it")->capture_default_str();
  cmd->add_option("--label", f.label, "Label column name")->capture_default_str();
}

void add_source(CLI::App* cmd, Flags& f) {
  auto* input = cmd->add_option("--input", f.input, "Input CSV (header row, 0/1 label column)");
  auto* synth = cmd->add_flag("--synth", f.synth.use, "Use a generated synthetic dataset instead of --input");
  input->excludes(synth);
}

void add_synth_spec(CLI::App* cmd, Flags& f) {
  cmd->add_option("--n", f.synth.n, "Rows")->capture_default_str();
  cmd->add_option("--informative", f.synth.informative, "Informative features")->capture_default_str();
  cmd->add_option("--noise-features", f.synth.noise, "Pure-noise features")->capture_default_str();
  cmd->add_option("--intercept", f.synth.intercept, "Planted intercept")->capture_default_str();
  cmd->add_option("--beta", f.synth.beta, "Planted coefficients (default 1,-1,1.5,-1.5,2,...)")->delimiter(',');
  cmd->add_option("--nonlinearity", f.synth.nonlinearity, "none | interaction | threshold")->capture_default_str();
  cmd->add_option("--strength", f.synth.strength, "Coefficient of the nonlinear term")->capture_default_str();
  cmd->add_option("--label-noise", f.synth.label_noise, "Label flip probability")->capture_default_str();
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  auto& e = f.run.esn;
  cmd->add_option("--model", f.model, "logit | esn | both")->capture_default_str();
  cmd->add_option("--alpha", f.alphas, "Significance level for backward selection (repeatable)");
  cmd->add_option("--folds", f.run.folds, "Cross-validation folds")->capture_default_str();
  cmd->add_option("--reservoir-size", e.reservoir_size, "Reservoir units")->capture_default_str();
  cmd->add_option("--spectral-radius", e.spectral_radius, "Target spectral radius of W")->capture_default_str();
  cmd->add_option("--density", e.density, "Fraction of nonzero reservoir weights")->capture_default_str();
  cmd->add_option("--eta", e.learning_rate, "LMS learning rate")->capture_default_str();
  cmd->add_option("--epochs", f.run.epochs, "LMS epochs")->capture_default_str();
  cmd->add_option("--lambda", e.ridge_lambda, "Ridge coefficient for the readout")->capture_default_str();
  cmd->add_option("--drive-steps", e.drive_steps, "Reservoir updates per record")->capture_default_str();
  cmd->add_option("--input-bias", e.input_bias, "Half-width of the reservoir unit biases")->capture_default_str();
  cmd->add_option("--readout", f.readout, "ridge | lms")->capture_default_str();
  cmd->add_option("--threshold", f.run.threshold, "Classification threshold (ties positive)")->capture_default_str();
  cmd->add_option("--threads", f.run.threads, "Worker threads for CV folds")->capture_default_str();
}

void finish(Flags& f, bool need_source) {
  auto& r = f.run;
  r.label = f.label;
  r.model = echoclf::parse_model_kind(f.model);
  r.readout = echoclf::parse_readout(f.readout);
  if (!f.alphas.empty()) {
    r.alphas = f.alphas;
  }
  if (f.synth.use) {
    r.source = f.synth.spec();
  } else if (!f.input.empty()) {
    r.source = f.input;
  } else if (need_source) {
    throw echoclf::InvalidArgument("give exactly one of --input or --synth");
  }
}

void print_written(const std::vector<std::string>& files) {
  for (const auto& p : files) {
    std::cout << "wrote " << p << '\n';
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Echo state network and logistic regression classification toolkit"};
  app.set_config("--config", "", "Key-value config file (TOML/INI); command-line flags override it");
  app.require_subcommand(1);

  Flags f;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with planted ground truth");
  add_common(synth, f);
  add_synth_spec(synth, f);

  auto* select = app.add_subcommand("select", "Backward feature selection at each --alpha");
  add_common(select, f);
  add_source(select, f);
  add_synth_spec(select, f);
  select->add_option("--alpha", f.alphas, "Significance level (repeatable)");

  auto* fit = app.add_subcommand("fit", "Fit logistic and/or ESN models on the whole dataset");
  add_common(fit, f);
  add_source(fit, f);
  add_synth_spec(fit, f);
  add_model_flags(fit, f);
  fit->add_option("--features", f.run.features_file, "Surviving-features list from `select`");

  auto* compare = app.add_subcommand("compare", "Cross-validated comparison of logistic regression and the ESN");
  add_common(compare, f);
  add_source(compare, f);
  add_synth_spec(compare, f);
  add_model_flags(compare, f);

  auto* roc = app.add_subcommand("roc", "ROC points and SVG for a fitted model, or re-plot a points file");
  add_common(roc, f);
  add_source(roc, f);
  add_synth_spec(roc, f);
  roc->add_option("--model-file", f.run.model_path, "Model artifact written by `fit`");
  roc->add_option("--points", f.run.points_path, "Existing roc_*.csv to re-plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid_config;
  }

  try {
    std::vector<std::string> written;
    if (synth->parsed()) {
      f.synth.use = true;
      finish(f, true);
      written = echoclf::cmd_synth(f.run);
    } else if (select->parsed()) {
      finish(f, true);
      written = echoclf::cmd_select(f.run);
    } else if (fit->parsed()) {
      finish(f, true);
      written = echoclf::cmd_fit(f.run);
    } else if (compare->parsed()) {
      finish(f, true);
      auto result = echoclf::cmd_compare(f.run);
      written = result.written;
    } else if (roc->parsed()) {
      finish(f, f.run.points_path.empty());
      written = echoclf::cmd_roc(f.run);
    }
    print_written(written);
    return ok;
  } catch (const echoclf::InvalidArgument& e) {
    std::cerr << "echoclf: invalid configuration: " << e.what() << '\n';
    return invalid_config;
  } catch (const echoclf::DataError& e) {
    std::cerr << "echoclf: data error: " << e.what() << '\n';
    return load_error;
  } catch (const echoclf::IoError& e) {
    std::cerr << "echoclf: i/o error: " << e.what() << '\n';
    return load_error;
  } catch (const echoclf::NumericError& e) {
    std::cerr << "echoclf: fit error: " << e.what() << '\n';
    return fit_error;
  } catch (const std::exception& e) {
    std::cerr << "echoclf: " << e.what() << '\n';
    return other;
  }
}
