#pragma once

// Command bodies behind the echoclf CLI: synth, select, fit, compare, roc.
// Each command reads a RunConfig, writes its files into the output directory
// and returns the paths it wrote.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "echoclf/csv.hpp"
#include "echoclf/dataio.hpp"
#include "echoclf/error.hpp"
#include "echoclf/glm.hpp"
#include "echoclf/metrics.hpp"
#include "echoclf/numkit.hpp"
#include "echoclf/plot.hpp"
#include "echoclf/reservoir.hpp"
#include "echoclf/serialize.hpp"
#include "echoclf/stepwise.hpp"

namespace echoclf {

enum class ModelKind { logit, esn, both };
enum class ReadoutTraining { ridge, lms };

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "logit") {
    return ModelKind::logit;
  }
  if (s == "esn") {
    return ModelKind::esn;
  }
  if (s == "both") {
    return ModelKind::both;
  }
  throw InvalidArgument("unknown model '" + std::string(s) + "' (expected logit, esn or both)");
}

inline ReadoutTraining parse_readout(std::string_view s) {
  if (s == "ridge") {
    return ReadoutTraining::ridge;
  }
  if (s == "lms") {
    return ReadoutTraining::lms;
  }
  throw InvalidArgument("unknown readout '" + std::string(s) + "' (expected ridge or lms)");
}

struct RunConfig {
  // Either a CSV path or a synthetic spec (generated in memory). Exactly one.
  std::variant<std::monostate, std::string, SynthSpec> source;
  std::string label = "label";
  ModelKind model = ModelKind::both;
  std::vector<double> alphas{0.05, 0.01};
  std::size_t folds = 10;
  EsnConfig esn;
  ReadoutTraining readout = ReadoutTraining::ridge;
  std::size_t epochs = default_lms_epochs;
  LogisticOptions logistic;
  double threshold = 0.5;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t threads = 1;
  // fit: optional surviving-features list restricting the columns.
  std::string features_file;
  // roc: a model artifact to score the source with, or a points file to re-plot.
  std::string model_path;
  std::string points_path;
};

inline void validate(const RunConfig& c) {
  if (c.folds < 2) {
    throw InvalidArgument("folds must be >= 2");
  }
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) {
    throw InvalidArgument("threshold must lie in (0, 1)");
  }
  for (double a : c.alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw InvalidArgument("alpha " + format_short(a) + " is outside (0, 1)");
    }
  }
  if (c.epochs < 1) {
    throw InvalidArgument("epochs must be >= 1");
  }
  EsnConfig probe = c.esn;
  probe.input_dim = 1;
  validate(probe);
}

// Sub-seeds. The synthetic generator, fold assignment and reservoir draw each
// get derive_seed(master, stream) with the streams named in numkit.
inline std::uint64_t synth_seed(const RunConfig& c) { return derive_seed(c.seed, seed_stream::synth); }
inline std::uint64_t fold_seed(const RunConfig& c) { return derive_seed(c.seed, seed_stream::folds); }
inline std::uint64_t reservoir_seed(const RunConfig& c) { return derive_seed(c.seed, seed_stream::reservoir); }

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
}

template <class Fn>
std::string write_file(const std::string& dir, const std::string& name, Fn&& body) {
  const auto path = join_path(dir, name);
  auto out = open_output(path);
  body(out);
  out.flush();
  if (!out) {
    throw IoError("failed writing '" + path + "'");
  }
  return path;
}

inline std::string alpha_tag(double a) { return format_short(a); }

inline std::string ci_label(double a) { return format_short((1.0 - a) * 100.0) + "%"; }

} // namespace detail

struct LoadedSource {
  Dataset data;
  std::optional<LoadReport> report;
};

inline LoadedSource load_source(const RunConfig& c) {
  if (const auto* path = std::get_if<std::string>(&c.source)) {
    auto loaded = load_csv(*path, c.label);
    return {std::move(loaded.data), std::move(loaded.report)};
  }
  if (const auto* spec = std::get_if<SynthSpec>(&c.source)) {
    SynthSpec s = *spec;
    s.seed = synth_seed(c);
    return {synth_generate(s).data, std::nullopt};
  }
  throw InvalidArgument("no data source: give an input CSV or a synthetic spec");
}

// ---------------------------------------------------------------------------
// synth

inline std::vector<std::string> cmd_synth(const RunConfig& c) {
  validate(c);
  const auto* spec = std::get_if<SynthSpec>(&c.source);
  if (!spec) {
    throw InvalidArgument("synth needs a synthetic spec");
  }
  SynthSpec s = *spec;
  s.seed = synth_seed(c);
  const SynthData sd = synth_generate(s);
  detail::ensure_dir(c.out_dir);
  return {detail::write_file(c.out_dir, "data.csv", [&](std::ostream& o) { save_csv(sd.data, o, c.label); }),
          detail::write_file(c.out_dir, "ground_truth.csv", [&](std::ostream& o) { save_ground_truth(sd.truth, o); })};
}

// ---------------------------------------------------------------------------
// select

inline std::vector<std::string> cmd_select(const RunConfig& c) {
  validate(c);
  if (c.alphas.empty()) {
    throw InvalidArgument("select needs at least one alpha");
  }
  const auto src = load_source(c);
  detail::ensure_dir(c.out_dir);
  std::vector<std::string> written;
  if (src.report) {
    written.push_back(detail::write_file(c.out_dir, "load_report.txt", [&](std::ostream& o) { o << src.report->to_text(); }));
  }
  const Dataset data = standardize(src.data);
  std::optional<std::string> failure;
  for (double a : c.alphas) {
    const auto tag = detail::alpha_tag(a);
    SelectionTrace trace;
    try {
      trace = backward_select(data, a, c.logistic);
    } catch (const SelectionError& e) {
      trace = e.partial();
      if (!failure) {
        failure = e.what();
      }
    }
    written.push_back(detail::write_file(c.out_dir, "trace_" + tag + ".csv", [&](std::ostream& o) { write_trace_csv(trace, o); }));
    written.push_back(detail::write_file(c.out_dir, "survivors_" + tag + ".txt",
                                         [&](std::ostream& o) { write_feature_list(trace.surviving, o); }));
    if (!failure) {
      const auto fit = fit_logistic(data.select_columns(trace.surviving), c.logistic);
      written.push_back(
          detail::write_file(c.out_dir, "wald_" + tag + ".csv", [&](std::ostream& o) { write_wald_csv(wald_stats(fit), o); }));
    }
  }
  if (failure) {
    throw NumericError(*failure + " (partial traces written to " + c.out_dir + ")");
  }
  return written;
}

// ---------------------------------------------------------------------------
// Model artifacts: feature names, standardization and the model body.

struct ModelArtifact {
  std::string kind; // "logit" or "esn"
  std::vector<std::string> feature_names;
  Standardization standardization;
  std::optional<LogisticFit> logistic;
  std::optional<EsnModel> esn;

  Vector score(const Dataset& d) const {
    const Dataset x = apply_standardization(d.select_columns(feature_names), standardization);
    if (logistic) {
      return predict_proba(*logistic, x.features);
    }
    return score_esn(*esn, x.features);
  }
};

inline void save_artifact(const ModelArtifact& a, std::ostream& out) {
  out << "echoclf-model 1\n"
      << "kind " << a.kind << '\n'
      << "features " << a.feature_names.size() << '\n';
  for (const auto& n : a.feature_names) {
    out << n << '\n';
  }
  textio::write_matrix(out, "mean", a.standardization.mean.transpose());
  textio::write_matrix(out, "sd", a.standardization.sd.transpose());
  if (a.logistic) {
    save_logistic(*a.logistic, out);
  } else {
    save_esn(*a.esn, out);
  }
}

inline ModelArtifact load_artifact(std::istream& in) {
  ModelArtifact a;
  {
    textio::Reader r(in);
    if (r.expect("echoclf-model", 1)[1] != "1") {
      r.fail("unsupported model artifact version");
    }
    a.kind = r.string_value("kind");
    const std::size_t p = r.count("features");
    for (std::size_t i = 0; i < p; ++i) {
      a.feature_names.push_back(r.raw_line());
    }
    const Matrix mean = r.matrix("mean");
    const Matrix sd = r.matrix("sd");
    if (mean.rows() != 1 || sd.rows() != 1 || static_cast<std::size_t>(mean.cols()) != p ||
        static_cast<std::size_t>(sd.cols()) != p) {
      r.fail("standardization length disagrees with the feature list");
    }
    a.standardization = {mean.row(0).transpose(), sd.row(0).transpose()};
  }
  if (a.kind == "logit") {
    a.logistic = load_logistic(in, a.feature_names);
  } else if (a.kind == "esn") {
    a.esn = load_esn(in);
    if (a.esn->input_dim() != a.feature_names.size()) {
      throw DataError("model artifact: esn input_dim disagrees with the feature list");
    }
  } else {
    throw DataError("model artifact: unknown kind '" + a.kind + "'");
  }
  return a;
}

inline ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  return load_artifact(in);
}

namespace detail {

inline EsnModel train_esn(const RunConfig& c, const Dataset& standardized) {
  EsnConfig ec = c.esn;
  ec.input_dim = standardized.cols();
  ec.seed = reservoir_seed(c);
  const EsnModel m = init_esn(ec);
  return c.readout == ReadoutTraining::ridge ? train_ridge(m, standardized) : train_lms(m, standardized, c.epochs);
}

inline ModelArtifact fit_artifact(const RunConfig& c, const Dataset& raw, bool esn) {
  ModelArtifact a;
  a.kind = esn ? "esn" : "logit";
  a.feature_names = raw.feature_names;
  a.standardization = fit_standardization(raw);
  const Dataset x = apply_standardization(raw, a.standardization);
  if (esn) {
    a.esn = train_esn(c, x);
  } else {
    a.logistic = fit_logistic(x, c.logistic);
  }
  return a;
}

inline bool wants_logit(const RunConfig& c) { return c.model != ModelKind::esn; }
inline bool wants_esn(const RunConfig& c) { return c.model != ModelKind::logit; }

} // namespace detail

// ---------------------------------------------------------------------------
// fit

inline std::vector<std::string> cmd_fit(const RunConfig& c) {
  validate(c);
  auto src = load_source(c);
  Dataset data = src.data;
  if (!c.features_file.empty()) {
    std::ifstream in(c.features_file);
    if (!in) {
      throw IoError("cannot open features file '" + c.features_file + "'");
    }
    data = data.select_columns(read_feature_list(in));
  }
  detail::ensure_dir(c.out_dir);
  std::vector<std::string> written;
  std::ostringstream summary;
  summary << "Training-set fit (" << data.rows() << " rows, " << data.cols() << " features)\n";
  for (bool esn : {false, true}) {
    if (esn ? !detail::wants_esn(c) : !detail::wants_logit(c)) {
      continue;
    }
    const ModelArtifact a = detail::fit_artifact(c, data, esn);
    const Vector scores = a.score(data);
    summary << a.kind << ": training MSE " << format_fixed(mse(data.labels, scores)) << ", training accuracy "
            << format_fixed(accuracy(data.labels, classify(scores, c.threshold)) * 100.0, 2) << "%\n";
    written.push_back(detail::write_file(c.out_dir, "model_" + a.kind + ".txt", [&](std::ostream& o) { save_artifact(a, o); }));
    if (a.logistic) {
      written.push_back(
          detail::write_file(c.out_dir, "wald.csv", [&](std::ostream& o) { write_wald_csv(wald_stats(*a.logistic), o); }));
    }
  }
  written.push_back(detail::write_file(c.out_dir, "fit_summary.txt", [&](std::ostream& o) { o << summary.str(); }));
  return written;
}

// ---------------------------------------------------------------------------
// compare

struct CompareRow {
  std::string id;    // e.g. "logit_all", "esn_a0.05"
  std::string model; // "logit" or "esn"
  std::optional<double> alpha;
  std::size_t independent_variables = 0;
  double training_mse = 0.0;
  CvReport cv;
  RocCurve roc;
  ConfusionMatrix holdout; // designated hold-out fold 0
  std::string error;       // non-empty when this configuration failed
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<std::string> written;
};

namespace detail {

// Standardize with training parameters, optionally select, then fit and score.
inline Trainer make_trainer(const RunConfig& c, bool esn, std::optional<double> alpha) {
  return [c, esn, alpha](const Dataset& train, const Dataset& test) -> Vector {
    const Standardization st = fit_standardization(train);
    Dataset tr = apply_standardization(train, st);
    Dataset te = apply_standardization(test, st);
    if (alpha) {
      const auto names = backward_select(tr, *alpha, c.logistic).surviving;
      tr = tr.select_columns(names);
      te = te.select_columns(names);
    }
    if (esn) {
      return score_esn(train_esn(c, tr), te.features);
    }
    return predict_proba(fit_logistic(tr, c.logistic), te.features);
  };
}

inline void write_report(const RunConfig& c, const Dataset& data, const std::vector<CompareRow>& rows, std::ostream& o) {
  o << "Model comparison: " << data.rows() << " rows, " << data.cols() << " candidate features, " << c.folds
    << "-fold cross-validation, threshold " << format_short(c.threshold) << ", seed " << c.seed << "\n\n";

  o << "Hold-out summary\n";
  o << "Configuration        Training MSE  Testing MSE  Predictive Accuracy\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      continue;
    }
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %12s %12s %19s%%\n", r.id.c_str(), format_fixed(r.training_mse).c_str(),
                  format_fixed(r.cv.avg_mse).c_str(), format_fixed(r.cv.mean_accuracy * 100.0, 2).c_str());
    o << line;
  }

  o << "\nCross-validation results\n";
  o << "Configuration        Independent variables  Avg MSE  Standard Deviation    Variance  Mean Accuracy  CI\n";
  for (const auto& r : rows) {
    char line[200];
    if (!r.error.empty()) {
      std::snprintf(line, sizeof line, "%-20s failed: %s\n", r.id.c_str(), r.error.c_str());
      o << line;
      continue;
    }
    char variance[32];
    std::snprintf(variance, sizeof variance, "%.4e", r.cv.variance);
    std::snprintf(line, sizeof line, "%-20s %21zu  %7s  %18s  %10s  %12s%%  %s\n", r.id.c_str(), r.independent_variables,
                  format_fixed(r.cv.avg_mse).c_str(), format_fixed(r.cv.std_dev).c_str(), variance,
                  format_fixed(r.cv.mean_accuracy * 100.0, 2).c_str(), r.alpha ? ci_label(*r.alpha).c_str() : "-");
    o << line;
  }

  o << "\nConfusion matrices (hold-out fold 0; rows = actual, columns = predicted)\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      continue;
    }
    const auto& m = r.holdout;
    char line[200];
    std::snprintf(line, sizeof line,
                  "%s\n         0      1\n  0 %6zu %6zu\n  1 %6zu %6zu\n  accuracy %s  sensitivity %s  specificity %s\n",
                  r.id.c_str(), m.tn, m.fp, m.fn, m.tp, format_fixed(m.accuracy()).c_str(),
                  m.tp + m.fn ? format_fixed(m.sensitivity()).c_str() : "n/a",
                  m.tn + m.fp ? format_fixed(m.specificity()).c_str() : "n/a");
    o << line;
  }

  o << "\nROC (pooled out-of-fold scores)\n";
  for (const auto& r : rows) {
    if (r.error.empty()) {
      o << "  " << r.id << ": AUC " << format_fixed(r.roc.auc) << '\n';
    }
  }
}

} // namespace detail

/// k-fold CV of logistic regression and the ESN on all features and on the
/// backward-selected features for every alpha. Selection is rerun inside each
/// training fold. A failing configuration is reported and the others still
/// run; the command then throws after all files are written.
inline CompareResult cmd_compare(const RunConfig& c) {
  validate(c);
  const auto src = load_source(c);
  const Dataset& data = src.data;
  detail::ensure_dir(c.out_dir);
  CompareResult result;
  if (src.report) {
    result.written.push_back(
        detail::write_file(c.out_dir, "load_report.txt", [&](std::ostream& o) { o << src.report->to_text(); }));
  }

  const Dataset standardized = standardize(data);
  std::vector<std::optional<double>> feature_sets{std::nullopt};
  for (double a : c.alphas) {
    feature_sets.emplace_back(a);
  }

  for (bool esn : {false, true}) {
    if (esn ? !detail::wants_esn(c) : !detail::wants_logit(c)) {
      continue;
    }
    for (const auto& alpha : feature_sets) {
      CompareRow row;
      row.model = esn ? "esn" : "logit";
      row.alpha = alpha;
      row.id = row.model + (alpha ? "_a" + detail::alpha_tag(*alpha) : std::string("_all"));
      try {
        Dataset full = standardized;
        if (alpha) {
          full = full.select_columns(backward_select(full, *alpha, c.logistic).surviving);
        }
        row.independent_variables = full.cols();
        const Vector in_sample = esn ? score_esn(detail::train_esn(c, full), full.features)
                                     : predict_proba(fit_logistic(full, c.logistic), full.features);
        row.training_mse = mse(full.labels, in_sample);

        CvOptions opt;
        opt.threshold = c.threshold;
        opt.threads = c.threads;
        row.cv = cross_validate(detail::make_trainer(c, esn, alpha), data, c.folds, fold_seed(c), opt);
        row.roc = roc(data.labels, row.cv.oof_scores);
        const auto& hold = row.cv.folds.front();
        Vector y(static_cast<Eigen::Index>(hold.size()));
        Vector s(static_cast<Eigen::Index>(hold.size()));
        for (std::size_t i = 0; i < hold.size(); ++i) {
          y(static_cast<Eigen::Index>(i)) = data.labels(static_cast<Eigen::Index>(hold[i]));
          s(static_cast<Eigen::Index>(i)) = row.cv.oof_scores(static_cast<Eigen::Index>(hold[i]));
        }
        row.holdout = confusion(y, classify(s, c.threshold));
      } catch (const Error& e) {
        row.error = e.what();
      }
      result.rows.push_back(std::move(row));
    }
  }

  auto& w = result.written;
  w.push_back(detail::write_file(c.out_dir, "metrics.csv", [&](std::ostream& o) {
    o << "config,model,alpha,k,independent_variables,training_mse,avg_mse,std_dev,variance,mean_accuracy,auc\n";
    for (const auto& r : result.rows) {
      if (!r.error.empty()) {
        continue;
      }
      o << r.id << ',' << r.model << ',' << (r.alpha ? format_double(*r.alpha) : "") << ',' << r.cv.k << ','
        << r.independent_variables << ',' << format_double(r.training_mse) << ',' << format_double(r.cv.avg_mse) << ','
        << format_double(r.cv.std_dev) << ',' << format_double(r.cv.variance) << ','
        << format_double(r.cv.mean_accuracy) << ',' << format_double(r.roc.auc) << '\n';
    }
  }));
  w.push_back(detail::write_file(c.out_dir, "folds.csv", [&](std::ostream& o) {
    o << "config,fold,n_test,mse,accuracy\n";
    for (const auto& r : result.rows) {
      for (std::size_t f = 0; r.error.empty() && f < r.cv.per_fold.size(); ++f) {
        const auto& pf = r.cv.per_fold[f];
        o << r.id << ',' << f << ',' << pf.n_test << ',' << format_double(pf.mse) << ',' << format_double(pf.accuracy)
          << '\n';
      }
    }
  }));
  for (const auto& r : result.rows) {
    if (!r.error.empty()) {
      continue;
    }
    w.push_back(detail::write_file(c.out_dir, "roc_" + r.id + ".csv", [&](std::ostream& o) { write_roc_csv(r.roc, o); }));
    w.push_back(
        detail::write_file(c.out_dir, "roc_" + r.id + ".svg", [&](std::ostream& o) { write_roc_svg(r.roc, "ROC: " + r.id, o); }));
  }
  w.push_back(detail::write_file(c.out_dir, "report.txt", [&](std::ostream& o) { detail::write_report(c, data, result.rows, o); }));

  std::string failures;
  for (const auto& r : result.rows) {
    if (!r.error.empty()) {
      failures += "\n  " + r.id + ": " + r.error;
    }
  }
  if (!failures.empty()) {
    throw NumericError("compare: some configurations failed (other outputs written)" + failures);
  }
  return result;
}

// ---------------------------------------------------------------------------
// roc

/// With points_path: re-read an ROC points file and re-plot it. Otherwise
/// score the data source with the model artifact at model_path.
inline std::vector<std::string> cmd_roc(const RunConfig& c) {
  validate(c);
  detail::ensure_dir(c.out_dir);
  RocCurve curve;
  std::string name;
  std::vector<std::string> written;
  if (!c.points_path.empty()) {
    curve = read_roc_csv(read_csv_table(c.points_path));
    name = std::filesystem::path(c.points_path).stem().string();
    if (name.rfind("roc_", 0) == 0) {
      name = name.substr(4);
    }
  } else {
    if (c.model_path.empty()) {
      throw InvalidArgument("roc needs --model-file (with a data source) or --points");
    }
    const ModelArtifact a = load_artifact(c.model_path);
    const auto src = load_source(c);
    curve = roc(src.data.labels, a.score(src.data));
    name = a.kind;
    written.push_back(detail::write_file(c.out_dir, "roc_" + name + ".csv", [&](std::ostream& o) { write_roc_csv(curve, o); }));
  }
  written.push_back(
      detail::write_file(c.out_dir, "roc_" + name + ".svg", [&](std::ostream& o) { write_roc_svg(curve, "ROC: " + name, o); }));
  return written;
}

} // namespace echoclf
