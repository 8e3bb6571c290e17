#pragma once

// Backward elimination driven by Wald p-values.

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "echoclf/csv.hpp"
#include "echoclf/dataio.hpp"
#include "echoclf/glm.hpp"

namespace echoclf {

struct EliminationStep {
  std::string predictor;
  double p_value = 1.0;
  std::size_t model_size_after = 0;
};

struct SelectionTrace {
  double alpha = 0.05;
  std::vector<std::string> initial;
  std::vector<EliminationStep> steps;
  std::vector<std::string> surviving;
  // Every predictor was eliminated; only the intercept is left.
  bool intercept_only = false;
};

// A refit failed part-way through; the trace up to that point is attached.
class SelectionError : public NumericError {
public:
  SelectionError(const std::string& what, SelectionTrace partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const SelectionTrace& partial() const noexcept { return partial_; }

private:
  SelectionTrace partial_;
};

/// Classic backward stepwise selection. Fit, and while some predictor has a
/// Wald p-value above alpha, drop the one with the largest p-value (ties go to
/// the lexicographically first name) and refit. The intercept is never a
/// candidate. The elimination order does not depend on alpha, so a smaller
/// alpha only continues further down the same path.
inline SelectionTrace backward_select(const Dataset& data, double alpha, const LogisticOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("backward_select: alpha must lie in (0, 1)");
  }
  if (data.cols() < 1) {
    throw InvalidArgument("backward_select: need at least one predictor");
  }
  SelectionTrace trace;
  trace.alpha = alpha;
  trace.initial = data.feature_names;
  std::vector<std::string> current = data.feature_names;

  while (!current.empty()) {
    LogisticFit fit;
    try {
      fit = fit_logistic(data.select_columns(current), opt);
    } catch (const Error& e) {
      trace.surviving = current;
      throw SelectionError(std::string("backward_select: refit with ") + std::to_string(current.size()) +
                               " predictors failed: " + e.what(),
                           std::move(trace));
    }
    const auto rows = wald_stats(fit);
    std::size_t worst = 0;
    double worst_p = -1.0;
    for (std::size_t j = 1; j < rows.size(); ++j) {
      const double pv = rows[j].p_value;
      if (pv > worst_p || (pv == worst_p && rows[j].predictor < rows[worst].predictor)) {
        worst = j;
        worst_p = pv;
      }
    }
    if (worst_p <= alpha) {
      break;
    }
    current.erase(std::find(current.begin(), current.end(), rows[worst].predictor));
    trace.steps.push_back({rows[worst].predictor, worst_p, current.size()});
  }
  trace.surviving = current;
  trace.intercept_only = current.empty();
  return trace;
}

// Re-applies the recorded eliminations to the initial set.
inline std::vector<std::string> replay(const SelectionTrace& trace) {
  std::vector<std::string> names = trace.initial;
  for (const auto& s : trace.steps) {
    const auto it = std::find(names.begin(), names.end(), s.predictor);
    if (it == names.end()) {
      throw InvalidArgument("replay: '" + s.predictor + "' eliminated twice or never present");
    }
    names.erase(it);
  }
  return names;
}

inline void write_trace_csv(const SelectionTrace& trace, std::ostream& out) {
  out << "step,predictor,p_value,model_size_after\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << (i + 1) << ',' << s.predictor << ',' << format_double(s.p_value) << ',' << s.model_size_after << '\n';
  }
}

// One surviving predictor name per line.
inline void write_feature_list(const std::vector<std::string>& names, std::ostream& out) {
  for (const auto& n : names) {
    out << n << '\n';
  }
}

inline std::vector<std::string> read_feature_list(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty() && t.front() != '#') {
      names.emplace_back(t);
    }
  }
  return names;
}

} // namespace echoclf
