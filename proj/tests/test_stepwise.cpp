#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "echoclf/dataio.hpp"
#include "echoclf/stepwise.hpp"

using namespace echoclf;

namespace {

SynthData corpus(std::uint64_t seed, std::size_t n = 2000) {
  SynthSpec s;
  s.n = n;
  s.p_informative = 5;
  s.p_noise = 15;
  s.seed = seed;
  return synth_generate(s);
}

bool contains_all(const std::vector<std::string>& have, const std::vector<std::string>& want) {
  return std::all_of(want.begin(), want.end(),
                     [&](const auto& w) { return std::find(have.begin(), have.end(), w) != have.end(); });
}

} // namespace

TEST(BackwardSelect, AllSignificantMeansNoEliminations) {
  SynthSpec s;
  s.n = 2000;
  s.p_informative = 3;
  s.p_noise = 0;
  s.planted_beta = {1.0, -1.0, 1.5};
  s.seed = 3;
  const auto sd = synth_generate(s);
  const auto t = backward_select(sd.data, 0.05);
  EXPECT_TRUE(t.steps.empty());
  EXPECT_EQ(t.surviving, sd.data.feature_names);
  EXPECT_FALSE(t.intercept_only);
}

TEST(BackwardSelect, SinglePredictorSignificant) {
  SynthSpec s;
  s.n = 500;
  s.p_informative = 1;
  s.p_noise = 0;
  s.planted_beta = {2.0};
  const auto t = backward_select(synth_generate(s).data, 0.05);
  EXPECT_TRUE(t.steps.empty());
  EXPECT_EQ(t.surviving.size(), 1u);
}

TEST(BackwardSelect, PureNoiseCanCollapseToInterceptOnly) {
  SynthSpec s;
  s.n = 400;
  s.p_informative = 0;
  s.p_noise = 2;
  s.planted_beta = {};
  s.seed = 1;
  const auto t = backward_select(synth_generate(s).data, 1e-6);
  EXPECT_TRUE(t.intercept_only);
  EXPECT_TRUE(t.surviving.empty());
  EXPECT_EQ(t.steps.size(), 2u);
}

TEST(BackwardSelect, RecoversInformativePredictors) {
  int ok = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto sd = corpus(s);
    if (contains_all(backward_select(sd.data, 0.05).surviving, sd.truth.informative)) {
      ++ok;
    }
  }
  EXPECT_GE(ok, 18);
}

TEST(BackwardSelect, StricterLevelKeepsSubset) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto sd = corpus(s);
    const auto loose = backward_select(sd.data, 0.05);
    const auto strict = backward_select(sd.data, 0.01);
    EXPECT_TRUE(contains_all(loose.surviving, strict.surviving)) << "seed " << s;
  }
}

TEST(BackwardSelect, TraceInvariants) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto sd = corpus(s, 800);
    const auto t = backward_select(sd.data, 0.05);
    EXPECT_EQ(replay(t), t.surviving);
    EXPECT_LE(t.steps.size(), sd.data.cols());
    std::set<std::string> all(t.surviving.begin(), t.surviving.end());
    for (const auto& step : t.steps) {
      EXPECT_GT(step.p_value, 0.05);
      EXPECT_TRUE(all.insert(step.predictor).second) << "eliminated twice: " << step.predictor;
    }
    EXPECT_EQ(all, std::set<std::string>(sd.data.feature_names.begin(), sd.data.feature_names.end()));
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      EXPECT_EQ(t.steps[i].model_size_after, sd.data.cols() - i - 1);
    }
  }
}

TEST(BackwardSelect, Deterministic) {
  const auto sd = corpus(4, 800);
  const auto a = backward_select(sd.data, 0.05);
  const auto b = backward_select(sd.data, 0.05);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].predictor, b.steps[i].predictor);
    EXPECT_EQ(a.steps[i].p_value, b.steps[i].p_value);
  }
  EXPECT_EQ(a.surviving, b.surviving);
}

TEST(BackwardSelect, RejectsBadArguments) {
  const auto sd = corpus(1, 200);
  EXPECT_THROW(backward_select(sd.data, 0.0), InvalidArgument);
  EXPECT_THROW(backward_select(sd.data, 1.0), InvalidArgument);
  EXPECT_THROW(backward_select(sd.data.select_columns({}), 0.05), InvalidArgument);
}

TEST(BackwardSelect, FailureCarriesPartialTrace) {
  Dataset d;
  d.feature_names = {"sep", "noise"};
  d.features = Matrix(8, 2);
  d.features << -4, 0.3, -3, -0.1, -2, 0.5, -1, -0.7, 1, 0.2, 2, -0.4, 3, 0.9, 4, -0.2;
  d.labels = Vector(8);
  d.labels << 0, 0, 0, 0, 1, 1, 1, 1;
  try {
    backward_select(d, 0.05);
    FAIL() << "expected SelectionError";
  } catch (const SelectionError& e) {
    EXPECT_EQ(e.partial().initial, d.feature_names);
    EXPECT_EQ(e.partial().surviving, d.feature_names);
  }
}

TEST(FeatureList, RoundTripSkipsCommentsAndBlanks) {
  std::ostringstream os;
  write_feature_list({"a", "b c", "d"}, os);
  std::istringstream in("# survivors\n" + os.str() + "\n\n");
  EXPECT_EQ(read_feature_list(in), (std::vector<std::string>{"a", "b c", "d"}));
}

TEST(TraceCsv, Format) {
  SelectionTrace t;
  t.initial = {"a", "b"};
  t.steps = {{"b", 0.5, 1}};
  t.surviving = {"a"};
  std::ostringstream os;
  write_trace_csv(t, os);
  EXPECT_EQ(os.str(), "step,predictor,p_value,model_size_after\n1,b,0.5,1\n");
}
