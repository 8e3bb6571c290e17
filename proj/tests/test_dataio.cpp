#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "echoclf/dataio.hpp"

using namespace echoclf;

TEST(LoadCsv, DropsMalformedRow) {
  std::istringstream in("a,b,label\n1,2,0\n3,oops,1\n5,6,1\n");
  const auto loaded = load_csv(in, "label");
  EXPECT_EQ(loaded.data.rows(), 2u);
  EXPECT_EQ(loaded.report.source_rows, 3u);
  EXPECT_EQ(loaded.report.kept_rows, 2u);
  EXPECT_EQ(loaded.report.dropped_rows(), 1u);
  ASSERT_EQ(loaded.report.dropped_lines.size(), 1u);
  EXPECT_EQ(loaded.report.dropped_lines[0], 3u);
  EXPECT_EQ(loaded.data.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(loaded.data.features(1, 0), 5.0);
  EXPECT_NE(loaded.report.to_text().find("dropped"), std::string::npos);
}

TEST(LoadCsv, MissingAndShortCellsDrop) {
  std::istringstream in("a,b,label\n1,,0\n1,2\n,,\n7,8,1\n");
  const auto loaded = load_csv(in, "label");
  EXPECT_EQ(loaded.data.rows(), 1u);
  EXPECT_EQ(loaded.report.dropped_rows() + loaded.report.kept_rows, loaded.report.source_rows);
}

TEST(LoadCsv, NonFiniteCellsDrop) {
  std::istringstream in("a,label\nnan,0\ninf,1\n2,1\n");
  const auto loaded = load_csv(in, "label");
  EXPECT_EQ(loaded.data.rows(), 1u);
  EXPECT_TRUE(loaded.data.features.allFinite());
}

TEST(LoadCsv, LabelTwoIsHardErrorNamingLine) {
  std::istringstream in("a,label\n1,0\n2,2\n");
  try {
    load_csv(in, "label");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, SchemaErrors) {
  std::istringstream missing("a,b\n1,0\n");
  EXPECT_THROW(load_csv(missing, "label"), DataError);
  std::istringstream dup("a,a,label\n1,2,0\n");
  EXPECT_THROW(load_csv(dup, "label"), DataError);
  std::istringstream none("a,label\nx,0\n");
  EXPECT_THROW(load_csv(none, "label"), DataError);
  EXPECT_THROW(load_csv(std::string("/nonexistent/file.csv"), "label"), IoError);
}

TEST(LoadCsv, LabelColumnAnywhereAndCrlf) {
  std::istringstream in("y,a\r\n1,0.5\r\n0,-0.5\r\n");
  const auto loaded = load_csv(in, "y");
  EXPECT_EQ(loaded.data.feature_names, (std::vector<std::string>{"a"}));
  EXPECT_EQ(loaded.data.labels(0), 1.0);
  EXPECT_EQ(loaded.data.features(1, 0), -0.5);
}

TEST(SaveCsv, BitExactRoundTrip) {
  SynthSpec s;
  s.n = 200;
  s.seed = 12;
  const Dataset d = synth_generate(s).data;
  std::stringstream ss;
  save_csv(d, ss);
  const auto back = load_csv(ss, "label");
  EXPECT_EQ(back.data.feature_names, d.feature_names);
  EXPECT_TRUE(back.data.features == d.features);
  EXPECT_TRUE(back.data.labels == d.labels);
}

TEST(SaveCsv, ExtremeValuesRoundTrip) {
  Dataset d;
  d.feature_names = {"x"};
  d.features = Matrix(4, 1);
  d.features << 1e-300, -1.7976931348623157e308, 0.1, 4.9406564584124654e-324;
  d.labels = Vector::Zero(4);
  std::stringstream ss;
  save_csv(d, ss);
  EXPECT_TRUE(load_csv(ss, "label").data.features == d.features);
}

TEST(Standardize, SimpleColumn) {
  Dataset d;
  d.feature_names = {"x"};
  d.features = Matrix(3, 1);
  d.features << 1, 2, 3;
  d.labels = Vector::Zero(3);
  const Dataset z = standardize(d);
  EXPECT_NEAR(z.features(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(z.features(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(z.features(2, 0), 1.0, 1e-15);
  ASSERT_TRUE(z.standardization.has_value());
  EXPECT_EQ(z.standardization->mean(0), 2.0);
}

TEST(Standardize, TrainingColumnsAreUnitScale) {
  SynthSpec s;
  s.n = 500;
  s.seed = 2;
  Dataset d = synth_generate(s).data;
  d.features = (d.features * 3.7).array() + 11.0;
  const Dataset z = standardize(d);
  for (Eigen::Index j = 0; j < z.features.cols(); ++j) {
    const auto c = z.features.col(j);
    const double mean = c.mean();
    const double sd = std::sqrt((c.array() - mean).square().sum() / (c.size() - 1));
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_LT(std::abs(sd - 1.0), 1e-10);
  }
}

TEST(Standardize, TestDataUsesTrainingParameters) {
  Dataset train;
  train.feature_names = {"x"};
  train.features = Matrix(3, 1);
  train.features << 0, 2, 4;
  train.labels = Vector::Zero(3);
  Dataset test = train;
  test.features << 10, 10, 12;
  const auto st = fit_standardization(train);
  const Dataset z = apply_standardization(test, st);
  EXPECT_NEAR(z.features(0, 0), (10.0 - 2.0) / 2.0, 1e-15);
  EXPECT_NEAR(z.features(2, 0), (12.0 - 2.0) / 2.0, 1e-15);
}

TEST(Standardize, ReapplyingStoredParametersIsIdempotent) {
  SynthSpec s;
  s.n = 100;
  s.seed = 5;
  const Dataset d = synth_generate(s).data;
  const auto st = fit_standardization(d);
  const Dataset once = apply_standardization(d, st);
  const Dataset again = apply_standardization(once, fit_standardization(once));
  EXPECT_LT((again.features - once.features).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, ConstantColumnIsNamed) {
  Dataset d;
  d.feature_names = {"ok", "flat"};
  d.features = Matrix(3, 2);
  d.features << 1, 5, 2, 5, 3, 5;
  d.labels = Vector::Zero(3);
  try {
    standardize(d);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
}

TEST(Synth, Deterministic) {
  SynthSpec s;
  s.nonlinearity = Nonlinearity::interaction;
  s.label_noise = 0.1;
  const auto a = synth_generate(s);
  const auto b = synth_generate(s);
  EXPECT_TRUE(a.data.features == b.data.features);
  EXPECT_TRUE(a.data.labels == b.data.labels);
  s.seed = 2;
  EXPECT_FALSE(synth_generate(s).data.features == a.data.features);
}

TEST(Synth, ShapeAndTruth) {
  SynthSpec s;
  s.n = 50;
  s.p_informative = 3;
  s.p_noise = 9;
  s.planted_beta = {1, 2, 3};
  const auto sd = synth_generate(s);
  EXPECT_EQ(sd.data.rows(), 50u);
  EXPECT_EQ(sd.data.cols(), 12u);
  EXPECT_EQ(sd.truth.informative, (std::vector<std::string>{"f01", "f02", "f03"}));
  EXPECT_EQ(sd.truth.noise.size(), 9u);
  EXPECT_EQ(sd.data.feature_names.back(), "f12");
}

TEST(Synth, SaturatedLabelsFollowSign) {
  SynthSpec s;
  s.n = 1000;
  s.p_informative = 2;
  s.p_noise = 1;
  s.planted_beta = {1e3, -1e3};
  s.seed = 8;
  const auto sd = synth_generate(s);
  for (Eigen::Index i = 0; i < sd.data.features.rows(); ++i) {
    const double score = 1e3 * sd.data.features(i, 0) - 1e3 * sd.data.features(i, 1);
    if (std::abs(score) > 50.0) {
      EXPECT_EQ(sd.data.labels(i), score > 0 ? 1.0 : 0.0) << "row " << i;
    }
  }
}

TEST(Synth, FairCoin) {
  SynthSpec s;
  s.n = 2000;
  s.p_informative = 0;
  s.p_noise = 3;
  s.planted_beta = {};
  s.seed = 4;
  const double mean = synth_generate(s).data.labels.mean();
  EXPECT_LE(std::abs(mean - 0.5), 3.0 * std::sqrt(0.25 / 2000.0));
}

TEST(Synth, LabelNoiseFlipsAboutTheRightFraction) {
  SynthSpec s;
  s.n = 4000;
  s.p_informative = 1;
  s.p_noise = 0;
  s.planted_beta = {1e3};
  s.label_noise = 0.2;
  s.seed = 6;
  const auto sd = synth_generate(s);
  double flips = 0.0;
  for (Eigen::Index i = 0; i < sd.data.features.rows(); ++i) {
    flips += sd.data.labels(i) != (sd.data.features(i, 0) > 0 ? 1.0 : 0.0);
  }
  EXPECT_NEAR(flips / 4000.0, 0.2, 3.0 * std::sqrt(0.16 / 4000.0) + 0.005);
}

TEST(Synth, RejectsBadSpec) {
  SynthSpec s;
  s.planted_beta = {1.0};
  EXPECT_THROW(synth_generate(s), InvalidArgument);
  s = SynthSpec{};
  s.label_noise = 0.5;
  EXPECT_THROW(synth_generate(s), InvalidArgument);
  EXPECT_THROW(parse_nonlinearity("cubic"), InvalidArgument);
}

TEST(GroundTruth, SidecarMatchesSpec) {
  SynthSpec s;
  s.planted_alpha = -0.25;
  s.nonlinearity = Nonlinearity::interaction;
  const auto sd = synth_generate(s);
  std::stringstream ss;
  save_ground_truth(sd.truth, ss);
  const auto t = read_csv_table(ss);
  EXPECT_EQ(t.header, (std::vector<std::string>{"term", "column", "value"}));
  EXPECT_EQ(t.rows[0][0], "intercept");
  EXPECT_EQ(parse_double(t.rows[0][2]).value(), -0.25);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(t.rows[j + 1][1], sd.truth.informative[j]);
    EXPECT_EQ(parse_double(t.rows[j + 1][2]).value(), s.planted_beta[j]);
  }
  EXPECT_EQ(t.rows[6][0], "interaction");
}
