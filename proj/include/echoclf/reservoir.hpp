#pragma once

// Echo state network: fixed random input and reservoir weights, a trainable
// linear readout on [state; 1].
//
// Tabular records have no time axis. Each record is encoded by starting from
// the zero state and driving the reservoir with the record's feature vector,
// held constant, for `drive_steps` updates; the final state is the record's
// representation. Records never share state.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "echoclf/dataio.hpp"
#include "echoclf/error.hpp"
#include "echoclf/numkit.hpp"
#include "echoclf/serialize.hpp"

namespace echoclf {

struct EsnConfig {
  std::size_t reservoir_size = 150;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  double spectral_radius = 0.9;
  double density = 0.10;
  double learning_rate = 0.05;
  std::size_t drive_steps = 10;
  double ridge_lambda = 1.0;
  // Reservoir units get a fixed bias drawn uniform on [-input_bias, input_bias].
  // 0 gives the bias-free update tanh(W_in u + W x).
  double input_bias = 0.5;
  // Support of the uniform draws for W_in and (before rescaling) W.
  double weight_low = -0.5;
  double weight_high = 0.5;
  std::uint64_t seed = 1;
};

inline constexpr std::size_t default_lms_epochs = 50;

inline void validate(const EsnConfig& c) {
  if (c.reservoir_size < 1) {
    throw InvalidArgument("esn: reservoir_size must be >= 1");
  }
  if (c.output_dim < 1) {
    throw InvalidArgument("esn: output_dim must be >= 1");
  }
  if (!(c.spectral_radius > 0.0 && c.spectral_radius <= 1.0)) {
    throw InvalidArgument("esn: spectral_radius must lie in (0, 1]");
  }
  if (!(c.density > 0.0 && c.density <= 1.0)) {
    throw InvalidArgument("esn: density must lie in (0, 1]");
  }
  if (!(c.learning_rate > 0.0)) {
    throw InvalidArgument("esn: learning_rate must be > 0");
  }
  if (c.drive_steps < 1) {
    throw InvalidArgument("esn: drive_steps must be >= 1");
  }
  if (!(c.ridge_lambda >= 0.0)) {
    throw InvalidArgument("esn: ridge_lambda must be >= 0");
  }
  if (!(c.input_bias >= 0.0)) {
    throw InvalidArgument("esn: input_bias must be >= 0");
  }
  if (!(c.weight_low < c.weight_high)) {
    throw InvalidArgument("esn: weight_low must be < weight_high");
  }
}

struct EsnModel {
  Matrix w_in;    // N_x x N_u, fixed
  Vector bias_in; // N_x, fixed
  Matrix w;       // N_x x N_x, fixed, rescaled to the target spectral radius
  Matrix w_out;   // N_y x (N_x + 1); last column multiplies the constant 1
  EsnConfig config;

  std::size_t reservoir_size() const { return static_cast<std::size_t>(w.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(w_in.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(w_out.rows()); }
};

struct ReservoirState {
  Vector x;
};

/// Draws W sparse-uniform and rescales it by rho / measured radius, W_in
/// dense-uniform, the unit biases uniform, and zeroes W_out. A reservoir whose
/// measured radius is below 1e-12 is redrawn from a derived seed, at most
/// three times.
inline EsnModel init_esn(const EsnConfig& config) {
  validate(config);
  const std::size_t nx = config.reservoir_size;
  EsnModel model;
  model.config = config;

  bool ok = false;
  for (std::uint64_t attempt = 0; attempt < 3 && !ok; ++attempt) {
    SeededRng rng(derive_seed(config.seed, 10 + attempt));
    Matrix w = sparse_random_matrix(nx, config.density, config.weight_low, config.weight_high, rng);
    PowerIterationOptions pio;
    pio.seed = derive_seed(config.seed, seed_stream::power_iteration);
    const double radius = spectral_radius(w, pio);
    if (radius >= 1e-12) {
      model.w = w * (config.spectral_radius / radius);
      ok = true;
    }
  }
  if (!ok) {
    throw NumericError("init_esn: reservoir matrix is degenerate (spectral radius < 1e-12) after 3 draws; "
                       "increase density or reservoir_size");
  }

  SeededRng in_rng(derive_seed(config.seed, 20));
  model.w_in = dense_random_matrix(nx, config.input_dim, config.weight_low, config.weight_high, in_rng);
  model.bias_in = Vector::Zero(static_cast<Eigen::Index>(nx));
  if (config.input_bias > 0.0) {
    SeededRng bias_rng(derive_seed(config.seed, 30));
    for (Eigen::Index i = 0; i < model.bias_in.size(); ++i) {
      model.bias_in(i) = bias_rng.uniform(-config.input_bias, config.input_bias);
    }
  }
  model.w_out = Matrix::Zero(static_cast<Eigen::Index>(config.output_dim), static_cast<Eigen::Index>(nx + 1));
  return model;
}

namespace detail {

// tanh(t) rounds to +/-1 for |t| > ~19; keep states inside the open interval.
inline double open_tanh(double t) {
  constexpr double edge = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(std::tanh(t), -edge, edge);
}

inline void check_input(const EsnModel& m, Eigen::Index n) {
  if (n != m.w_in.cols()) {
    throw DimensionError("esn: expected " + std::to_string(m.w_in.cols()) + " inputs, got " + std::to_string(n));
  }
}

inline void check_state(const EsnModel& m, Eigen::Index n) {
  if (n != m.w.rows()) {
    throw DimensionError("esn: expected state of length " + std::to_string(m.w.rows()) + ", got " +
                         std::to_string(n));
  }
}

} // namespace detail

// x' = tanh(W_in u + W x + b)
inline ReservoirState update_state(const EsnModel& model, const ReservoirState& state, const Vector& input) {
  detail::check_input(model, input.size());
  detail::check_state(model, state.x.size());
  Vector pre = model.w_in * input + model.w * state.x + model.bias_in;
  return {pre.unaryExpr(&detail::open_tanh)};
}

inline ReservoirState zero_state(const EsnModel& model) { return {Vector::Zero(model.w.rows())}; }

inline ReservoirState encode(const EsnModel& model, const Vector& features) {
  detail::check_input(model, features.size());
  const Vector drive = model.w_in * features + model.bias_in;
  Vector x = Vector::Zero(model.w.rows());
  for (std::size_t t = 0; t < model.config.drive_steps; ++t) {
    x = (drive + model.w * x).unaryExpr(&detail::open_tanh);
  }
  return {x};
}

// Row i holds the encoding of row i of `features`.
inline Matrix encode_all(const EsnModel& model, const Matrix& features) {
  detail::check_input(model, features.cols());
  const Matrix drive = (features * model.w_in.transpose()).rowwise() + model.bias_in.transpose();
  Matrix x = Matrix::Zero(features.rows(), model.w.rows());
  for (std::size_t t = 0; t < model.config.drive_steps; ++t) {
    x = (drive + x * model.w.transpose()).unaryExpr(&detail::open_tanh);
  }
  return x;
}

// y = W_out [x; 1]
inline Vector readout(const EsnModel& model, const ReservoirState& state) {
  detail::check_state(model, state.x.size());
  const Eigen::Index nx = model.w.rows();
  return model.w_out.leftCols(nx) * state.x + model.w_out.col(nx);
}

namespace detail {

inline void check_training_data(const EsnModel& model, const Dataset& data) {
  if (data.rows() == 0) {
    throw DataError("esn: empty training set");
  }
  if (model.output_dim() != 1) {
    throw InvalidArgument("esn: training on binary labels needs output_dim == 1");
  }
  check_input(model, data.features.cols());
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    if (data.labels(i) != 0.0 && data.labels(i) != 1.0) {
      throw DataError("esn: label at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
}

// [S, 1]
inline Matrix augmented_states(const EsnModel& model, const Matrix& features) {
  const Matrix s = encode_all(model, features);
  Matrix z(s.rows(), s.cols() + 1);
  z.leftCols(s.cols()) = s;
  z.col(s.cols()).setOnes();
  return z;
}

} // namespace detail

/// Online least-mean-squares readout training, samples visited in dataset
/// order every epoch: W_out <- W_out + eta (target - y) [s; 1]'.
inline EsnModel train_lms(const EsnModel& model, const Dataset& data, std::size_t epochs = default_lms_epochs) {
  detail::check_training_data(model, data);
  if (epochs < 1) {
    throw InvalidArgument("train_lms: epochs must be >= 1");
  }
  EsnModel out = model;
  const Matrix z = detail::augmented_states(model, data.features);
  const double eta = model.config.learning_rate;
  Eigen::RowVectorXd w = out.w_out.row(0);
  for (std::size_t e = 0; e < epochs; ++e) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double y = w.dot(z.row(i));
      w += eta * (data.labels(i) - y) * z.row(i);
    }
  }
  if (!w.allFinite()) {
    throw NumericError("train_lms: readout diverged; lower the learning rate");
  }
  out.w_out.row(0) = w;
  return out;
}

/// Ridge readout: W_out' = (Z'Z + lambda I)^-1 Z'y with Z = [S, 1]. The bias
/// weight is penalized like the others.
inline EsnModel train_ridge(const EsnModel& model, const Dataset& data) {
  detail::check_training_data(model, data);
  const double lambda = model.config.ridge_lambda;
  if (!(lambda >= 0.0)) {
    throw InvalidArgument("train_ridge: lambda must be >= 0");
  }
  const Matrix z = detail::augmented_states(model, data.features);
  Matrix normal = z.transpose() * z;
  normal.diagonal().array() += lambda;
  Eigen::LDLT<Matrix> ldlt(normal);
  const Vector d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-13 * std::max(1.0, d.maxCoeff()))) {
    throw SingularMatrixError("train_ridge: normal matrix is singular (collinear states); set lambda > 0");
  }
  EsnModel out = model;
  out.w_out.row(0) = ldlt.solve(z.transpose() * data.labels).transpose();
  return out;
}

struct EsnPrediction {
  double score = 0.0; // readout clamped to [0, 1]
  int label = 0;
};

inline EsnPrediction predict_esn(const EsnModel& model, const Vector& features, double threshold = 0.5) {
  if (model.output_dim() != 1) {
    throw InvalidArgument("predict_esn: binary prediction needs output_dim == 1");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidArgument("predict_esn: threshold must lie in (0, 1)");
  }
  const double score = std::clamp(readout(model, encode(model, features))(0), 0.0, 1.0);
  return {score, score >= threshold ? 1 : 0};
}

// Clamped scores for every row.
inline Vector score_esn(const EsnModel& model, const Matrix& features) {
  if (model.output_dim() != 1) {
    throw InvalidArgument("score_esn: binary prediction needs output_dim == 1");
  }
  const Matrix z = detail::augmented_states(model, features);
  return (z * model.w_out.row(0).transpose()).cwiseMax(0.0).cwiseMin(1.0);
}

// ---------------------------------------------------------------------------
// Serialization

inline void save_esn(const EsnModel& m, std::ostream& out) {
  const auto& c = m.config;
  out << "echoclf-esn 1\n"
      << "reservoir_size " << c.reservoir_size << '\n'
      << "input_dim " << c.input_dim << '\n'
      << "output_dim " << c.output_dim << '\n'
      << "spectral_radius " << format_double(c.spectral_radius) << '\n'
      << "density " << format_double(c.density) << '\n'
      << "learning_rate " << format_double(c.learning_rate) << '\n'
      << "drive_steps " << c.drive_steps << '\n'
      << "ridge_lambda " << format_double(c.ridge_lambda) << '\n'
      << "input_bias " << format_double(c.input_bias) << '\n'
      << "weight_low " << format_double(c.weight_low) << '\n'
      << "weight_high " << format_double(c.weight_high) << '\n'
      << "seed " << c.seed << '\n';
  textio::write_matrix(out, "w_in", m.w_in);
  textio::write_matrix(out, "bias_in", m.bias_in);
  textio::write_matrix(out, "w", m.w);
  textio::write_matrix(out, "w_out", m.w_out);
  out << "end\n";
}

inline EsnModel load_esn(std::istream& in) {
  textio::Reader r(in);
  const auto magic = r.expect("echoclf-esn", 1);
  if (magic[1] != "1") {
    r.fail("unsupported esn format version " + magic[1]);
  }
  EsnModel m;
  auto& c = m.config;
  c.reservoir_size = r.count("reservoir_size");
  c.input_dim = r.count("input_dim");
  c.output_dim = r.count("output_dim");
  c.spectral_radius = r.number("spectral_radius");
  c.density = r.number("density");
  c.learning_rate = r.number("learning_rate");
  c.drive_steps = r.count("drive_steps");
  c.ridge_lambda = r.number("ridge_lambda");
  c.input_bias = r.number("input_bias");
  c.weight_low = r.number("weight_low");
  c.weight_high = r.number("weight_high");
  const auto seed_tok = r.expect("seed", 1);
  try {
    c.seed = std::stoull(seed_tok[1]);
  } catch (const std::exception&) {
    r.fail("bad seed '" + seed_tok[1] + "'");
  }
  m.w_in = r.matrix("w_in");
  m.bias_in = r.matrix("bias_in");
  m.w = r.matrix("w");
  m.w_out = r.matrix("w_out");
  r.expect("end", 0);
  validate(c);
  const auto nx = static_cast<Eigen::Index>(c.reservoir_size);
  if (m.w.rows() != nx || m.w.cols() != nx || m.w_in.rows() != nx ||
      m.w_in.cols() != static_cast<Eigen::Index>(c.input_dim) || m.bias_in.size() != nx ||
      m.w_out.rows() != static_cast<Eigen::Index>(c.output_dim) || m.w_out.cols() != nx + 1) {
    r.fail("matrix dimensions disagree with the header");
  }
  return m;
}

} // namespace echoclf
