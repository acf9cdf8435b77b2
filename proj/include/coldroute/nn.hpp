// Copyright 2026 The coldroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace coldroute {

class Rng;

using Dense1 = std::vector<double>;

// Row-major matrix of doubles.
class Dense2 {
 public:
  Dense2() = default;
  Dense2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Dense2 identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Dense2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B
Dense2 matmul(const Dense2& a, const Dense2& b);

// y = W x + b, with gradient accumulators for W and b.
struct AffineLayer {
  Dense2 weight;  // out x in
  Dense1 bias;    // out
  Dense2 grad_weight;
  Dense1 grad_bias;

  AffineLayer() = default;
  AffineLayer(std::size_t in, std::size_t out);

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  // Glorot-uniform weights, zero bias.
  void init_glorot(Rng& rng);
  void zero_grad();

  Dense1 forward(std::span<const double> x) const;
  // Accumulates dW += dy x^T, db += dy; returns W^T dy.
  Dense1 backward(std::span<const double> x, std::span<const double> dy);

  // Row-batched variants: each row of X is one input vector.
  Dense2 forward_rows(const Dense2& x) const;
  Dense2 backward_rows(const Dense2& x, const Dense2& dy);

  bool operator==(const AffineLayer& o) const { return weight == o.weight && bias == o.bias; }
};

struct MseResult {
  double loss = 0.0;
  Dense1 grad;
};

// Mean of squared differences and its gradient 2(pred - target)/n.
MseResult mse(std::span<const double> pred, std::span<const double> target);

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// A parameter tensor viewed as flat storage plus its gradient.
struct ParamRef {
  std::span<double> value;
  std::span<const double> grad;
};

// Collects weight/bias views of each layer in order.
std::vector<ParamRef> param_refs(std::span<AffineLayer* const> layers);

class AdamState {
 public:
  explicit AdamState(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Bias-corrected Adam update applied in place. The moment buffers are
  // sized on the first call and every later call must pass the same shapes.
  void step(std::span<const ParamRef> params);

  std::uint64_t steps() const { return t_; }
  double lr() const { return lr_; }
  const std::vector<Dense1>& first_moment() const { return m_; }
  const std::vector<Dense1>& second_moment() const { return v_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<Dense1> m_;
  std::vector<Dense1> v_;
};

using LossFn = std::function<double(std::span<const double>)>;

// Central-difference gradient of loss at params compared with `analytic`;
// returns max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-8).
double finite_diff_check(const LossFn& loss, std::span<const double> params,
                         std::span<const double> analytic, double h = 1e-5);

// Flattens all parameters (or gradients) of a layer stack, and the inverse.
Dense1 flatten_params(std::span<const AffineLayer* const> layers);
Dense1 flatten_grads(std::span<const AffineLayer* const> layers);
void unflatten_params(std::span<AffineLayer* const> layers, std::span<const double> flat);

// Checkpoint encoding: little-endian float64 payloads in base64.
std::string encode_doubles(std::span<const double> values);
Dense1 decode_doubles(const std::string& b64);
nlohmann::json layer_to_json(const AffineLayer& layer);
AffineLayer layer_from_json(const nlohmann::json& j);

}  // namespace coldroute
