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

#include "coldroute/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "coldroute/error.hpp"
#include "coldroute/rng.hpp"

namespace coldroute {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

}  // namespace

Dense2 Dense2::identity(std::size_t n) {
  Dense2 m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Dense2 matmul(const Dense2& a, const Dense2& b) {
  require(a.cols() == b.rows(), "matmul inner dimensions differ");
  Dense2 c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

AffineLayer::AffineLayer(std::size_t in, std::size_t out)
    : weight(out, in), bias(out, 0.0), grad_weight(out, in), grad_bias(out, 0.0) {}

void AffineLayer::init_glorot(Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
  for (double& w : weight.flat()) w = rng.uniform(-limit, limit);
  std::fill(bias.begin(), bias.end(), 0.0);
}

void AffineLayer::zero_grad() {
  grad_weight.fill(0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

Dense1 AffineLayer::forward(std::span<const double> x) const {
  require(x.size() == in_dim(), "affine input size");
  Dense1 y(bias);
  for (std::size_t o = 0; o < out_dim(); ++o) {
    auto w = weight.row(o);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
    y[o] += acc;
  }
  return y;
}

Dense1 AffineLayer::backward(std::span<const double> x, std::span<const double> dy) {
  require(x.size() == in_dim() && dy.size() == out_dim(), "affine backward shapes");
  Dense1 dx(in_dim(), 0.0);
  for (std::size_t o = 0; o < out_dim(); ++o) {
    double g = dy[o];
    grad_bias[o] += g;
    if (g == 0.0) continue;
    auto gw = grad_weight.row(o);
    auto w = weight.row(o);
    for (std::size_t i = 0; i < x.size(); ++i) {
      gw[i] += g * x[i];
      dx[i] += w[i] * g;
    }
  }
  return dx;
}

Dense2 AffineLayer::forward_rows(const Dense2& x) const {
  require(x.cols() == in_dim(), "affine input width");
  Dense2 y(x.rows(), out_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    auto yr = y.row(r);
    for (std::size_t o = 0; o < out_dim(); ++o) {
      auto w = weight.row(o);
      double acc = bias[o];
      for (std::size_t i = 0; i < xr.size(); ++i) acc += w[i] * xr[i];
      yr[o] = acc;
    }
  }
  return y;
}

Dense2 AffineLayer::backward_rows(const Dense2& x, const Dense2& dy) {
  require(x.rows() == dy.rows() && x.cols() == in_dim() && dy.cols() == out_dim(),
          "affine backward batch shapes");
  Dense2 dx(x.rows(), in_dim());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    auto gr = dy.row(r);
    auto dxr = dx.row(r);
    for (std::size_t o = 0; o < out_dim(); ++o) {
      double g = gr[o];
      grad_bias[o] += g;
      if (g == 0.0) continue;
      auto gw = grad_weight.row(o);
      auto w = weight.row(o);
      for (std::size_t i = 0; i < xr.size(); ++i) {
        gw[i] += g * xr[i];
        dxr[i] += w[i] * g;
      }
    }
  }
  return dx;
}

MseResult mse(std::span<const double> pred, std::span<const double> target) {
  require(pred.size() == target.size(), "mse shapes differ");
  require(!pred.empty(), "mse of empty input");
  MseResult r;
  r.grad.resize(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    r.loss += d * d;
    r.grad[i] = 2.0 * d / n;
  }
  r.loss /= n;
  return r;
}

std::vector<ParamRef> param_refs(std::span<AffineLayer* const> layers) {
  std::vector<ParamRef> refs;
  for (auto* l : layers) {
    refs.push_back({l->weight.flat(), l->grad_weight.flat()});
    refs.push_back({l->bias, l->grad_bias});
  }
  return refs;
}

void AdamState::step(std::span<const ParamRef> params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }
  require(m_.size() == params.size(), "adam parameter count changed");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require(params[k].value.size() == m_[k].size() && params[k].grad.size() == m_[k].size(),
            "adam parameter shape changed");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k].value;
    auto grad = params[k].grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double finite_diff_check(const LossFn& loss, std::span<const double> params,
                         std::span<const double> analytic, double h) {
  require(params.size() == analytic.size(), "gradient size differs from parameter size");
  Dense1 p(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    double up = loss(p);
    p[i] = orig - h;
    double down = loss(p);
    p[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NonFiniteLoss, "at parameter " + std::to_string(i));
    }
    double numeric = (up - down) / (2.0 * h);
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

Dense1 flatten_params(std::span<const AffineLayer* const> layers) {
  Dense1 out;
  for (const auto* l : layers) {
    auto w = l->weight.flat();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), l->bias.begin(), l->bias.end());
  }
  return out;
}

Dense1 flatten_grads(std::span<const AffineLayer* const> layers) {
  Dense1 out;
  for (const auto* l : layers) {
    auto w = l->grad_weight.flat();
    out.insert(out.end(), w.begin(), w.end());
    out.insert(out.end(), l->grad_bias.begin(), l->grad_bias.end());
  }
  return out;
}

void unflatten_params(std::span<AffineLayer* const> layers, std::span<const double> flat) {
  std::size_t pos = 0;
  for (auto* l : layers) {
    auto w = l->weight.flat();
    require(pos + w.size() + l->bias.size() <= flat.size(), "flat parameter vector too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), w.size(), w.begin());
    pos += w.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l->bias.size(), l->bias.begin());
    pos += l->bias.size();
  }
  require(pos == flat.size(), "flat parameter vector too long");
}

namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64[(n >> 18) & 63];
    out += kB64[(n >> 12) & 63];
    out += kB64[(n >> 6) & 63];
    out += kB64[n & 63];
  }
  if (i + 1 == bytes.size()) {
    std::uint32_t n = bytes[i] << 16;
    out += kB64[(n >> 18) & 63];
    out += kB64[(n >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kB64[(n >> 18) & 63];
    out += kB64[(n >> 12) & 63];
    out += kB64[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& s) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (s.size() % 4 != 0) throw Error(ErrorCode::Parse, "base64 length not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(s.size() / 4 * 3);
  for (std::size_t i = 0; i < s.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      char c = s[i + k];
      if (c == '=' && i + 4 == s.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      v[k] = val(c);
      if (v[k] < 0 || pad > 0) throw Error(ErrorCode::Parse, "invalid base64 character");
    }
    std::uint32_t n = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
    out.push_back(static_cast<unsigned char>((n >> 16) & 0xFF));
    if (pad < 2) out.push_back(static_cast<unsigned char>((n >> 8) & 0xFF));
    if (pad < 1) out.push_back(static_cast<unsigned char>(n & 0xFF));
  }
  return out;
}

}  // namespace

std::string encode_doubles(std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

Dense1 decode_doubles(const std::string& b64) {
  auto bytes = base64_decode(b64);
  if (bytes.size() % 8 != 0) throw Error(ErrorCode::Parse, "payload is not a whole number of float64 values");
  Dense1 out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

nlohmann::json layer_to_json(const AffineLayer& layer) {
  return {{"in", layer.in_dim()},
          {"out", layer.out_dim()},
          {"weight", encode_doubles(layer.weight.flat())},
          {"bias", encode_doubles(layer.bias)}};
}

AffineLayer layer_from_json(const nlohmann::json& j) {
  try {
    AffineLayer layer(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>());
    auto w = decode_doubles(j.at("weight").get<std::string>());
    auto b = decode_doubles(j.at("bias").get<std::string>());
    if (w.size() != layer.weight.size() || b.size() != layer.bias.size()) {
      throw Error(ErrorCode::Parse, "layer payload size does not match its shape");
    }
    std::copy(w.begin(), w.end(), layer.weight.flat().begin());
    layer.bias = std::move(b);
    return layer;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace coldroute
