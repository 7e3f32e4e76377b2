// Copyright 2026 The qfault Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace qfault {

/// 1 - exp(-t / tau). `t` and `tau` must share a unit.
inline double decoherence_prob(double t, double tau) {
  if (!(t >= 0.0)) throw std::invalid_argument("decoherence duration must be non-negative");
  if (!(tau > 0.0)) throw std::invalid_argument("decay constant must be positive");
  return -std::expm1(-t / tau);
}

/// Timing and noise parameters of the simulated machine. Defaults are the
/// eSHe architecture values. Times are in microseconds, decay constants in
/// seconds.
struct NoiseParams {
  double movement_speed = 100.0;  // um / us
  double one_bit_op_time = 1.0;
  double two_bit_op_time = 1000.0;
  double memory_decay = 1e5;
  double operation_decay = 5e3;
  double transport_decay = 2.5e4;
  double one_qubit_op_error = 1e-6;
  double two_qubit_op_error = 1e-4;
  double measurement_error = 1e-4;
  double reset_error = 1e-6;
  /// Test-only stress knob: multiplies the four error rates and divides the
  /// three decay constants.
  double global_scale = 1.0;

  /// Copy with `global_scale` folded into the rates and decay constants.
  NoiseParams scaled() const {
    NoiseParams p = *this;
    p.one_qubit_op_error *= global_scale;
    p.two_qubit_op_error *= global_scale;
    p.measurement_error *= global_scale;
    p.reset_error *= global_scale;
    p.memory_decay /= global_scale;
    p.operation_decay /= global_scale;
    p.transport_decay /= global_scale;
    p.global_scale = 1.0;
    return p;
  }

  void validate() const {
    auto positive = [](double v, const char* key) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(key) + " must be positive and finite");
      }
    };
    auto rate = [](double v, const char* key) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(key) + " must lie in [0, 1]");
    };
    positive(movement_speed, "movement_speed");
    positive(one_bit_op_time, "one_bit_op_time");
    positive(two_bit_op_time, "two_bit_op_time");
    positive(memory_decay, "memory_decay");
    positive(operation_decay, "operation_decay");
    positive(transport_decay, "transport_decay");
    positive(global_scale, "global_scale");
    rate(one_qubit_op_error, "one_qubit_op_error");
    rate(two_qubit_op_error, "two_qubit_op_error");
    rate(measurement_error, "measurement_error");
    rate(reset_error, "reset_error");
    const NoiseParams s = scaled();
    auto scaled_rate = [](double v, const char* key) {
      if (v > 1.0) {
        throw std::invalid_argument(std::string("global_scale pushes ") + key + " above 1");
      }
    };
    scaled_rate(s.one_qubit_op_error, "one_qubit_op_error");
    scaled_rate(s.two_qubit_op_error, "two_qubit_op_error");
    scaled_rate(s.measurement_error, "measurement_error");
    scaled_rate(s.reset_error, "reset_error");
  }

  /// Event probability for `duration_us` of exposure against a decay
  /// constant given in seconds.
  static double decay_event(double duration_us, double decay_s) {
    return decoherence_prob(duration_us * 1e-6, decay_s);
  }

  bool operator==(const NoiseParams&) const = default;
};

namespace detail {

template <typename Fn>
void for_each_param(NoiseParams& p, Fn&& fn) {
  fn("movement_speed", p.movement_speed);
  fn("one_bit_op_time", p.one_bit_op_time);
  fn("two_bit_op_time", p.two_bit_op_time);
  fn("memory_decay", p.memory_decay);
  fn("operation_decay", p.operation_decay);
  fn("transport_decay", p.transport_decay);
  fn("one_qubit_op_error", p.one_qubit_op_error);
  fn("two_qubit_op_error", p.two_qubit_op_error);
  fn("measurement_error", p.measurement_error);
  fn("reset_error", p.reset_error);
  fn("global_scale", p.global_scale);
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(std::string(what) + ": cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses `key = value` lines (`#` starts a comment). Absent keys keep their
/// defaults; unknown keys and out-of-range values are rejected by name.
inline NoiseParams load_params(std::string_view text) {
  NoiseParams p;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    bool found = false;
    detail::for_each_param(p, [&](std::string_view name, double& field) {
      if (name == key) {
        field = detail::parse_double(value, name);
        found = true;
      }
    });
    if (!found) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown key '" +
                                  std::string(key) + "'");
    }
  }
  p.validate();
  return p;
}

inline NoiseParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_params(buf.str());
}

inline std::string serialize(const NoiseParams& params) {
  NoiseParams copy = params;
  std::string out;
  char buf[96];
  detail::for_each_param(copy, [&](std::string_view name, double& field) {
    std::snprintf(buf, sizeof(buf), " = %.17g\n", field);
    out.append(name);
    out += buf;
  });
  return out;
}

}  // namespace qfault
