// Copyright 2026 The fdcm Authors
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

// Dense double-precision inner-loop kernels with a scalar reference path and
// an AVX2/FMA path. The active backend is chosen once at startup from CPUID;
// set FDCM_SIMD=scalar (or avx2) in the environment to force one.

#include <cstddef>
#include <span>
#include <string_view>

namespace fdcm::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace avx2

/// True when the binary carries the AVX2 unit and the CPU can run it.
bool avx2_available() noexcept;

Backend active_backend() noexcept;

/// Throws std::invalid_argument when the requested backend cannot run here.
void set_backend(Backend backend);

const KernelTable& table(Backend backend);

std::string_view backend_name(Backend backend) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return table(active_backend()).dot(a.data(), b.data(), a.size());
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  table(active_backend()).axpy(alpha, x.data(), y.data(), x.size());
}

/// sum_i (a_i - b_i)^2
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return table(active_backend()).squared_distance(a.data(), b.data(), a.size());
}

}  // namespace fdcm::kernels
