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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fdcm/kernels.hpp"

namespace fdcm::kernels {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::squared_distance};

#if FDCM_WITH_AVX2
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::squared_distance};
#endif

Backend detect_backend() {
  if (const char* forced = std::getenv("FDCM_SIMD")) {
    const std::string value(forced);
    if (value == "scalar") return Backend::Scalar;
    if (value == "avx2" && avx2_available()) return Backend::Avx2;
  }
  return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect_backend()};
  return backend;
}

}  // namespace

bool avx2_available() noexcept {
#if FDCM_WITH_AVX2 && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (backend == Backend::Avx2 && !avx2_available()) {
    throw std::invalid_argument("AVX2 kernels are not available on this machine");
  }
  current().store(backend, std::memory_order_relaxed);
}

const KernelTable& table(Backend backend) {
#if FDCM_WITH_AVX2
  if (backend == Backend::Avx2) return kAvx2Table;
#else
  (void)backend;
#endif
  return kScalarTable;
}

std::string_view backend_name(Backend backend) noexcept {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace fdcm::kernels
