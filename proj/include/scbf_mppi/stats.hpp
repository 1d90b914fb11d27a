// Copyright 2026 The scbf-mppi Authors
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

#include <span>

namespace scbf_mppi {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse of the standard normal CDF (quantile function), accurate to
/// ~1e-12 over p in (0, 1). Rational initial guess refined by one Halley step.
double normal_quantile(double p);

double sample_mean(std::span<const double> xs);

/// Unbiased sample variance (n-1 denominator); requires at least two values.
double sample_variance(std::span<const double> xs);

}  // namespace scbf_mppi
