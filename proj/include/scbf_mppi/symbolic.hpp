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

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace scbf_mppi::sym {

// Minimal expression trees for polynomial/trigonometric functions of a state
// vector. Enough to write barrier functions once and obtain exact gradients,
// Hessians, and recursively lifted barriers without finite differences.

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { kConst, kVar, kAdd, kMul, kSin, kCos, kPow };
  Kind kind;
  double value = 0.0;  // kConst
  int index = 0;       // kVar
  int exponent = 0;    // kPow
  Expr a, b;
};

Expr constant(double v);
Expr var(int index);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr neg(Expr a);
Expr mul(Expr a, Expr b);
Expr scale(double k, Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr pow(Expr a, int exponent);  // exponent >= 0

double eval(const Expr& e, const Eigen::VectorXd& x);

/// Exact partial derivative with respect to variable `index`.
Expr diff(const Expr& e, int index);

/// True when the expression contains no variables (folds to a constant).
bool is_constant(const Expr& e);

using ExprVector = std::vector<Expr>;
using ExprMatrix = std::vector<std::vector<Expr>>;

ExprVector gradient(const Expr& e, int dim);
ExprMatrix hessian(const Expr& e, int dim);

}  // namespace scbf_mppi::sym
