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

#include "scbf_mppi/symbolic.hpp"

#include <cmath>
#include <stdexcept>

namespace scbf_mppi::sym {

namespace {

Expr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool is_const_value(const Expr& e, double v) {
  return e->kind == Node::Kind::kConst && e->value == v;
}

}  // namespace

Expr constant(double v) {
  Node n;
  n.kind = Node::Kind::kConst;
  n.value = v;
  return make(n);
}

Expr var(int index) {
  Node n;
  n.kind = Node::Kind::kVar;
  n.index = index;
  return make(n);
}

Expr add(Expr a, Expr b) {
  if (a->kind == Node::Kind::kConst && b->kind == Node::Kind::kConst)
    return constant(a->value + b->value);
  if (is_const_value(a, 0.0)) return b;
  if (is_const_value(b, 0.0)) return a;
  Node n;
  n.kind = Node::Kind::kAdd;
  n.a = std::move(a);
  n.b = std::move(b);
  return make(n);
}

Expr mul(Expr a, Expr b) {
  if (a->kind == Node::Kind::kConst && b->kind == Node::Kind::kConst)
    return constant(a->value * b->value);
  if (is_const_value(a, 0.0) || is_const_value(b, 0.0)) return constant(0.0);
  if (is_const_value(a, 1.0)) return b;
  if (is_const_value(b, 1.0)) return a;
  Node n;
  n.kind = Node::Kind::kMul;
  n.a = std::move(a);
  n.b = std::move(b);
  return make(n);
}

Expr neg(Expr a) { return mul(constant(-1.0), std::move(a)); }

Expr sub(Expr a, Expr b) { return add(std::move(a), neg(std::move(b))); }

Expr scale(double k, Expr a) { return mul(constant(k), std::move(a)); }

Expr sin(Expr a) {
  if (a->kind == Node::Kind::kConst) return constant(std::sin(a->value));
  Node n;
  n.kind = Node::Kind::kSin;
  n.a = std::move(a);
  return make(n);
}

Expr cos(Expr a) {
  if (a->kind == Node::Kind::kConst) return constant(std::cos(a->value));
  Node n;
  n.kind = Node::Kind::kCos;
  n.a = std::move(a);
  return make(n);
}

Expr pow(Expr a, int exponent) {
  if (exponent < 0) throw std::invalid_argument("sym::pow: negative exponent");
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return a;
  if (a->kind == Node::Kind::kConst) return constant(std::pow(a->value, exponent));
  Node n;
  n.kind = Node::Kind::kPow;
  n.exponent = exponent;
  n.a = std::move(a);
  return make(n);
}

double eval(const Expr& e, const Eigen::VectorXd& x) {
  switch (e->kind) {
    case Node::Kind::kConst:
      return e->value;
    case Node::Kind::kVar:
      return x[e->index];
    case Node::Kind::kAdd:
      return eval(e->a, x) + eval(e->b, x);
    case Node::Kind::kMul:
      return eval(e->a, x) * eval(e->b, x);
    case Node::Kind::kSin:
      return std::sin(eval(e->a, x));
    case Node::Kind::kCos:
      return std::cos(eval(e->a, x));
    case Node::Kind::kPow:
      return std::pow(eval(e->a, x), e->exponent);
  }
  throw std::logic_error("sym::eval: unreachable");
}

Expr diff(const Expr& e, int index) {
  switch (e->kind) {
    case Node::Kind::kConst:
      return constant(0.0);
    case Node::Kind::kVar:
      return constant(e->index == index ? 1.0 : 0.0);
    case Node::Kind::kAdd:
      return add(diff(e->a, index), diff(e->b, index));
    case Node::Kind::kMul:
      return add(mul(diff(e->a, index), e->b), mul(e->a, diff(e->b, index)));
    case Node::Kind::kSin:
      return mul(cos(e->a), diff(e->a, index));
    case Node::Kind::kCos:
      return neg(mul(sin(e->a), diff(e->a, index)));
    case Node::Kind::kPow:
      return mul(scale(static_cast<double>(e->exponent), pow(e->a, e->exponent - 1)),
                 diff(e->a, index));
  }
  throw std::logic_error("sym::diff: unreachable");
}

bool is_constant(const Expr& e) {
  switch (e->kind) {
    case Node::Kind::kConst:
      return true;
    case Node::Kind::kVar:
      return false;
    case Node::Kind::kAdd:
    case Node::Kind::kMul:
      return is_constant(e->a) && is_constant(e->b);
    case Node::Kind::kSin:
    case Node::Kind::kCos:
    case Node::Kind::kPow:
      return is_constant(e->a);
  }
  throw std::logic_error("sym::is_constant: unreachable");
}

ExprVector gradient(const Expr& e, int dim) {
  ExprVector g(dim);
  for (int i = 0; i < dim; ++i) g[i] = diff(e, i);
  return g;
}

ExprMatrix hessian(const Expr& e, int dim) {
  ExprMatrix h(dim, ExprVector(dim));
  const ExprVector g = gradient(e, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) h[i][j] = diff(g[i], j);
  return h;
}

}  // namespace scbf_mppi::sym
