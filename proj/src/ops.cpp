// Copyright 2026 the mtlab authors
// SPDX-License-Identifier: Apache-2.0

#include "mtlab/ops.hpp"

#include <cmath>
#include <utility>

namespace mtlab {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowC = Eigen::Map<const RowMat>;

Tape* common_tape(std::initializer_list<const Tensor*> ts) {
  Tape* tape = nullptr;
  for (const Tensor* t : ts) {
    if (!t->on_tape()) continue;
    if (tape == nullptr)
      tape = t->tape();
    else if (tape != t->tape())
      throw ArgumentError("operands belong to different tapes");
  }
  return tape;
}

void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite())
    throw NumericError(std::string(op) + " received a non-finite input");
}

NodeId node_of(const Tensor& t) { return t.on_tape() ? t.node() : kNoNode; }

Tensor finish(Tape* tape, const char* op, std::vector<NodeId> inputs,
              Tensor out, Tape::BackwardFn fn) {
  ensure_finite(out, op);
  if (tape != nullptr) {
    const NodeId id = tape->make_node(out.shape());
    out.attach(tape, id);
    tape->record(op, std::move(inputs), id, std::move(fn));
  }
  return out;
}

struct AxisView {
  Index outer, len, inner;
};

AxisView axis_view(const Shape& s, Index axis) {
  if (axis < 0 || axis >= static_cast<Index>(s.size()))
    throw IndexError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_str(s));
  AxisView v{1, s[static_cast<std::size_t>(axis)], 1};
  for (Index i = 0; i < axis; ++i) v.outer *= s[static_cast<std::size_t>(i)];
  for (Index i = axis + 1; i < static_cast<Index>(s.size()); ++i)
    v.inner *= s[static_cast<std::size_t>(i)];
  return v;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul expects rank-2 operands, got " + shape_str(a.shape()) +
                     " and " + shape_str(b.shape()));
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul inner dimensions disagree: " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  check_finite(a, "matmul");
  check_finite(b, "matmul");

  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  MapRow(out.data(), m, n) = MapRowC(a.data(), m, k) * MapRowC(b.data(), k, n);

  Tape* tape = common_tape({&a, &b});
  if (tape == nullptr) return finish(nullptr, "matmul", {}, std::move(out), {});

  Eigen::VectorXd av = a.values(), bv = b.values();
  return finish(
      tape, "matmul", {node_of(a), node_of(b)}, std::move(out),
      [m, k, n, av = std::move(av), bv = std::move(bv)](
          const Eigen::VectorXd& g, const std::vector<Eigen::VectorXd*>& gin) {
        MapRowC gm(g.data(), m, n);
        if (gin[0] != nullptr)
          MapRow(gin[0]->data(), m, k) += gm * MapRowC(bv.data(), k, n).transpose();
        if (gin[1] != nullptr)
          MapRow(gin[1]->data(), k, n) += MapRowC(av.data(), m, k).transpose() * gm;
      });
}

namespace {

Tensor conv1d(const Tensor& input, const Tensor& kernels, Index stride) {
  const Index C = input.dim(0), L = input.dim(1);
  const Index O = kernels.dim(0), K = kernels.dim(2);
  if (kernels.dim(1) != C)
    throw ShapeError("conv channel mismatch: input " + shape_str(input.shape()) +
                     " vs kernels " + shape_str(kernels.shape()));
  if (K > L)
    throw ShapeError("conv kernel " + shape_str(kernels.shape()) +
                     " larger than input " + shape_str(input.shape()));
  const Index Lo = (L - K) / stride + 1;

  Tensor out({O, Lo});
  const double* in = input.data();
  const double* ker = kernels.data();
  double* o = out.data();
  for (Index oc = 0; oc < O; ++oc)
    for (Index j = 0; j < Lo; ++j) {
      double acc = 0.0;
      for (Index c = 0; c < C; ++c) {
        const double* inp = in + c * L + j * stride;
        const double* kp = ker + (oc * C + c) * K;
        for (Index t = 0; t < K; ++t) acc += inp[t] * kp[t];
      }
      o[oc * Lo + j] = acc;
    }

  Tape* tape = common_tape({&input, &kernels});
  if (tape == nullptr) return finish(nullptr, "conv", {}, std::move(out), {});

  Eigen::VectorXd iv = input.values(), kv = kernels.values();
  return finish(
      tape, "conv", {node_of(input), node_of(kernels)}, std::move(out),
      [C, L, O, K, Lo, stride, iv = std::move(iv), kv = std::move(kv)](
          const Eigen::VectorXd& g, const std::vector<Eigen::VectorXd*>& gin) {
        for (Index oc = 0; oc < O; ++oc)
          for (Index j = 0; j < Lo; ++j) {
            const double go = g[oc * Lo + j];
            if (go == 0.0) continue;
            for (Index c = 0; c < C; ++c) {
              const Index ibase = c * L + j * stride;
              const Index kbase = (oc * C + c) * K;
              if (gin[0] != nullptr)
                for (Index t = 0; t < K; ++t)
                  (*gin[0])[ibase + t] += go * kv[kbase + t];
              if (gin[1] != nullptr)
                for (Index t = 0; t < K; ++t)
                  (*gin[1])[kbase + t] += go * iv[ibase + t];
            }
          }
      });
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, Index sh, Index sw) {
  const Index C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const Index O = kernels.dim(0), Kh = kernels.dim(2), Kw = kernels.dim(3);
  if (kernels.dim(1) != C)
    throw ShapeError("conv channel mismatch: input " + shape_str(input.shape()) +
                     " vs kernels " + shape_str(kernels.shape()));
  if (Kh > H || Kw > W)
    throw ShapeError("conv kernel " + shape_str(kernels.shape()) +
                     " larger than input " + shape_str(input.shape()));
  const Index Ho = (H - Kh) / sh + 1;
  const Index Wo = (W - Kw) / sw + 1;

  Tensor out({O, Ho, Wo});
  const double* in = input.data();
  const double* ker = kernels.data();
  double* o = out.data();
  for (Index oc = 0; oc < O; ++oc)
    for (Index i = 0; i < Ho; ++i)
      for (Index j = 0; j < Wo; ++j) {
        double acc = 0.0;
        for (Index c = 0; c < C; ++c)
          for (Index u = 0; u < Kh; ++u) {
            const double* inp = in + (c * H + i * sh + u) * W + j * sw;
            const double* kp = ker + ((oc * C + c) * Kh + u) * Kw;
            for (Index v = 0; v < Kw; ++v) acc += inp[v] * kp[v];
          }
        o[(oc * Ho + i) * Wo + j] = acc;
      }

  Tape* tape = common_tape({&input, &kernels});
  if (tape == nullptr) return finish(nullptr, "conv", {}, std::move(out), {});

  Eigen::VectorXd iv = input.values(), kv = kernels.values();
  return finish(
      tape, "conv", {node_of(input), node_of(kernels)}, std::move(out),
      [C, H, W, O, Kh, Kw, Ho, Wo, sh, sw, iv = std::move(iv), kv = std::move(kv)](
          const Eigen::VectorXd& g, const std::vector<Eigen::VectorXd*>& gin) {
        for (Index oc = 0; oc < O; ++oc)
          for (Index i = 0; i < Ho; ++i)
            for (Index j = 0; j < Wo; ++j) {
              const double go = g[(oc * Ho + i) * Wo + j];
              if (go == 0.0) continue;
              for (Index c = 0; c < C; ++c)
                for (Index u = 0; u < Kh; ++u) {
                  const Index ibase = (c * H + i * sh + u) * W + j * sw;
                  const Index kbase = ((oc * C + c) * Kh + u) * Kw;
                  if (gin[0] != nullptr)
                    for (Index v = 0; v < Kw; ++v)
                      (*gin[0])[ibase + v] += go * kv[kbase + v];
                  if (gin[1] != nullptr)
                    for (Index v = 0; v < Kw; ++v)
                      (*gin[1])[kbase + v] += go * iv[ibase + v];
                }
            }
      });
}

}  // namespace

Tensor conv(const Tensor& input, const Tensor& kernels,
            const std::vector<Index>& stride) {
  for (Index s : stride)
    if (s <= 0) throw ArgumentError("conv stride must be positive");
  check_finite(input, "conv");
  check_finite(kernels, "conv");

  if (input.rank() == 2) {
    if (kernels.rank() != 3)
      throw ShapeError("conv over [C x L] expects [O x C x K] kernels, got " +
                       shape_str(kernels.shape()));
    if (stride.size() != 1)
      throw ArgumentError("conv over [C x L] expects one stride, got " +
                          std::to_string(stride.size()));
    return conv1d(input, kernels, stride[0]);
  }
  if (input.rank() == 3) {
    if (kernels.rank() != 4)
      throw ShapeError("conv over [C x H x W] expects [O x C x Kh x Kw] kernels, got " +
                       shape_str(kernels.shape()));
    if (stride.size() != 2)
      throw ArgumentError("conv over [C x H x W] expects two strides, got " +
                          std::to_string(stride.size()));
    return conv2d(input, kernels, stride[0], stride[1]);
  }
  throw ShapeError("conv expects a [C x L] or [C x H x W] input, got " +
                   shape_str(input.shape()));
}

Tensor pool(const Tensor& input, Index size, Index axis, PoolMode mode) {
  if (size <= 0) throw ArgumentError("pool size must be positive");
  check_finite(input, "pool");
  const AxisView v = axis_view(input.shape(), axis);
  if (v.len % size != 0)
    throw ShapeError("pool size " + std::to_string(size) +
                     " does not divide axis " + std::to_string(axis) + " of " +
                     shape_str(input.shape()));
  const Index wins = v.len / size;

  Shape out_shape = input.shape();
  out_shape[static_cast<std::size_t>(axis)] = wins;
  Tensor out(out_shape);

  const double* in = input.data();
  double* o = out.data();
  std::vector<Index> argmax;
  if (mode == PoolMode::Max) argmax.resize(static_cast<std::size_t>(out.size()));

  for (Index ou = 0; ou < v.outer; ++ou)
    for (Index w = 0; w < wins; ++w)
      for (Index j = 0; j < v.inner; ++j) {
        const Index out_idx = (ou * wins + w) * v.inner + j;
        const Index base = (ou * v.len + w * size) * v.inner + j;
        if (mode == PoolMode::Max) {
          Index best = base;
          double best_v = in[base];
          for (Index k = 1; k < size; ++k) {
            const Index idx = base + k * v.inner;
            if (in[idx] > best_v) {
              best_v = in[idx];
              best = idx;
            }
          }
          o[out_idx] = best_v;
          argmax[static_cast<std::size_t>(out_idx)] = best;
        } else {
          double acc = 0.0;
          for (Index k = 0; k < size; ++k) acc += in[base + k * v.inner];
          o[out_idx] = acc / static_cast<double>(size);
        }
      }

  Tape* tape = common_tape({&input});
  if (tape == nullptr) return finish(nullptr, "pool", {}, std::move(out), {});

  if (mode == PoolMode::Max) {
    return finish(tape, "pool", {input.node()}, std::move(out),
                  [argmax = std::move(argmax)](
                      const Eigen::VectorXd& g,
                      const std::vector<Eigen::VectorXd*>& gin) {
                    for (Index i = 0; i < g.size(); ++i)
                      (*gin[0])[argmax[static_cast<std::size_t>(i)]] += g[i];
                  });
  }
  return finish(tape, "pool", {input.node()}, std::move(out),
                [v, wins, size](const Eigen::VectorXd& g,
                                const std::vector<Eigen::VectorXd*>& gin) {
                  const double inv = 1.0 / static_cast<double>(size);
                  for (Index ou = 0; ou < v.outer; ++ou)
                    for (Index w = 0; w < wins; ++w)
                      for (Index j = 0; j < v.inner; ++j) {
                        const double go =
                            g[(ou * wins + w) * v.inner + j] * inv;
                        const Index base = (ou * v.len + w * size) * v.inner + j;
                        for (Index k = 0; k < size; ++k)
                          (*gin[0])[base + k * v.inner] += go;
                      }
                });
}

Tensor activation(const Tensor& input, Activation kind) {
  check_finite(input, "activation");
  Tensor out(input.shape());
  switch (kind) {
    case Activation::Relu:
      out.values() = input.values().cwiseMax(0.0);
      break;
    case Activation::Tanh:
      out.values() = input.values().array().tanh();
      break;
    case Activation::Sigmoid:
      out.values() = input.values().unaryExpr([](double x) { return stable_sigmoid(x); });
      break;
  }

  Tape* tape = common_tape({&input});
  if (tape == nullptr) return finish(nullptr, "activation", {}, std::move(out), {});

  Eigen::VectorXd y = out.values();
  return finish(tape, "activation", {input.node()}, std::move(out),
                [kind, y = std::move(y)](const Eigen::VectorXd& g,
                                         const std::vector<Eigen::VectorXd*>& gin) {
                  switch (kind) {
                    case Activation::Relu:
                      gin[0]->array() +=
                          g.array() * (y.array() > 0.0).cast<double>();
                      break;
                    case Activation::Tanh:
                      gin[0]->array() += g.array() * (1.0 - y.array().square());
                      break;
                    case Activation::Sigmoid:
                      gin[0]->array() += g.array() * y.array() * (1.0 - y.array());
                      break;
                  }
                });
}

Tensor concat(const Tensor& a, const Tensor& b, Index axis) {
  if (a.rank() != b.rank())
    throw ShapeError("concat rank mismatch: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  const AxisView va = axis_view(a.shape(), axis);
  for (Index i = 0; i < a.rank(); ++i)
    if (i != axis && a.dim(i) != b.dim(i))
      throw ShapeError("concat shapes disagree off axis " + std::to_string(axis) +
                       ": " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  check_finite(a, "concat");
  check_finite(b, "concat");

  const Index la = a.dim(axis), lb = b.dim(axis);
  Shape out_shape = a.shape();
  out_shape[static_cast<std::size_t>(axis)] = la + lb;
  Tensor out(out_shape);

  const Index block_a = la * va.inner, block_b = lb * va.inner;
  for (Index ou = 0; ou < va.outer; ++ou) {
    if (block_a > 0)
      out.values().segment(ou * (block_a + block_b), block_a) =
          a.values().segment(ou * block_a, block_a);
    if (block_b > 0)
      out.values().segment(ou * (block_a + block_b) + block_a, block_b) =
          b.values().segment(ou * block_b, block_b);
  }

  Tape* tape = common_tape({&a, &b});
  if (tape == nullptr) return finish(nullptr, "concat", {}, std::move(out), {});

  const Index outer = va.outer;
  return finish(tape, "concat", {node_of(a), node_of(b)}, std::move(out),
                [outer, block_a, block_b](const Eigen::VectorXd& g,
                                          const std::vector<Eigen::VectorXd*>& gin) {
                  for (Index ou = 0; ou < outer; ++ou) {
                    if (gin[0] != nullptr && block_a > 0)
                      gin[0]->segment(ou * block_a, block_a) +=
                          g.segment(ou * (block_a + block_b), block_a);
                    if (gin[1] != nullptr && block_b > 0)
                      gin[1]->segment(ou * block_b, block_b) +=
                          g.segment(ou * (block_a + block_b) + block_a, block_b);
                  }
                });
}

Tensor log_softmax(const Tensor& logits) {
  if (logits.rank() != 1)
    throw ShapeError("log_softmax expects a rank-1 tensor, got " +
                     shape_str(logits.shape()));
  if (logits.size() == 0) throw ArgumentError("log_softmax of an empty tensor");
  check_finite(logits, "log_softmax");

  const double m = logits.values().maxCoeff();
  Eigen::ArrayXd shifted = logits.values().array() - m;
  const double lse = std::log(shifted.exp().sum());
  Tensor out(logits.shape(), (shifted - lse).matrix());

  Tape* tape = common_tape({&logits});
  if (tape == nullptr) return finish(nullptr, "log_softmax", {}, std::move(out), {});

  Eigen::VectorXd y = out.values();
  return finish(tape, "log_softmax", {logits.node()}, std::move(out),
                [y = std::move(y)](const Eigen::VectorXd& g,
                                   const std::vector<Eigen::VectorXd*>& gin) {
                  const double gs = g.sum();
                  gin[0]->array() += g.array() - y.array().exp() * gs;
                });
}

Tensor nll(const Tensor& log_probs, Index target) {
  if (log_probs.rank() != 1)
    throw ShapeError("nll expects rank-1 log-probabilities, got " +
                     shape_str(log_probs.shape()));
  if (target < 0 || target >= log_probs.size())
    throw IndexError("nll target " + std::to_string(target) +
                     " out of range for " + std::to_string(log_probs.size()) +
                     " classes");
  check_finite(log_probs, "nll");
  if (log_probs.values().maxCoeff() > 0.0)
    throw ArgumentError("nll expects log-probabilities (all <= 0)");

  Tensor out = Tensor::scalar(-log_probs[target]);

  Tape* tape = common_tape({&log_probs});
  if (tape == nullptr) return finish(nullptr, "nll", {}, std::move(out), {});

  return finish(tape, "nll", {log_probs.node()}, std::move(out),
                [target](const Eigen::VectorXd& g,
                         const std::vector<Eigen::VectorXd*>& gin) {
                  (*gin[0])[target] -= g[0];
                });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("add shape mismatch: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  check_finite(a, "add");
  check_finite(b, "add");
  Tensor out(a.shape(), a.values() + b.values());

  Tape* tape = common_tape({&a, &b});
  if (tape == nullptr) return finish(nullptr, "add", {}, std::move(out), {});
  return finish(tape, "add", {node_of(a), node_of(b)}, std::move(out),
                [](const Eigen::VectorXd& g,
                   const std::vector<Eigen::VectorXd*>& gin) {
                  if (gin[0] != nullptr) *gin[0] += g;
                  if (gin[1] != nullptr) *gin[1] += g;
                });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("mul shape mismatch: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  check_finite(a, "mul");
  check_finite(b, "mul");
  Tensor out(a.shape(), a.values().cwiseProduct(b.values()));

  Tape* tape = common_tape({&a, &b});
  if (tape == nullptr) return finish(nullptr, "mul", {}, std::move(out), {});

  Eigen::VectorXd av = a.values(), bv = b.values();
  return finish(tape, "mul", {node_of(a), node_of(b)}, std::move(out),
                [av = std::move(av), bv = std::move(bv)](
                    const Eigen::VectorXd& g,
                    const std::vector<Eigen::VectorXd*>& gin) {
                  if (gin[0] != nullptr) gin[0]->array() += g.array() * bv.array();
                  if (gin[1] != nullptr) gin[1]->array() += g.array() * av.array();
                });
}

Tensor scale(const Tensor& a, double factor) {
  if (!std::isfinite(factor)) throw NumericError("scale by a non-finite factor");
  check_finite(a, "scale");
  Tensor out(a.shape(), a.values() * factor);

  Tape* tape = common_tape({&a});
  if (tape == nullptr) return finish(nullptr, "scale", {}, std::move(out), {});
  return finish(tape, "scale", {a.node()}, std::move(out),
                [factor](const Eigen::VectorXd& g,
                         const std::vector<Eigen::VectorXd*>& gin) {
                  *gin[0] += factor * g;
                });
}

Tensor exp(const Tensor& a) {
  check_finite(a, "exp");
  Tensor out(a.shape(), a.values().array().exp().matrix());

  Tape* tape = common_tape({&a});
  if (tape == nullptr) return finish(nullptr, "exp", {}, std::move(out), {});

  Eigen::VectorXd y = out.values();
  return finish(tape, "exp", {a.node()}, std::move(out),
                [y = std::move(y)](const Eigen::VectorXd& g,
                                   const std::vector<Eigen::VectorXd*>& gin) {
                  gin[0]->array() += g.array() * y.array();
                });
}

Tensor sum(const Tensor& a) {
  check_finite(a, "sum");
  Tensor out = Tensor::scalar(a.values().sum());

  Tape* tape = common_tape({&a});
  if (tape == nullptr) return finish(nullptr, "sum", {}, std::move(out), {});
  return finish(tape, "sum", {a.node()}, std::move(out),
                [](const Eigen::VectorXd& g,
                   const std::vector<Eigen::VectorXd*>& gin) {
                  gin[0]->array() += g[0];
                });
}

Tensor narrow(const Tensor& a, Index axis, Index start, Index length) {
  const AxisView v = axis_view(a.shape(), axis);
  if (start < 0 || length < 0 || start + length > v.len)
    throw IndexError("narrow [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") out of range for axis " +
                     std::to_string(axis) + " of " + shape_str(a.shape()));
  check_finite(a, "narrow");

  Shape out_shape = a.shape();
  out_shape[static_cast<std::size_t>(axis)] = length;
  Tensor out(out_shape);
  for (Index ou = 0; ou < v.outer; ++ou)
    if (length * v.inner > 0)
      out.values().segment(ou * length * v.inner, length * v.inner) =
          a.values().segment((ou * v.len + start) * v.inner, length * v.inner);

  Tape* tape = common_tape({&a});
  if (tape == nullptr) return finish(nullptr, "narrow", {}, std::move(out), {});
  return finish(tape, "narrow", {a.node()}, std::move(out),
                [v, start, length](const Eigen::VectorXd& g,
                                   const std::vector<Eigen::VectorXd*>& gin) {
                  for (Index ou = 0; ou < v.outer; ++ou)
                    if (length * v.inner > 0)
                      gin[0]->segment((ou * v.len + start) * v.inner,
                                      length * v.inner) +=
                          g.segment(ou * length * v.inner, length * v.inner);
                });
}

Tensor pad(const Tensor& a, Index axis, Index before, Index after) {
  if (before < 0 || after < 0) throw ArgumentError("pad amounts must be non-negative");
  const AxisView v = axis_view(a.shape(), axis);
  check_finite(a, "pad");

  Shape out_shape = a.shape();
  out_shape[static_cast<std::size_t>(axis)] = v.len + before + after;
  Tensor out(out_shape);
  const Index out_len = v.len + before + after;
  for (Index ou = 0; ou < v.outer; ++ou)
    if (v.len * v.inner > 0)
      out.values().segment((ou * out_len + before) * v.inner, v.len * v.inner) =
          a.values().segment(ou * v.len * v.inner, v.len * v.inner);

  Tape* tape = common_tape({&a});
  if (tape == nullptr) return finish(nullptr, "pad", {}, std::move(out), {});
  return finish(tape, "pad", {a.node()}, std::move(out),
                [v, before, out_len](const Eigen::VectorXd& g,
                                     const std::vector<Eigen::VectorXd*>& gin) {
                  for (Index ou = 0; ou < v.outer; ++ou)
                    if (v.len * v.inner > 0)
                      gin[0]->segment(ou * v.len * v.inner, v.len * v.inner) +=
                          g.segment((ou * out_len + before) * v.inner,
                                    v.len * v.inner);
                });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size())
    throw ShapeError("reshape of " + shape_str(a.shape()) + " to incompatible " +
                     shape_str(shape));
  check_finite(a, "reshape");
  Tensor out(std::move(shape), a.values());

  Tape* tape = common_tape({&a});
  if (tape == nullptr) return finish(nullptr, "reshape", {}, std::move(out), {});
  return finish(tape, "reshape", {a.node()}, std::move(out),
                [](const Eigen::VectorXd& g,
                   const std::vector<Eigen::VectorXd*>& gin) { *gin[0] += g; });
}

}  // namespace mtlab
