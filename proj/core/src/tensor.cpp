#include "lagco/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lagco::ad {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

namespace {

[[noreturn]] void fail(const std::string& op, const std::string& detail) {
    throw TensorError(op + ": " + detail);
}

void require(bool cond, const std::string& op, const std::string& detail) {
    if (!cond) fail(op, detail);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        fail(op, "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

Tape* result_tape(const Tensor& a) { return a.tape(); }
Tape* result_tape(const Tensor& a, const Tensor& b) {
    if (a.attached() && b.attached() && a.tape() != b.tape())
        fail("op", "inputs attached to different tapes");
    return a.attached() ? a.tape() : b.tape();
}

void check_finite_values(const std::vector<double>& v, const char* op) {
    for (double x : v)
        if (!std::isfinite(x)) fail(op, "non-finite value produced");
}

#ifdef NDEBUG
void debug_check(const Tensor&, const char*) {}
#else
void debug_check(const Tensor& t, const char* op) { check_finite_values(t.data(), op); }
#endif

}  // namespace

void check_finite(const Tensor& t, const char* op) { check_finite_values(t.data(), op); }

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != static_cast<int64_t>(data_.size()))
        fail("tensor", "shape " + shape_str(shape_) + " does not match data length " +
                           std::to_string(data_.size()));
    check_finite_values(data_, "tensor");
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }
Tensor Tensor::zeros(Shape shape) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}
Tensor Tensor::full(Shape shape, double v) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), v));
}
Tensor Tensor::row_vector(std::vector<double> v) {
    int n = static_cast<int>(v.size());
    return Tensor({n}, std::move(v));
}
Tensor Tensor::matrix(int rows, int cols, std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
}

int Tensor::rows() const {
    require(rank() == 2, "rows", "rank-2 tensor required, got " + shape_str(shape_));
    return shape_[0];
}
int Tensor::cols() const {
    require(rank() == 2, "cols", "rank-2 tensor required, got " + shape_str(shape_));
    return shape_[1];
}
double Tensor::value() const {
    require(numel() == 1, "value", "scalar tensor required, got " + shape_str(shape_));
    return data_[0];
}
double Tensor::at(int r, int c) const { return data_[static_cast<size_t>(r) * cols() + c]; }

// ---- Tape ----

int Tape::record(int64_t numel, std::vector<int> inputs, BackwardFn fn) {
    Node node;
    node.numel = numel;
    node.inputs = std::move(inputs);
    node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::attach(Tensor value, int node_id) {
    value.tape_ = this;
    value.node_ = node_id;
    return value;
}

Tensor Tape::watch(const Tensor& value) {
    Node node;
    node.numel = value.numel();
    node.leaf = true;
    nodes_.push_back(std::move(node));
    Tensor t = value.detached();
    t.tape_ = this;
    t.node_ = static_cast<int>(nodes_.size()) - 1;
    return t;
}

void Tape::accumulate(int node, const std::vector<double>& grad) {
    if (node < 0) return;
    auto& buf = grad_buffer(node);
    for (size_t i = 0; i < grad.size(); ++i) buf[i] += grad[i];
}

void Tape::accumulate_scaled(int node, const std::vector<double>& grad, double s) {
    if (node < 0) return;
    auto& buf = grad_buffer(node);
    for (size_t i = 0; i < grad.size(); ++i) buf[i] += s * grad[i];
}

std::vector<double>& Tape::grad_buffer(int node) {
    auto& n = nodes_[static_cast<size_t>(node)];
    if (n.grad.empty()) n.grad.assign(static_cast<size_t>(n.numel), 0.0);
    return n.grad;
}

GradMap Tape::backward(const Tensor& loss) {
    require(!consumed_, "backward", "tape already consumed");
    require(loss.attached() && loss.tape() == this, "backward", "loss is not attached to this tape");
    require(loss.numel() == 1, "backward", "loss must be scalar, got " + shape_str(loss.shape()));
    consumed_ = true;
    grad_buffer(loss.node())[0] = 1.0;
    GradMap out;
    for (int i = loss.node(); i >= 0; --i) {
        Node& n = nodes_[static_cast<size_t>(i)];
        if (n.grad.empty()) continue;  // not on the path to the loss
        if (n.leaf) {
            out.emplace(i, std::move(n.grad));
            n.grad.clear();
            continue;
        }
        if (n.backward) n.backward(n.grad, *this);
        n.grad.clear();
        n.grad.shrink_to_fit();
    }
    return out;
}

// ---- op helpers ----

namespace {

// Elementwise unary op with dy/dx = deriv(x, y).
Tensor unary_op(const Tensor& a, const char* name, const std::function<double(double)>& f,
                const std::function<double(double, double)>& deriv) {
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = f(a.data()[i]);
    Tensor result(a.shape(), std::move(out));
    debug_check(result, name);
    if (Tape* tape = result_tape(a)) {
        std::vector<double> x = a.data();
        std::vector<double> y = result.data();
        int a_node = a.node();
        int id = tape->record(result.numel(), {a_node},
                              [x, y, a_node, deriv](const std::vector<double>& g, Tape& t) {
                                  auto& buf = t.grad_buffer(a_node);
                                  for (size_t i = 0; i < g.size(); ++i)
                                      buf[i] += g[i] * deriv(x[i], y[i]);
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

}  // namespace

// ---- arithmetic ----

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2, "matmul",
            "rank-2 tensors required, got " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    require(a.cols() == b.rows(), "matmul",
            "incompatible shapes " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    int m = a.rows(), k = a.cols(), n = b.cols();
    std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
    const auto& ad = a.data();
    const auto& bd = b.data();
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            double av = ad[static_cast<size_t>(i) * k + p];
            if (av == 0.0) continue;
            const double* brow = &bd[static_cast<size_t>(p) * n];
            double* orow = &out[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    Tensor result({m, n}, std::move(out));
    debug_check(result, "matmul");
    if (Tape* tape = result_tape(a, b)) {
        std::vector<double> adata = a.data(), bdata = b.data();
        int an = a.node(), bn = b.node();
        int id = tape->record(
            result.numel(), {an, bn},
            [adata, bdata, an, bn, m, k, n](const std::vector<double>& g, Tape& t) {
                if (an >= 0) {
                    auto& ga = t.grad_buffer(an);  // dA = G * B^T
                    for (int i = 0; i < m; ++i)
                        for (int p = 0; p < k; ++p) {
                            double acc = 0.0;
                            for (int j = 0; j < n; ++j)
                                acc += g[static_cast<size_t>(i) * n + j] *
                                       bdata[static_cast<size_t>(p) * n + j];
                            ga[static_cast<size_t>(i) * k + p] += acc;
                        }
                }
                if (bn >= 0) {
                    auto& gb = t.grad_buffer(bn);  // dB = A^T * G
                    for (int p = 0; p < k; ++p)
                        for (int j = 0; j < n; ++j) {
                            double acc = 0.0;
                            for (int i = 0; i < m; ++i)
                                acc += adata[static_cast<size_t>(i) * k + p] *
                                       g[static_cast<size_t>(i) * n + j];
                            gb[static_cast<size_t>(p) * n + j] += acc;
                        }
                }
            });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor transpose(const Tensor& a) {
    require(a.rank() == 2, "transpose", "rank-2 tensor required, got " + shape_str(a.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(static_cast<size_t>(m) * n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(j) * m + i] = a.at(i, j);
    Tensor result({n, m}, std::move(out));
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [an, m, n](const std::vector<double>& g, Tape& t) {
                                  auto& ga = t.grad_buffer(an);
                                  for (int i = 0; i < m; ++i)
                                      for (int j = 0; j < n; ++j)
                                          ga[static_cast<size_t>(i) * n + j] +=
                                              g[static_cast<size_t>(j) * m + i];
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "add");
    if (Tape* tape = result_tape(a, b)) {
        int an = a.node(), bn = b.node();
        int id = tape->record(result.numel(), {an, bn},
                              [an, bn](const std::vector<double>& g, Tape& t) {
                                  t.accumulate(an, g);
                                  t.accumulate(bn, g);
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "sub");
    if (Tape* tape = result_tape(a, b)) {
        int an = a.node(), bn = b.node();
        int id = tape->record(result.numel(), {an, bn},
                              [an, bn](const std::vector<double>& g, Tape& t) {
                                  t.accumulate(an, g);
                                  t.accumulate_scaled(bn, g, -1.0);
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "mul");
    if (Tape* tape = result_tape(a, b)) {
        std::vector<double> ad = a.data(), bd = b.data();
        int an = a.node(), bn = b.node();
        int id = tape->record(result.numel(), {an, bn},
                              [ad, bd, an, bn](const std::vector<double>& g, Tape& t) {
                                  if (an >= 0) {
                                      auto& ga = t.grad_buffer(an);
                                      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[i];
                                  }
                                  if (bn >= 0) {
                                      auto& gb = t.grad_buffer(bn);
                                      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[i];
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor minimum(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "minimum");
    std::vector<double> out(a.data().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(a.data()[i], b.data()[i]);
    Tensor result(a.shape(), std::move(out));
    if (Tape* tape = result_tape(a, b)) {
        std::vector<double> ad = a.data(), bd = b.data();
        int an = a.node(), bn = b.node();
        // ties route to a
        int id = tape->record(result.numel(), {an, bn},
                              [ad, bd, an, bn](const std::vector<double>& g, Tape& t) {
                                  if (an >= 0) {
                                      auto& ga = t.grad_buffer(an);
                                      for (size_t i = 0; i < g.size(); ++i)
                                          if (ad[i] <= bd[i]) ga[i] += g[i];
                                  }
                                  if (bn >= 0) {
                                      auto& gb = t.grad_buffer(bn);
                                      for (size_t i = 0; i < g.size(); ++i)
                                          if (ad[i] > bd[i]) gb[i] += g[i];
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor add_rowwise(const Tensor& a, const Tensor& bias) {
    require(a.rank() == 2 && bias.rank() == 1, "add_rowwise",
            "expected [m,n] + [n], got " + shape_str(a.shape()) + " + " + shape_str(bias.shape()));
    require(a.cols() == bias.shape()[0], "add_rowwise",
            "width mismatch " + shape_str(a.shape()) + " + " + shape_str(bias.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(a.data().size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<size_t>(i) * n + j] = a.at(i, j) + bias.at(j);
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "add_rowwise");
    if (Tape* tape = result_tape(a, bias)) {
        int an = a.node(), bn = bias.node();
        int id = tape->record(result.numel(), {an, bn},
                              [an, bn, m, n](const std::vector<double>& g, Tape& t) {
                                  t.accumulate(an, g);
                                  if (bn >= 0) {
                                      auto& gb = t.grad_buffer(bn);
                                      for (int i = 0; i < m; ++i)
                                          for (int j = 0; j < n; ++j)
                                              gb[j] += g[static_cast<size_t>(i) * n + j];
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor add_colwise(const Tensor& a, const Tensor& col) {
    require(a.rank() == 2 && col.rank() == 1, "add_colwise",
            "expected [m,n] + [m], got " + shape_str(a.shape()) + " + " + shape_str(col.shape()));
    require(a.rows() == col.shape()[0], "add_colwise",
            "height mismatch " + shape_str(a.shape()) + " + " + shape_str(col.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(a.data().size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<size_t>(i) * n + j] = a.at(i, j) + col.at(i);
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "add_colwise");
    if (Tape* tape = result_tape(a, col)) {
        int an = a.node(), cn = col.node();
        int id = tape->record(result.numel(), {an, cn},
                              [an, cn, m, n](const std::vector<double>& g, Tape& t) {
                                  t.accumulate(an, g);
                                  if (cn >= 0) {
                                      auto& gc = t.grad_buffer(cn);
                                      for (int i = 0; i < m; ++i)
                                          for (int j = 0; j < n; ++j)
                                              gc[i] += g[static_cast<size_t>(i) * n + j];
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor mul_rowwise(const Tensor& a, const Tensor& v) {
    require(a.rank() == 2 && v.rank() == 1, "mul_rowwise",
            "expected [m,n] * [n], got " + shape_str(a.shape()) + " * " + shape_str(v.shape()));
    require(a.cols() == v.shape()[0], "mul_rowwise",
            "width mismatch " + shape_str(a.shape()) + " * " + shape_str(v.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(a.data().size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] = a.at(i, j) * v.at(j);
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "mul_rowwise");
    if (Tape* tape = result_tape(a, v)) {
        std::vector<double> ad_ = a.data(), vd = v.data();
        int an = a.node(), vn = v.node();
        int id = tape->record(result.numel(), {an, vn},
                              [ad_, vd, an, vn, m, n](const std::vector<double>& g, Tape& t) {
                                  if (an >= 0) {
                                      auto& ga = t.grad_buffer(an);
                                      for (int i = 0; i < m; ++i)
                                          for (int j = 0; j < n; ++j)
                                              ga[static_cast<size_t>(i) * n + j] +=
                                                  g[static_cast<size_t>(i) * n + j] *
                                                  vd[static_cast<size_t>(j)];
                                  }
                                  if (vn >= 0) {
                                      auto& gv = t.grad_buffer(vn);
                                      for (int i = 0; i < m; ++i)
                                          for (int j = 0; j < n; ++j)
                                              gv[static_cast<size_t>(j)] +=
                                                  g[static_cast<size_t>(i) * n + j] *
                                                  ad_[static_cast<size_t>(i) * n + j];
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor scale(const Tensor& a, double c) {
    return unary_op(a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor exp(const Tensor& a) {
    return unary_op(a, "exp", [](double x) { return std::exp(x); },
                    [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    return unary_op(a, "log", [](double x) { return std::log(x); },
                    [](double x, double) { return 1.0 / x; });
}

Tensor relu(const Tensor& a) {
    return unary_op(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
                    [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    return unary_op(a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
                    [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(a, "sigmoid",
                    [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                                   : std::exp(x) / (1.0 + std::exp(x)); },
                    [](double, double y) { return y * (1.0 - y); });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    return unary_op(a, "clamp", [lo, hi](double x) { return std::min(hi, std::max(lo, x)); },
                    [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

// ---- row-structured ops ----

Tensor softmax_rows(const Tensor& a) {
    require(a.rank() == 2, "softmax_rows", "rank-2 tensor required, got " + shape_str(a.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(a.data().size());
    for (int i = 0; i < m; ++i) {
        double mx = a.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, a.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double e = std::exp(a.at(i, j) - mx);
            out[static_cast<size_t>(i) * n + j] = e;
            sum += e;
        }
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] /= sum;
    }
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "softmax_rows");
    if (Tape* tape = result_tape(a)) {
        std::vector<double> y = result.data();
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [y, an, m, n](const std::vector<double>& g, Tape& t) {
                                  if (an < 0) return;
                                  auto& ga = t.grad_buffer(an);
                                  for (int i = 0; i < m; ++i) {
                                      double dot = 0.0;
                                      for (int j = 0; j < n; ++j)
                                          dot += g[static_cast<size_t>(i) * n + j] *
                                                 y[static_cast<size_t>(i) * n + j];
                                      for (int j = 0; j < n; ++j) {
                                          size_t k = static_cast<size_t>(i) * n + j;
                                          ga[k] += y[k] * (g[k] - dot);
                                      }
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor log_softmax_rows(const Tensor& a) {
    require(a.rank() == 2, "log_softmax_rows",
            "rank-2 tensor required, got " + shape_str(a.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(a.data().size());
    for (int i = 0; i < m; ++i) {
        double mx = a.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, a.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += std::exp(a.at(i, j) - mx);
        double lse = mx + std::log(sum);
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] = a.at(i, j) - lse;
    }
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "log_softmax_rows");
    if (Tape* tape = result_tape(a)) {
        std::vector<double> y = result.data();
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [y, an, m, n](const std::vector<double>& g, Tape& t) {
                                  if (an < 0) return;
                                  auto& ga = t.grad_buffer(an);
                                  for (int i = 0; i < m; ++i) {
                                      double gsum = 0.0;
                                      for (int j = 0; j < n; ++j)
                                          gsum += g[static_cast<size_t>(i) * n + j];
                                      for (int j = 0; j < n; ++j) {
                                          size_t k = static_cast<size_t>(i) * n + j;
                                          ga[k] += g[k] - std::exp(y[k]) * gsum;
                                      }
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor l2_normalize_rows(const Tensor& a, double eps) {
    require(a.rank() == 2, "l2_normalize_rows",
            "rank-2 tensor required, got " + shape_str(a.shape()));
    int m = a.rows(), n = a.cols();
    std::vector<double> out(a.data().size());
    std::vector<double> norms(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        double sq = 0.0;
        for (int j = 0; j < n; ++j) sq += a.at(i, j) * a.at(i, j);
        double norm = std::max(std::sqrt(sq), eps);
        norms[static_cast<size_t>(i)] = norm;
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] = a.at(i, j) / norm;
    }
    Tensor result(a.shape(), std::move(out));
    debug_check(result, "l2_normalize_rows");
    if (Tape* tape = result_tape(a)) {
        std::vector<double> y = result.data();
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [y, norms, an, m, n](const std::vector<double>& g, Tape& t) {
                                  if (an < 0) return;
                                  auto& ga = t.grad_buffer(an);
                                  for (int i = 0; i < m; ++i) {
                                      double dot = 0.0;
                                      for (int j = 0; j < n; ++j)
                                          dot += g[static_cast<size_t>(i) * n + j] *
                                                 y[static_cast<size_t>(i) * n + j];
                                      double inv = 1.0 / norms[static_cast<size_t>(i)];
                                      for (int j = 0; j < n; ++j) {
                                          size_t k = static_cast<size_t>(i) * n + j;
                                          ga[k] += inv * (g[k] - y[k] * dot);
                                      }
                                  }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

// ---- structural ops ----

Tensor concat(const Tensor& a, const Tensor& b, int axis) { return concat_many({a, b}, axis); }

Tensor concat_many(const std::vector<Tensor>& parts, int axis) {
    require(!parts.empty(), "concat", "no inputs");
    require(axis == 0 || axis == 1, "concat", "axis must be 0 or 1");
    for (const auto& p : parts)
        require(p.rank() == 2, "concat", "rank-2 tensors required, got " + shape_str(p.shape()));
    int rows = parts[0].rows(), cols = parts[0].cols();
    int total = 0;
    for (const auto& p : parts) {
        if (axis == 0) {
            require(p.cols() == cols, "concat",
                    "column mismatch " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
            total += p.rows();
        } else {
            require(p.rows() == rows, "concat",
                    "row mismatch " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
            total += p.cols();
        }
    }
    int out_rows = axis == 0 ? total : rows;
    int out_cols = axis == 0 ? cols : total;
    std::vector<double> out(static_cast<size_t>(out_rows) * out_cols);
    int offset = 0;
    for (const auto& p : parts) {
        if (axis == 0) {
            std::copy(p.data().begin(), p.data().end(),
                      out.begin() + static_cast<size_t>(offset) * cols);
            offset += p.rows();
        } else {
            for (int i = 0; i < rows; ++i)
                std::copy(p.data().begin() + static_cast<size_t>(i) * p.cols(),
                          p.data().begin() + static_cast<size_t>(i + 1) * p.cols(),
                          out.begin() + static_cast<size_t>(i) * out_cols + offset);
            offset += p.cols();
        }
    }
    Tensor result({out_rows, out_cols}, std::move(out));
    Tape* tape = nullptr;
    for (const auto& p : parts)
        if (p.attached()) {
            require(!tape || tape == p.tape(), "concat", "inputs attached to different tapes");
            tape = p.tape();
        }
    if (tape) {
        std::vector<int> nodes;
        std::vector<std::pair<int, int>> extents;  // (offset, size along axis)
        int off = 0;
        for (const auto& p : parts) {
            nodes.push_back(p.node());
            int ext = axis == 0 ? p.rows() : p.cols();
            extents.emplace_back(off, ext);
            off += ext;
        }
        int id = tape->record(
            result.numel(), nodes,
            [nodes, extents, axis, rows, out_cols, cols](const std::vector<double>& g, Tape& t) {
                for (size_t pi = 0; pi < nodes.size(); ++pi) {
                    if (nodes[pi] < 0) continue;
                    auto& gp = t.grad_buffer(nodes[pi]);
                    auto [off, ext] = extents[pi];
                    if (axis == 0) {
                        for (int i = 0; i < ext; ++i)
                            for (int j = 0; j < cols; ++j)
                                gp[static_cast<size_t>(i) * cols + j] +=
                                    g[static_cast<size_t>(off + i) * cols + j];
                    } else {
                        for (int i = 0; i < rows; ++i)
                            for (int j = 0; j < ext; ++j)
                                gp[static_cast<size_t>(i) * ext + j] +=
                                    g[static_cast<size_t>(i) * out_cols + off + j];
                    }
                }
            });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor slice_rows(const Tensor& a, int r0, int r1) {
    require(a.rank() == 2, "slice_rows", "rank-2 tensor required, got " + shape_str(a.shape()));
    require(0 <= r0 && r0 <= r1 && r1 <= a.rows(), "slice_rows",
            "range [" + std::to_string(r0) + "," + std::to_string(r1) + ") out of bounds for " +
                shape_str(a.shape()));
    int n = a.cols();
    std::vector<double> out(a.data().begin() + static_cast<size_t>(r0) * n,
                            a.data().begin() + static_cast<size_t>(r1) * n);
    Tensor result({r1 - r0, n}, std::move(out));
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [an, r0, n](const std::vector<double>& g, Tape& t) {
                                  if (an < 0) return;
                                  auto& ga = t.grad_buffer(an);
                                  for (size_t i = 0; i < g.size(); ++i)
                                      ga[static_cast<size_t>(r0) * n + i] += g[i];
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
    require(a.rank() == 2, "slice_cols", "rank-2 tensor required, got " + shape_str(a.shape()));
    require(0 <= c0 && c0 <= c1 && c1 <= a.cols(), "slice_cols",
            "range [" + std::to_string(c0) + "," + std::to_string(c1) + ") out of bounds for " +
                shape_str(a.shape()));
    int m = a.rows(), n = a.cols(), w = c1 - c0;
    std::vector<double> out(static_cast<size_t>(m) * w);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j) out[static_cast<size_t>(i) * w + j] = a.at(i, c0 + j);
    Tensor result({m, w}, std::move(out));
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [an, c0, m, n, w](const std::vector<double>& g, Tape& t) {
                                  if (an < 0) return;
                                  auto& ga = t.grad_buffer(an);
                                  for (int i = 0; i < m; ++i)
                                      for (int j = 0; j < w; ++j)
                                          ga[static_cast<size_t>(i) * n + c0 + j] +=
                                              g[static_cast<size_t>(i) * w + j];
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& index) {
    require(a.rank() == 2, "gather_rows", "rank-2 tensor required, got " + shape_str(a.shape()));
    int n = a.cols();
    for (int i : index)
        require(0 <= i && i < a.rows(), "gather_rows",
                "row index " + std::to_string(i) + " out of range for " + shape_str(a.shape()));
    std::vector<double> out(index.size() * static_cast<size_t>(n));
    for (size_t r = 0; r < index.size(); ++r)
        std::copy(a.data().begin() + static_cast<size_t>(index[r]) * n,
                  a.data().begin() + static_cast<size_t>(index[r] + 1) * n,
                  out.begin() + r * static_cast<size_t>(n));
    Tensor result({static_cast<int>(index.size()), n}, std::move(out));
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        std::vector<int> idx = index;
        int id = tape->record(result.numel(), {an},
                              [an, idx, n](const std::vector<double>& g, Tape& t) {
                                  if (an < 0) return;
                                  auto& ga = t.grad_buffer(an);
                                  for (size_t r = 0; r < idx.size(); ++r)
                                      for (int j = 0; j < n; ++j)
                                          ga[static_cast<size_t>(idx[r]) * n + j] +=
                                              g[r * static_cast<size_t>(n) + j];
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor reshape(const Tensor& a, Shape shape) {
    require(shape_numel(shape) == a.numel(), "reshape",
            "cannot reshape " + shape_str(a.shape()) + " to " + shape_str(shape));
    Tensor result(std::move(shape), a.data());
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        int id = tape->record(result.numel(), {an},
                              [an](const std::vector<double>& g, Tape& t) { t.accumulate(an, g); });
        return tape->attach(std::move(result), id);
    }
    return result;
}

// ---- reductions ----

Tensor reduce_all(const Tensor& a, Reduce kind) {
    require(a.numel() > 0, "reduce", "empty tensor");
    const auto& d = a.data();
    double v = 0.0;
    size_t arg = 0;
    switch (kind) {
        case Reduce::Sum:
        case Reduce::Mean:
            for (double x : d) v += x;
            if (kind == Reduce::Mean) v /= static_cast<double>(d.size());
            break;
        case Reduce::Max:
            v = d[0];
            for (size_t i = 1; i < d.size(); ++i)
                if (d[i] > v) v = d[i], arg = i;
            break;
        case Reduce::Min:
            v = d[0];
            for (size_t i = 1; i < d.size(); ++i)
                if (d[i] < v) v = d[i], arg = i;
            break;
    }
    Tensor result = Tensor::scalar(v);
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        int64_t n = a.numel();
        int id = tape->record(1, {an}, [an, kind, n, arg](const std::vector<double>& g, Tape& t) {
            if (an < 0) return;
            auto& ga = t.grad_buffer(an);
            switch (kind) {
                case Reduce::Sum:
                    for (auto& x : ga) x += g[0];
                    break;
                case Reduce::Mean:
                    for (auto& x : ga) x += g[0] / static_cast<double>(n);
                    break;
                case Reduce::Max:
                case Reduce::Min:
                    ga[arg] += g[0];
                    break;
            }
        });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor reduce_axis(const Tensor& a, Reduce kind, int axis) {
    require(a.rank() == 2, "reduce_axis", "rank-2 tensor required, got " + shape_str(a.shape()));
    require(axis == 0 || axis == 1, "reduce_axis", "axis must be 0 or 1");
    int m = a.rows(), n = a.cols();
    int out_n = axis == 0 ? n : m;
    int span = axis == 0 ? m : n;
    std::vector<double> out(static_cast<size_t>(out_n));
    std::vector<size_t> args(static_cast<size_t>(out_n), 0);
    auto elem = [&](int k, int s) {  // k-th output, s-th element along reduced axis
        return axis == 0 ? a.at(s, k) : a.at(k, s);
    };
    for (int k = 0; k < out_n; ++k) {
        double v = 0.0;
        switch (kind) {
            case Reduce::Sum:
            case Reduce::Mean:
                v = 0.0;
                for (int s = 0; s < span; ++s) v += elem(k, s);
                if (kind == Reduce::Mean) v /= span;
                break;
            case Reduce::Max:
                v = elem(k, 0);
                for (int s = 1; s < span; ++s)
                    if (elem(k, s) > v) v = elem(k, s), args[static_cast<size_t>(k)] = s;
                break;
            case Reduce::Min:
                v = elem(k, 0);
                for (int s = 1; s < span; ++s)
                    if (elem(k, s) < v) v = elem(k, s), args[static_cast<size_t>(k)] = s;
                break;
        }
        out[static_cast<size_t>(k)] = v;
    }
    Tensor result({out_n}, std::move(out));
    if (Tape* tape = result_tape(a)) {
        int an = a.node();
        int id = tape->record(
            result.numel(), {an},
            [an, kind, axis, m, n, span, args](const std::vector<double>& g, Tape& t) {
                if (an < 0) return;
                auto& ga = t.grad_buffer(an);
                auto idx = [&](int k, int s) {
                    return axis == 0 ? static_cast<size_t>(s) * n + k : static_cast<size_t>(k) * n + s;
                };
                int out_n = axis == 0 ? n : m;
                for (int k = 0; k < out_n; ++k) {
                    switch (kind) {
                        case Reduce::Sum:
                            for (int s = 0; s < span; ++s) ga[idx(k, s)] += g[static_cast<size_t>(k)];
                            break;
                        case Reduce::Mean:
                            for (int s = 0; s < span; ++s)
                                ga[idx(k, s)] += g[static_cast<size_t>(k)] / span;
                            break;
                        case Reduce::Max:
                        case Reduce::Min:
                            ga[idx(k, static_cast<int>(args[static_cast<size_t>(k)]))] +=
                                g[static_cast<size_t>(k)];
                            break;
                    }
                }
            });
        return tape->attach(std::move(result), id);
    }
    return result;
}

// ---- losses ----

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse_loss");
    const auto& p = pred.data();
    const auto& y = target.data();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double d = p[i] - y[i];
        acc += d * d;
    }
    double v = acc / static_cast<double>(p.size());
    Tensor result = Tensor::scalar(v);
    if (Tape* tape = result_tape(pred, target)) {
        std::vector<double> pd = pred.data(), yd = target.data();
        int pn = pred.node(), yn = target.node();
        int id = tape->record(1, {pn, yn}, [pd, yd, pn, yn](const std::vector<double>& g, Tape& t) {
            double c = 2.0 * g[0] / static_cast<double>(pd.size());
            if (pn >= 0) {
                auto& gp = t.grad_buffer(pn);
                for (size_t i = 0; i < pd.size(); ++i) gp[i] += c * (pd[i] - yd[i]);
            }
            if (yn >= 0) {
                auto& gy = t.grad_buffer(yn);
                for (size_t i = 0; i < pd.size(); ++i) gy[i] -= c * (pd[i] - yd[i]);
            }
        });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor bce_with_logits_loss(const Tensor& logits, const Tensor& targets) {
    require_same_shape(logits, targets, "bce_with_logits_loss");
    const auto& x = logits.data();
    const auto& y = targets.data();
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        acc += std::max(x[i], 0.0) - x[i] * y[i] + std::log1p(std::exp(-std::abs(x[i])));
    double v = acc / static_cast<double>(x.size());
    Tensor result = Tensor::scalar(v);
    if (Tape* tape = result_tape(logits, targets)) {
        std::vector<double> xd = logits.data(), yd = targets.data();
        int xn = logits.node();
        int id = tape->record(1, {xn}, [xd, yd, xn](const std::vector<double>& g, Tape& t) {
            if (xn < 0) return;
            auto& gx = t.grad_buffer(xn);
            double c = g[0] / static_cast<double>(xd.size());
            for (size_t i = 0; i < xd.size(); ++i) {
                double s = xd[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-xd[i]))
                                        : std::exp(xd[i]) / (1.0 + std::exp(xd[i]));
                gx[i] += c * (s - yd[i]);
            }
        });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels) {
    require(logits.rank() == 2, "cross_entropy_loss",
            "rank-2 logits required, got " + shape_str(logits.shape()));
    require(static_cast<int>(labels.size()) == logits.rows(), "cross_entropy_loss",
            "label count " + std::to_string(labels.size()) + " does not match rows of " +
                shape_str(logits.shape()));
    int m = logits.rows(), n = logits.cols();
    for (int lab : labels)
        require(0 <= lab && lab < n, "cross_entropy_loss",
                "label " + std::to_string(lab) + " out of range for " + std::to_string(n) +
                    " classes");
    double acc = 0.0;
    std::vector<double> probs(logits.data().size());
    for (int i = 0; i < m; ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, logits.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double e = std::exp(logits.at(i, j) - mx);
            probs[static_cast<size_t>(i) * n + j] = e;
            sum += e;
        }
        for (int j = 0; j < n; ++j) probs[static_cast<size_t>(i) * n + j] /= sum;
        acc += mx + std::log(sum) - logits.at(i, labels[static_cast<size_t>(i)]);
    }
    Tensor result = Tensor::scalar(acc / m);
    if (Tape* tape = result_tape(logits)) {
        int ln = logits.node();
        std::vector<int> labs = labels;
        int id = tape->record(1, {ln},
                              [probs, labs, ln, m, n](const std::vector<double>& g, Tape& t) {
                                  if (ln < 0) return;
                                  auto& gl = t.grad_buffer(ln);
                                  double c = g[0] / m;
                                  for (int i = 0; i < m; ++i)
                                      for (int j = 0; j < n; ++j) {
                                          size_t k = static_cast<size_t>(i) * n + j;
                                          double onehot = j == labs[static_cast<size_t>(i)] ? 1.0 : 0.0;
                                          gl[k] += c * (probs[k] - onehot);
                                      }
                              });
        return tape->attach(std::move(result), id);
    }
    return result;
}

Tensor huber_loss(const Tensor& pred, const Tensor& target, double delta) {
    require_same_shape(pred, target, "huber_loss");
    const auto& p = pred.data();
    const auto& y = target.data();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double d = p[i] - y[i];
        double ad = std::abs(d);
        acc += ad <= delta ? 0.5 * d * d : delta * (ad - 0.5 * delta);
    }
    Tensor result = Tensor::scalar(acc / static_cast<double>(p.size()));
    if (Tape* tape = result_tape(pred, target)) {
        std::vector<double> pd = pred.data(), yd = target.data();
        int pn = pred.node();
        int id = tape->record(1, {pn}, [pd, yd, pn, delta](const std::vector<double>& g, Tape& t) {
            if (pn < 0) return;
            auto& gp = t.grad_buffer(pn);
            double c = g[0] / static_cast<double>(pd.size());
            for (size_t i = 0; i < pd.size(); ++i) {
                double d = pd[i] - yd[i];
                gp[i] += c * (std::abs(d) <= delta ? d : (d > 0 ? delta : -delta));
            }
        });
        return tape->attach(std::move(result), id);
    }
    return result;
}

}  // namespace lagco::ad
