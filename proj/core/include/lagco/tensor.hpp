#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lagco::ad {

class Tape;

struct TensorError : std::runtime_error {
    explicit TensorError(const std::string& what) : std::runtime_error(what) {}
};

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
int64_t shape_numel(const Shape& s);

// Dense row-major f64 tensor. When `tape` is set the tensor is attached to a
// node of that tape and participates in reverse-mode differentiation.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double v);
    static Tensor row_vector(std::vector<double> v);
    static Tensor matrix(int rows, int cols, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    int rows() const;
    int cols() const;

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }
    double value() const;  // scalar tensors only
    double at(int i) const { return data_[static_cast<size_t>(i)]; }
    double at(int r, int c) const;

    bool attached() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    int node() const { return node_; }

    Tensor detached() const { return Tensor(shape_, data_); }

private:
    friend class Tape;
    Shape shape_;
    std::vector<double> data_;
    Tape* tape_ = nullptr;
    int node_ = -1;
};

using GradMap = std::unordered_map<int, std::vector<double>>;

// Records one tape node per produced tensor. Nodes are appended in execution
// order, which is already topological; backward walks the list once in
// reverse and frees non-leaf gradients as it goes.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Registers a leaf (parameter) and returns an attached view of it.
    Tensor watch(const Tensor& value);

    // Gradient of the scalar `loss` w.r.t. every leaf, keyed by node id.
    GradMap backward(const Tensor& loss);

    bool consumed() const { return consumed_; }
    size_t size() const { return nodes_.size(); }

    // -- used by op implementations --
    using BackwardFn = std::function<void(const std::vector<double>& out_grad, Tape& tape)>;
    int record(int64_t numel, std::vector<int> inputs, BackwardFn fn);
    void accumulate(int node, const std::vector<double>& grad);
    void accumulate_scaled(int node, const std::vector<double>& grad, double scale);
    std::vector<double>& grad_buffer(int node);
    Tensor attach(Tensor value, int node_id);

private:
    struct Node {
        int64_t numel = 0;
        std::vector<int> inputs;
        BackwardFn backward;
        std::vector<double> grad;
        bool leaf = false;
    };
    std::vector<Node> nodes_;
    bool consumed_ = false;
};

void check_finite(const Tensor& t, const char* op);

// ---- forward ops (record on the tape when any input is attached) ----

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor add_rowwise(const Tensor& a, const Tensor& bias);   // [m,n] + [n]
Tensor add_colwise(const Tensor& a, const Tensor& col);    // [m,n] + [m]
Tensor mul_rowwise(const Tensor& a, const Tensor& v);      // [m,n] * [n]
Tensor scale(const Tensor& a, double c);
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor sigmoid(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);
Tensor l2_normalize_rows(const Tensor& a, double eps = 1e-12);
Tensor concat(const Tensor& a, const Tensor& b, int axis);
Tensor concat_many(const std::vector<Tensor>& parts, int axis);
Tensor slice_rows(const Tensor& a, int r0, int r1);
Tensor slice_cols(const Tensor& a, int c0, int c1);
Tensor gather_rows(const Tensor& a, const std::vector<int>& index);
Tensor reshape(const Tensor& a, Shape shape);

enum class Reduce { Sum, Mean, Max, Min };
Tensor reduce_all(const Tensor& a, Reduce kind);
Tensor reduce_axis(const Tensor& a, Reduce kind, int axis);  // rank-2 only
inline Tensor reduce_sum(const Tensor& a) { return reduce_all(a, Reduce::Sum); }
inline Tensor reduce_mean(const Tensor& a) { return reduce_all(a, Reduce::Mean); }
inline Tensor reduce_max(const Tensor& a) { return reduce_all(a, Reduce::Max); }
inline Tensor reduce_min(const Tensor& a) { return reduce_all(a, Reduce::Min); }

Tensor mse_loss(const Tensor& pred, const Tensor& target);
Tensor bce_with_logits_loss(const Tensor& logits, const Tensor& targets);
Tensor cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels);
Tensor huber_loss(const Tensor& pred, const Tensor& target, double delta = 1.0);

}  // namespace lagco::ad
