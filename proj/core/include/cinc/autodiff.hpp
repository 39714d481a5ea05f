#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

#include "cinc/errors.hpp"

namespace cinc::ad {

using Matrix = Eigen::MatrixXd;

/// Overflow-safe logistic, clamped into the open interval (0, 1) so extreme
/// finite inputs never round to an exact 0 or 1.
double stable_sigmoid(double x);

class Tape;

/// Handle to one node on a Tape.  Rows are the batch axis, columns are
/// features.  data() and grad() always have identical shape; grads are
/// all-zero until Tape::backward runs.
class Value {
public:
    Value() = default;

    const Matrix& data() const;
    const Matrix& grad() const;
    Eigen::Index rows() const { return data().rows(); }
    Eigen::Index cols() const { return data().cols(); }

    /// Value of a 1x1 node.
    double scalar() const;

    bool valid() const { return tape_ != nullptr; }
    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }

private:
    friend class Tape;
    Value(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode computation record.  Nodes are stored in creation order,
/// which is already a topological order; backward() walks them strictly in
/// reverse.  A tape is single-use: after one backward pass it must be
/// reset() before recording again.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// New leaf node holding `data`; grad starts at zero.
    Value leaf(Matrix data);

    /// a[m x k] * b[k x n] -> [m x n]
    Value matmul(Value a, Value b);

    /// a[m x k] * B[k x n] with constant B (no gradient into B).
    Value matmul_const(Value a, const Matrix* b);

    /// Elementwise sum of two identically shaped nodes.
    Value add(Value a, Value b);

    /// a[m x n] + bias[1 x n] broadcast over rows.
    Value add_row(Value a, Value bias);

    /// a[m x n] + Bias[1 x n] with constant bias.
    Value add_row_const(Value a, const Matrix* bias);

    /// k * a, elementwise, constant k.
    Value scale(Value a, double k);

    /// Elementwise max(0, a).
    Value relu(Value a);

    /// Elementwise logistic 1/(1+e^-a), computed without overflow.
    Value sigmoid(Value a);

    /// Sum of all elements -> [1 x 1].
    Value sum(Value a);

    /// Mean over all elements of (a - target)^2 -> [1 x 1].
    Value mean_square(Value a, double target);

    /// Mean over all elements of |a - b| -> [1 x 1]; subgradient 0 at ties.
    Value mean_abs_diff(Value a, Value b);

    /// Seed d(loss)/d(loss) = 1 and accumulate gradients into every node
    /// reachable from `loss`, walking records in reverse creation order.
    /// The tape is consumed afterwards.
    void backward(Value loss);

    /// Clear all records so the tape can be reused.
    void reset();

    std::size_t size() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    const Matrix& data(std::size_t id) const { return nodes_[id].data; }
    const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }

private:
    struct Node {
        Matrix data;
        Matrix grad;
        std::function<void(Tape&)> back; // empty for leaves
    };

    Value emplace(Matrix data, std::function<void(Tape&)> back);
    void check_same_tape(Value v, const char* op) const;
    static std::string shape_of(const Matrix& m);

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

} // namespace cinc::ad
