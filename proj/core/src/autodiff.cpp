#include "cinc/autodiff.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace cinc::ad {

double stable_sigmoid(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        s = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(s, lo, hi);
}

const Matrix& Value::data() const { return tape_->data(id_); }
const Matrix& Value::grad() const { return tape_->grad(id_); }

double Value::scalar() const {
    const Matrix& d = data();
    if (d.rows() != 1 || d.cols() != 1)
        throw shape_error("Value::scalar: node is " + std::to_string(d.rows()) + "x" +
                          std::to_string(d.cols()) + ", expected 1x1");
    return d(0, 0);
}

std::string Tape::shape_of(const Matrix& m) {
    return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

void Tape::check_same_tape(Value v, const char* op) const {
    if (v.tape() != this)
        throw std::logic_error(std::string(op) + ": operand belongs to a different tape");
}

Value Tape::emplace(Matrix data, std::function<void(Tape&)> back) {
    Node n;
    n.grad = Matrix::Zero(data.rows(), data.cols());
    n.data = std::move(data);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Value(this, nodes_.size() - 1);
}

Value Tape::leaf(Matrix data) { return emplace(std::move(data), nullptr); }

Value Tape::matmul(Value a, Value b) {
    check_same_tape(a, "matmul");
    check_same_tape(b, "matmul");
    if (a.data().cols() != b.data().rows())
        throw shape_error("matmul: inner dimensions disagree: " + shape_of(a.data()) + " vs " +
                          shape_of(b.data()));
    Value out = emplace(a.data() * b.data(), nullptr);
    const std::size_t ia = a.id(), ib = b.id(), io = out.id();
    nodes_[io].back = [ia, ib, io](Tape& t) {
        const Matrix& g = t.nodes_[io].grad;
        t.nodes_[ia].grad.noalias() += g * t.nodes_[ib].data.transpose();
        t.nodes_[ib].grad.noalias() += t.nodes_[ia].data.transpose() * g;
    };
    return out;
}

Value Tape::matmul_const(Value a, const Matrix* b) {
    check_same_tape(a, "matmul_const");
    if (a.data().cols() != b->rows())
        throw shape_error("matmul: inner dimensions disagree: " + shape_of(a.data()) + " vs " +
                          shape_of(*b));
    Value out = emplace(a.data() * (*b), nullptr);
    const std::size_t ia = a.id(), io = out.id();
    nodes_[io].back = [ia, io, b](Tape& t) {
        t.nodes_[ia].grad.noalias() += t.nodes_[io].grad * b->transpose();
    };
    return out;
}

Value Tape::add(Value a, Value b) {
    check_same_tape(a, "add");
    check_same_tape(b, "add");
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw shape_error("add: shapes disagree: " + shape_of(a.data()) + " vs " + shape_of(b.data()));
    Value out = emplace(a.data() + b.data(), nullptr);
    const std::size_t ia = a.id(), ib = b.id(), io = out.id();
    nodes_[io].back = [ia, ib, io](Tape& t) {
        t.nodes_[ia].grad += t.nodes_[io].grad;
        t.nodes_[ib].grad += t.nodes_[io].grad;
    };
    return out;
}

Value Tape::add_row(Value a, Value bias) {
    check_same_tape(a, "add_row");
    check_same_tape(bias, "add_row");
    if (bias.rows() != 1 || bias.cols() != a.cols())
        throw shape_error("add_row: bias must be [1x" + std::to_string(a.cols()) + "], got " +
                          shape_of(bias.data()));
    Matrix out = a.data();
    out.rowwise() += bias.data().row(0);
    Value v = emplace(std::move(out), nullptr);
    const std::size_t ia = a.id(), ib = bias.id(), io = v.id();
    nodes_[io].back = [ia, ib, io](Tape& t) {
        const Matrix& g = t.nodes_[io].grad;
        t.nodes_[ia].grad += g;
        t.nodes_[ib].grad += g.colwise().sum();
    };
    return v;
}

Value Tape::add_row_const(Value a, const Matrix* bias) {
    check_same_tape(a, "add_row_const");
    if (bias->rows() != 1 || bias->cols() != a.cols())
        throw shape_error("add_row: bias must be [1x" + std::to_string(a.cols()) + "], got " +
                          shape_of(*bias));
    Matrix out = a.data();
    out.rowwise() += bias->row(0);
    Value v = emplace(std::move(out), nullptr);
    const std::size_t ia = a.id(), io = v.id();
    nodes_[io].back = [ia, io](Tape& t) { t.nodes_[ia].grad += t.nodes_[io].grad; };
    return v;
}

Value Tape::scale(Value a, double k) {
    check_same_tape(a, "scale");
    Value out = emplace(k * a.data(), nullptr);
    const std::size_t ia = a.id(), io = out.id();
    nodes_[io].back = [ia, io, k](Tape& t) { t.nodes_[ia].grad += k * t.nodes_[io].grad; };
    return out;
}

Value Tape::relu(Value a) {
    check_same_tape(a, "relu");
    Value out = emplace(a.data().cwiseMax(0.0), nullptr);
    const std::size_t ia = a.id(), io = out.id();
    nodes_[io].back = [ia, io](Tape& t) {
        const Matrix& in = t.nodes_[ia].data;
        t.nodes_[ia].grad.array() +=
            (in.array() > 0.0).select(t.nodes_[io].grad.array(), 0.0);
    };
    return out;
}

Value Tape::sigmoid(Value a) {
    check_same_tape(a, "sigmoid");
    Matrix out = a.data().unaryExpr([](double x) { return stable_sigmoid(x); });
    Value v = emplace(std::move(out), nullptr);
    const std::size_t ia = a.id(), io = v.id();
    nodes_[io].back = [ia, io](Tape& t) {
        const auto& s = t.nodes_[io].data.array();
        t.nodes_[ia].grad.array() += t.nodes_[io].grad.array() * s * (1.0 - s);
    };
    return v;
}

Value Tape::sum(Value a) {
    check_same_tape(a, "sum");
    Matrix out(1, 1);
    out(0, 0) = a.data().sum();
    Value v = emplace(std::move(out), nullptr);
    const std::size_t ia = a.id(), io = v.id();
    nodes_[io].back = [ia, io](Tape& t) {
        t.nodes_[ia].grad.array() += t.nodes_[io].grad(0, 0);
    };
    return v;
}

Value Tape::mean_square(Value a, double target) {
    check_same_tape(a, "mean_square");
    const Eigen::Index n = a.data().size();
    if (n == 0) throw numeric_error("mean_square: empty input");
    Matrix out(1, 1);
    out(0, 0) = (a.data().array() - target).square().mean();
    Value v = emplace(std::move(out), nullptr);
    const std::size_t ia = a.id(), io = v.id();
    nodes_[io].back = [ia, io, target, n](Tape& t) {
        const double g = t.nodes_[io].grad(0, 0);
        t.nodes_[ia].grad.array() +=
            g * 2.0 / static_cast<double>(n) * (t.nodes_[ia].data.array() - target);
    };
    return v;
}

Value Tape::mean_abs_diff(Value a, Value b) {
    check_same_tape(a, "mean_abs_diff");
    check_same_tape(b, "mean_abs_diff");
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw shape_error("mean_abs_diff: shapes disagree: " + shape_of(a.data()) + " vs " +
                          shape_of(b.data()));
    const Eigen::Index n = a.data().size();
    if (n == 0) throw numeric_error("mean_abs_diff: empty input");
    Matrix out(1, 1);
    out(0, 0) = (a.data() - b.data()).array().abs().mean();
    Value v = emplace(std::move(out), nullptr);
    const std::size_t ia = a.id(), ib = b.id(), io = v.id();
    nodes_[io].back = [ia, ib, io, n](Tape& t) {
        const double g = t.nodes_[io].grad(0, 0) / static_cast<double>(n);
        // sign() is 0 at ties, which is our chosen subgradient
        Matrix s = (t.nodes_[ia].data - t.nodes_[ib].data).array().sign();
        t.nodes_[ia].grad.noalias() += g * s;
        t.nodes_[ib].grad.noalias() -= g * s;
    };
    return v;
}

void Tape::backward(Value loss) {
    check_same_tape(loss, "backward");
    if (consumed_) throw std::logic_error("Tape::backward: tape already consumed; reset() first");
    if (loss.rows() != 1 || loss.cols() != 1)
        throw shape_error("backward: loss must be 1x1, got " + shape_of(loss.data()));
    consumed_ = true;
    nodes_[loss.id()].grad(0, 0) = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back(*this);
    }
}

void Tape::reset() {
    nodes_.clear();
    consumed_ = false;
}

} // namespace cinc::ad
