#include "ssg/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ssg/util.hpp"

namespace ssg::nn {

Tensor Tensor::from_row(std::vector<double> d) {
    Tensor t;
    t.rows = 1;
    t.cols = static_cast<int>(d.size());
    t.v = std::move(d);
    return t;
}

// -----------------------------
// ParamStore
// -----------------------------

Tensor& ParamStore::create(const std::string& name, int rows, int cols, Init init) {
    if (params_.count(name)) throw std::invalid_argument("parameter '" + name + "' already exists");
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("parameter '" + name + "' has empty shape");
    Tensor t(rows, cols);
    if (init == Init::Glorot) {
        const double a = std::sqrt(6.0 / (rows + cols));
        std::mt19937_64 rng(fnv1a64(name, fnv1a64_mix(fnv1a64("init"), seed_)));
        std::uniform_real_distribution<double> dist(-a, a);
        for (double& x : t.v) x = dist(rng);
    }
    return params_.emplace(name, std::move(t)).first->second;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("unknown parameter '" + name + "'");
    return it->second;
}

void ParamStore::set(const std::string& name, Tensor t) { params_[name] = std::move(t); }

void ParamStore::freeze(const std::string& name) {
    get(name);  // existence check
    frozen_.insert(name);
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [n, _] : params_) out.push_back(n);
    return out;
}

void ParamStore::restore(const std::map<std::string, Tensor>& snap) {
    for (const auto& [n, t] : snap) params_[n] = t;
}

void ParamStore::reset_adam() { adam_.clear(); }

void adam_step(ParamStore& ps, const Grads& grads, double lr, double beta1, double beta2,
               double eps) {
    for (const auto& [name, g] : grads) {
        Tensor& p = ps.get(name);
        if (!p.same_shape(g))
            throw std::invalid_argument("gradient shape mismatch for '" + name + "'");
        for (double x : g.v)
            if (!std::isfinite(x))
                throw std::runtime_error("non-finite gradient for '" + name + "'");
        if (ps.frozen(name)) continue;

        auto& st = ps.adam_[name];
        if (st.t == 0) {
            st.m = Tensor(p.rows, p.cols);
            st.v = Tensor(p.rows, p.cols);
        }
        st.t += 1;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
        for (size_t i = 0; i < p.size(); ++i) {
            st.m.v[i] = beta1 * st.m.v[i] + (1.0 - beta1) * g.v[i];
            st.v.v[i] = beta2 * st.v.v[i] + (1.0 - beta2) * g.v[i] * g.v[i];
            const double mh = st.m.v[i] / bc1;
            const double vh = st.v.v[i] / bc2;
            p.v[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
}

// -----------------------------
// Scalar losses
// -----------------------------

double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double cross_entropy(std::span<const double> logits, int target, std::vector<double>* grad) {
    const int k = static_cast<int>(logits.size());
    if (k < 2) throw std::invalid_argument("cross_entropy: need at least 2 classes");
    if (target < 0 || target >= k) throw std::invalid_argument("cross_entropy: target out of range");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0;
    for (double x : logits) sum += std::exp(x - m);
    const double lse = m + std::log(sum);
    if (grad) {
        grad->resize(k);
        for (int i = 0; i < k; ++i) (*grad)[i] = std::exp(logits[i] - lse);
        (*grad)[target] -= 1.0;
    }
    return lse - logits[target];
}

double binary_cross_entropy(double logit, double target, double* grad) {
    if (grad) *grad = sigmoid(logit) - target;
    // max(x,0) - x*t + log(1 + exp(-|x|))
    return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

// -----------------------------
// Tape
// -----------------------------

namespace {

void check_finite_shape(const Tensor& t, const char* op) {
    if (t.rows < 0 || t.cols < 0) throw std::invalid_argument(std::string(op) + ": bad shape");
}

}  // namespace

Var Tape::push(Tensor val) {
    check_finite_shape(val, "tape");
    Node n;
    n.grad = Tensor(val.rows, val.cols);
    n.val = std::move(val);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Tensor value) { return push(std::move(value)); }

Var Tape::constant_scalar(double value) {
    Tensor t(1, 1);
    t.v[0] = value;
    return push(std::move(t));
}

Var Tape::param(const std::string& name) {
    if (!store_) throw std::logic_error("tape has no parameter store");
    auto it = param_vars_.find(name);
    if (it != param_vars_.end()) return it->second;
    Var v = push(store_->get(name));
    nodes_[v.id].param_name = name;
    param_vars_.emplace(name, v);
    return v;
}

const Tensor& Tape::value(Var v) const { return nodes_.at(v.id).val; }

double Tape::scalar(Var v) const {
    const Tensor& t = value(v);
    if (t.rows != 1 || t.cols != 1) throw std::invalid_argument("scalar: not a 1x1 tensor");
    return t.v[0];
}

const Tensor& Tape::grad(Var v) const { return nodes_.at(v.id).grad; }

Var Tape::matmul(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (A.cols != B.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    Tensor C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
        }
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, a, b, out] {
        const Tensor& A2 = val(a);
        const Tensor& B2 = val(b);
        const Tensor& dC = nodes_[out.id].grad;
        Tensor& dA = g(a);
        Tensor& dB = g(b);
        for (int i = 0; i < A2.rows; ++i)
            for (int j = 0; j < B2.cols; ++j) {
                const double d = dC.at(i, j);
                if (d == 0.0) continue;
                for (int k = 0; k < A2.cols; ++k) {
                    dA.at(i, k) += d * B2.at(k, j);
                    dB.at(k, j) += d * A2.at(i, k);
                }
            }
    };
    return out;
}

Var Tape::add(Var a, Var b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (!A.same_shape(B)) throw std::invalid_argument("add: shape mismatch");
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.v[i] += B.v[i];
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, a, b, out] {
        const Tensor& dC = nodes_[out.id].grad;
        for (size_t i = 0; i < dC.size(); ++i) {
            g(a).v[i] += dC.v[i];
            g(b).v[i] += dC.v[i];
        }
    };
    return out;
}

Var Tape::add_rowvec(Var m, Var row) {
    const Tensor& M = val(m);
    const Tensor& R = val(row);
    if (R.rows != 1 || R.cols != M.cols) throw std::invalid_argument("add_rowvec: shape mismatch");
    Tensor C = M;
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) C.at(i, j) += R.at(0, j);
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, m, row, out] {
        const Tensor& dC = nodes_[out.id].grad;
        Tensor& dM = g(m);
        Tensor& dR = g(row);
        for (int i = 0; i < dC.rows; ++i)
            for (int j = 0; j < dC.cols; ++j) {
                dM.at(i, j) += dC.at(i, j);
                dR.at(0, j) += dC.at(i, j);
            }
    };
    return out;
}

Var Tape::scale(Var a, double s) {
    Tensor C = val(a);
    for (double& x : C.v) x *= s;
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, a, s, out] {
        const Tensor& dC = nodes_[out.id].grad;
        for (size_t i = 0; i < dC.size(); ++i) g(a).v[i] += s * dC.v[i];
    };
    return out;
}

Var Tape::add_scaled(Var a, Var b, double s) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (!A.same_shape(B)) throw std::invalid_argument("add_scaled: shape mismatch");
    Tensor C = A;
    for (size_t i = 0; i < C.size(); ++i) C.v[i] += s * B.v[i];
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, a, b, s, out] {
        const Tensor& dC = nodes_[out.id].grad;
        for (size_t i = 0; i < dC.size(); ++i) {
            g(a).v[i] += dC.v[i];
            g(b).v[i] += s * dC.v[i];
        }
    };
    return out;
}

Var Tape::relu(Var a) {
    Tensor C = val(a);
    for (double& x : C.v) x = std::max(0.0, x);
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, a, out] {
        const Tensor& A = val(a);
        const Tensor& dC = nodes_[out.id].grad;
        for (size_t i = 0; i < dC.size(); ++i)
            if (A.v[i] > 0) g(a).v[i] += dC.v[i];
    };
    return out;
}

Var Tape::linear(Var x, Var w, Var b) { return add_rowvec(matmul(x, w), b); }

Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    const int rows = val(parts[0]).rows;
    int cols = 0;
    for (Var p : parts) {
        if (val(p).rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
        cols += val(p).cols;
    }
    Tensor C(rows, cols);
    int off = 0;
    for (Var p : parts) {
        const Tensor& P = val(p);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < P.cols; ++j) C.at(i, off + j) = P.at(i, j);
        off += P.cols;
    }
    Var out = push(std::move(C));
    std::vector<Var> ps = parts;
    nodes_[out.id].back = [this, ps, out] {
        const Tensor& dC = nodes_[out.id].grad;
        int off2 = 0;
        for (Var p : ps) {
            Tensor& dP = g(p);
            for (int i = 0; i < dP.rows; ++i)
                for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += dC.at(i, off2 + j);
            off2 += dP.cols;
        }
    };
    return out;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
    const int cols = val(parts[0]).cols;
    int rows = 0;
    for (Var p : parts) {
        if (val(p).cols != cols) throw std::invalid_argument("concat_rows: column mismatch");
        rows += val(p).rows;
    }
    Tensor C(rows, cols);
    int off = 0;
    for (Var p : parts) {
        const Tensor& P = val(p);
        for (int i = 0; i < P.rows; ++i)
            for (int j = 0; j < cols; ++j) C.at(off + i, j) = P.at(i, j);
        off += P.rows;
    }
    Var out = push(std::move(C));
    std::vector<Var> ps = parts;
    nodes_[out.id].back = [this, ps, out] {
        const Tensor& dC = nodes_[out.id].grad;
        int off2 = 0;
        for (Var p : ps) {
            Tensor& dP = g(p);
            for (int i = 0; i < dP.rows; ++i)
                for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += dC.at(off2 + i, j);
            off2 += dP.rows;
        }
    };
    return out;
}

Var Tape::gather_rows(Var m, std::vector<int> idx) {
    const Tensor& M = val(m);
    for (int i : idx)
        if (i < 0 || i >= M.rows) throw std::invalid_argument("gather_rows: index out of range");
    Tensor C(static_cast<int>(idx.size()), M.cols);
    for (size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < M.cols; ++j) C.at(static_cast<int>(r), j) = M.at(idx[r], j);
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, m, idx, out] {
        const Tensor& dC = nodes_[out.id].grad;
        Tensor& dM = g(m);
        for (size_t r = 0; r < idx.size(); ++r)
            for (int j = 0; j < dC.cols; ++j) dM.at(idx[r], j) += dC.at(static_cast<int>(r), j);
    };
    return out;
}

Var Tape::segment_mean(Var m, std::vector<int> seg, int n_segments) {
    const Tensor& M = val(m);
    if (static_cast<int>(seg.size()) != M.rows)
        throw std::invalid_argument("segment_mean: segment ids do not match rows");
    std::vector<int> count(n_segments, 0);
    for (int s : seg) {
        if (s < 0 || s >= n_segments) throw std::invalid_argument("segment_mean: id out of range");
        count[s] += 1;
    }
    Tensor C(n_segments, M.cols);
    for (int r = 0; r < M.rows; ++r)
        for (int j = 0; j < M.cols; ++j) C.at(seg[r], j) += M.at(r, j);
    for (int s = 0; s < n_segments; ++s)
        if (count[s] > 0)
            for (int j = 0; j < M.cols; ++j) C.at(s, j) /= count[s];
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, m, seg, count, out] {
        const Tensor& dC = nodes_[out.id].grad;
        Tensor& dM = g(m);
        for (int r = 0; r < dM.rows; ++r) {
            const int s = seg[r];
            for (int j = 0; j < dM.cols; ++j) dM.at(r, j) += dC.at(s, j) / count[s];
        }
    };
    return out;
}

Var Tape::mean_rows(Var m) {
    const Tensor& M = val(m);
    Tensor C(1, M.cols);
    if (M.rows > 0) {
        for (int r = 0; r < M.rows; ++r)
            for (int j = 0; j < M.cols; ++j) C.at(0, j) += M.at(r, j);
        for (int j = 0; j < M.cols; ++j) C.at(0, j) /= M.rows;
    }
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, m, out] {
        const Tensor& dC = nodes_[out.id].grad;
        Tensor& dM = g(m);
        if (dM.rows == 0) return;
        for (int r = 0; r < dM.rows; ++r)
            for (int j = 0; j < dM.cols; ++j) dM.at(r, j) += dC.at(0, j) / dM.rows;
    };
    return out;
}

Var Tape::softmax_cross_entropy_mean(Var logits, std::vector<int> targets) {
    const Tensor& L = val(logits);
    if (static_cast<int>(targets.size()) != L.rows)
        throw std::invalid_argument("softmax_cross_entropy_mean: target count mismatch");
    if (targets.empty()) return constant_scalar(0.0);
    double total = 0;
    for (int r = 0; r < L.rows; ++r) {
        std::span<const double> row(L.v.data() + static_cast<size_t>(r) * L.cols, L.cols);
        total += cross_entropy(row, targets[r]);
    }
    Tensor C(1, 1);
    C.v[0] = total / L.rows;
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, logits, targets, out] {
        const Tensor& L2 = val(logits);
        const double d = nodes_[out.id].grad.v[0] / L2.rows;
        Tensor& dL = g(logits);
        std::vector<double> gr;
        for (int r = 0; r < L2.rows; ++r) {
            std::span<const double> row(L2.v.data() + static_cast<size_t>(r) * L2.cols, L2.cols);
            cross_entropy(row, targets[r], &gr);
            for (int j = 0; j < L2.cols; ++j) dL.at(r, j) += d * gr[j];
        }
    };
    return out;
}

Var Tape::bce_with_logits_mean(Var logits, std::vector<double> targets) {
    const Tensor& L = val(logits);
    if (L.cols != 1 || static_cast<int>(targets.size()) != L.rows)
        throw std::invalid_argument("bce_with_logits_mean: shape mismatch");
    if (targets.empty()) return constant_scalar(0.0);
    double total = 0;
    for (int r = 0; r < L.rows; ++r) total += binary_cross_entropy(L.at(r, 0), targets[r]);
    Tensor C(1, 1);
    C.v[0] = total / L.rows;
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, logits, targets, out] {
        const Tensor& L2 = val(logits);
        const double d = nodes_[out.id].grad.v[0] / L2.rows;
        Tensor& dL = g(logits);
        for (int r = 0; r < L2.rows; ++r)
            dL.at(r, 0) += d * (sigmoid(L2.at(r, 0)) - targets[r]);
    };
    return out;
}

Var Tape::bce_multilabel_mean(Var logits, std::vector<double> targets) {
    const Tensor& L = val(logits);
    if (L.rows != 1 || static_cast<int>(targets.size()) != L.cols)
        throw std::invalid_argument("bce_multilabel_mean: shape mismatch");
    if (targets.empty()) return constant_scalar(0.0);
    double total = 0;
    for (int j = 0; j < L.cols; ++j) total += binary_cross_entropy(L.at(0, j), targets[j]);
    Tensor C(1, 1);
    C.v[0] = total / L.cols;
    Var out = push(std::move(C));
    nodes_[out.id].back = [this, logits, targets, out] {
        const Tensor& L2 = val(logits);
        const double d = nodes_[out.id].grad.v[0] / L2.cols;
        Tensor& dL = g(logits);
        for (int j = 0; j < L2.cols; ++j)
            dL.at(0, j) += d * (sigmoid(L2.at(0, j)) - targets[j]);
    };
    return out;
}

void Tape::backward(Var loss) {
    const Tensor& t = value(loss);
    if (t.rows != 1 || t.cols != 1) throw std::invalid_argument("backward: loss must be scalar");
    for (auto& n : nodes_) std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
    nodes_[loss.id].grad.v[0] = 1.0;
    for (int i = loss.id; i >= 0; --i)
        if (nodes_[i].back) nodes_[i].back();
}

Grads Tape::param_grads() const {
    Grads out;
    for (const auto& [name, var] : param_vars_) out[name] = nodes_[var.id].grad;
    return out;
}

// -----------------------------
// Finite differences
// -----------------------------

GradCheckResult grad_check(const std::function<double(ParamStore&, Grads*)>& f, ParamStore& ps,
                           std::vector<std::string> names, double h) {
    if (names.empty()) {
        for (const auto& n : ps.names())
            if (!ps.frozen(n)) names.push_back(n);
    }
    Grads analytic;
    f(ps, &analytic);

    GradCheckResult res;
    for (const auto& name : names) {
        Tensor& p = ps.get(name);
        auto it = analytic.find(name);
        const Tensor* a = it == analytic.end() ? nullptr : &it->second;
        for (size_t i = 0; i < p.size(); ++i) {
            const double saved = p.v[i];
            p.v[i] = saved + h;
            const double fp = f(ps, nullptr);
            p.v[i] = saved - h;
            const double fm = f(ps, nullptr);
            p.v[i] = saved;
            const double fd = (fp - fm) / (2 * h);
            const double an = a ? a->v[i] : 0.0;
            const double rel = std::abs(an - fd) / (std::abs(an) + std::abs(fd) + 1e-12);
            if (rel > res.max_rel_err) {
                res.max_rel_err = rel;
                res.worst_param = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return res;
}

}  // namespace ssg::nn
