#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace ssg::nn {

// Dense row-major 2-D tensor of 64-bit reals.
struct Tensor {
    int rows = 0, cols = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * static_cast<size_t>(c), 0.0) {}

    static Tensor from_row(std::vector<double> d);

    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Tensor&) const = default;
};

using Grads = std::map<std::string, Tensor>;

enum class Init { Glorot, Zero };

// Named parameter tensors plus Adam state and a frozen-name set. Glorot
// initialization draws from a stream derived from (store seed, name), so a
// parameter's initial values never depend on what else lives in the store.
class ParamStore {
  public:
    explicit ParamStore(uint64_t seed) : seed_(seed) {}

    Tensor& create(const std::string& name, int rows, int cols, Init init);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) > 0; }
    void set(const std::string& name, Tensor t);

    void freeze(const std::string& name);
    bool frozen(const std::string& name) const { return frozen_.count(name) > 0; }

    uint64_t seed() const { return seed_; }
    std::vector<std::string> names() const;
    const std::map<std::string, Tensor>& all() const { return params_; }
    std::map<std::string, Tensor> snapshot() const { return params_; }
    void restore(const std::map<std::string, Tensor>& snap);
    void reset_adam();

    friend void adam_step(ParamStore& ps, const Grads& grads, double lr, double beta1,
                          double beta2, double eps);

  private:
    struct AdamState {
        Tensor m, v;
        long t = 0;
    };

    uint64_t seed_ = 0;
    std::map<std::string, Tensor> params_;
    std::map<std::string, AdamState> adam_;
    std::set<std::string> frozen_;
};

// Standard Adam update over every name in grads. Frozen parameters and
// parameters without a gradient entry receive zero updates. Throws on a
// non-finite gradient.
void adam_step(ParamStore& ps, const Grads& grads, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

struct Var {
    int id = -1;
    bool ok() const { return id >= 0; }
};

// Reverse-mode tape over Tensor ops. Build one per forward pass; parameters
// are leaves bound by name to a ParamStore. backward() fills gradients which
// param_grads() exports keyed by parameter name.
class Tape {
  public:
    explicit Tape(const ParamStore* store = nullptr) : store_(store) {}

    Var input(Tensor value);
    Var constant_scalar(double value);
    Var param(const std::string& name);  // memoized per name

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var add_rowvec(Var m, Var row);          // m x n plus 1 x n broadcast
    Var scale(Var a, double s);
    Var add_scaled(Var a, Var b, double s);  // a + s * b, same shape
    Var relu(Var a);
    Var linear(Var x, Var w, Var b);         // x*w + b

    Var concat_cols(const std::vector<Var>& parts);
    Var concat_rows(const std::vector<Var>& parts);
    Var gather_rows(Var m, std::vector<int> idx);
    // Mean of rows sharing a segment id; segments with no rows yield zeros.
    Var segment_mean(Var m, std::vector<int> seg, int n_segments);
    Var mean_rows(Var m);                    // 1 x n; zero rows yield zeros

    // Scalar losses (1 x 1). Empty targets yield a constant 0.
    Var softmax_cross_entropy_mean(Var logits, std::vector<int> targets);
    Var bce_with_logits_mean(Var logits, std::vector<double> targets);   // logits m x 1
    Var bce_multilabel_mean(Var logits, std::vector<double> targets);    // logits 1 x k

    const Tensor& value(Var v) const;
    double scalar(Var v) const;

    void backward(Var loss);
    const Tensor& grad(Var v) const;
    Grads param_grads() const;

  private:
    struct Node {
        Tensor val;
        Tensor grad;
        std::function<void()> back;
        std::string param_name;  // non-empty for parameter leaves
    };

    Var push(Tensor val);
    Tensor& g(Var v) { return nodes_[v.id].grad; }
    const Tensor& val(Var v) const { return nodes_[v.id].val; }

    const ParamStore* store_ = nullptr;
    std::vector<Node> nodes_;
    std::map<std::string, Var> param_vars_;
};

double sigmoid(double x);

// -log softmax(logits)[target]; optionally fills d loss / d logits.
double cross_entropy(std::span<const double> logits, int target, std::vector<double>* grad = nullptr);

// Stable binary cross-entropy on a logit; no overflow for |logit| <= 1e4.
double binary_cross_entropy(double logit, double target, double* grad = nullptr);

struct GradCheckResult {
    double max_rel_err = 0;
    std::string worst_param;
};

// f evaluates the objective at the store's current values and, when grads is
// non-null, fills analytic gradients. Central differences with step h are
// compared coordinate-wise against the analytic values.
GradCheckResult grad_check(const std::function<double(ParamStore&, Grads*)>& f, ParamStore& ps,
                           std::vector<std::string> names = {}, double h = 1e-5);

}  // namespace ssg::nn
