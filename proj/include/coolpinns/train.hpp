#pragma once

#include <coolpinns/loss.hpp>

#include <functional>
#include <vector>

namespace coolpinns {

// loss and, when grad is non-null, its gradient at x
using Objective = std::function<Scalar(const VecX& x, VecX* grad)>;

struct AdamOptions {
  Scalar lr = 1e-3;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

// first-moment / second-moment stepper with bias correction
class Adam {
 public:
  Adam(Eigen::Index n, const AdamOptions& opts);

  void step(VecX& x, const VecX& grad);
  int steps_taken() const { return t_; }

 private:
  AdamOptions o_;
  ArrX m_, v_;
  int t_ = 0;
};

struct LbfgsOptions {
  int memory = 50;
  int max_iters = 2000;
  Scalar grad_tol = 1e-10;
  // strong Wolfe constants: sufficient decrease and curvature
  Scalar c1 = 1e-4;
  Scalar c2 = 0.9;
  int max_evals_per_search = 60;
};

struct LbfgsReport {
  int iters = 0;
  int evals = 0;
  Scalar final_loss = 0;
  Scalar grad_norm = 0;
  int line_search_failures = 0;
  bool converged = false;
};

// Two-loop recursion with strong Wolfe line search. A failed search resets
// the memory and retries along steepest descent; a second failure ends the
// run with converged = false (reported, not fatal).
LbfgsReport lbfgs_minimize(
    const Objective& f, VecX& x, const LbfgsOptions& opts,
    const std::function<void(int iter, Scalar loss, Scalar grad_norm,
                             const VecX& x)>& per_iter = {});

struct TrainOptions {
  int adam_steps = 10000;
  Scalar adam_lr = 1e-3;
  int lbfgs_iters = 2000;
  int log_every = 100;
  bool inverse = false;  // appends kappa = ln K to the unknowns
  Scalar kappa0 = 0.0;
};

struct TrainRecord {
  int epoch = 0;
  char phase = 'a';  // 'a' Adam, 'l' quasi-Newton
  Scalar total = 0, pde = 0, bc_neumann = 0, bc_dirichlet = 0, jump = 0,
         data = 0;
  Scalar grad_norm = 0;
  Scalar kappa = 0;
};

struct TrainResult {
  std::vector<TrainRecord> history;
  Scalar best_loss = 0;
  Scalar kappa = 0;  // final (inverse runs; ln of the fixed K otherwise)
  bool diverged = false;
  int line_search_failures = 0;
  LossResult final_loss;
};

// Adam phase then optional quasi-Newton phase on the total loss; the best
// iterate seen is restored into the model (and kappa) at the end. A
// non-finite loss aborts the run with diverged = true.
TrainResult train(FieldModel& model, const CollocationSet& set,
                  const Domain& dom, const ModelParams& p,
                  const LossOptions& lopts, const TrainOptions& topts);

}  // namespace coolpinns
