#include <coolpinns/train.hpp>

#include <cmath>
#include <deque>
#include <limits>

namespace coolpinns {

Adam::Adam(Eigen::Index n, const AdamOptions& opts)
    : o_(opts), m_(ArrX::Zero(n)), v_(ArrX::Zero(n)) {}

void Adam::step(VecX& x, const VecX& grad) {
  ++t_;
  const auto g = grad.array();
  m_ = o_.beta1 * m_ + (1.0 - o_.beta1) * g;
  v_ = o_.beta2 * v_ + (1.0 - o_.beta2) * g.square();
  const Scalar bc1 = 1.0 - std::pow(o_.beta1, t_);
  const Scalar bc2 = 1.0 - std::pow(o_.beta2, t_);
  x.array() -= o_.lr * (m_ / bc1) / ((v_ / bc2).sqrt() + o_.eps);
}

namespace {

struct SearchState {
  VecX xt, gt;      // trial point and its gradient
  Scalar phi = 0;   // f at the accepted step
  Scalar alpha = 0;
  bool ok = false;
  int evals = 0;
};

// strong Wolfe line search along d from x (bracket then bisection zoom)
SearchState wolfe_search(const Objective& f, const VecX& x, const VecX& d,
                         Scalar phi0, Scalar dphi0, Scalar alpha0,
                         const LbfgsOptions& o) {
  SearchState st;
  st.xt.resizeLike(x);
  st.gt.resizeLike(x);

  const auto eval = [&](Scalar a) {
    st.xt = x + a * d;
    st.phi = f(st.xt, &st.gt);
    ++st.evals;
    return st.gt.dot(d);
  };
  const auto armijo_fails = [&](Scalar a, Scalar phi) {
    return !std::isfinite(phi) || phi > phi0 + o.c1 * a * dphi0;
  };
  const auto wolfe_holds = [&](Scalar a, Scalar dphi) {
    return !armijo_fails(a, st.phi) && std::abs(dphi) <= -o.c2 * dphi0;
  };

  // A loose curvature constant accepts steps far from the slice minimum,
  // which costs the memory its conjugate-gradient accuracy on near-quadratic
  // landscapes. Secant steps toward the slice's stationary point (exact when
  // the slice is quadratic) tighten the accept as long as each trial stays a
  // strong Wolfe point with no higher value; the last legal point stands.
  const auto accept = [&](Scalar a, Scalar dphi) {
    Scalar a_lo = 0, dphi_lo = dphi0;
#ifdef COOLPINNS_SECANT_LS
    for (int r = 0; r < 2; ++r) {
      if (std::abs(dphi) <= 1e-3 * std::abs(dphi0) ||
          st.evals >= o.max_evals_per_search || dphi == dphi_lo)
        break;
      const Scalar a_star = a - dphi * (a - a_lo) / (dphi - dphi_lo);
      if (!std::isfinite(a_star) || a_star <= 0.1 * a || a_star >= 10.0 * a)
        break;
      const VecX x_keep = st.xt, g_keep = st.gt;
      const Scalar phi_keep = st.phi;
      const Scalar dphi_star = eval(a_star);
      if (!wolfe_holds(a_star, dphi_star) || st.phi > phi_keep) {
        st.xt = x_keep;
        st.gt = g_keep;
        st.phi = phi_keep;
        break;
      }
      a_lo = a;
      dphi_lo = dphi;
      a = a_star;
      dphi = dphi_star;
    }
#endif
    st.alpha = a;
    st.ok = true;
  };

  const auto zoom = [&](Scalar lo, Scalar hi, Scalar phi_lo) {
    while (st.evals < o.max_evals_per_search) {
      const Scalar a = 0.5 * (lo + hi);
      const Scalar dphi = eval(a);
      if (armijo_fails(a, st.phi) || st.phi >= phi_lo) {
        hi = a;
      } else {
        if (std::abs(dphi) <= -o.c2 * dphi0) {
          accept(a, dphi);
          return;
        }
        if (dphi * (hi - lo) >= 0) hi = lo;
        lo = a;
        phi_lo = st.phi;
      }
      if (std::abs(hi - lo) < 1e-16 * std::max(Scalar(1.0), std::abs(lo)))
        return;
    }
  };

  constexpr Scalar a_max = 1e6;
  Scalar a_prev = 0, phi_prev = phi0;
  Scalar a = alpha0;
  for (bool first = true; st.evals < o.max_evals_per_search; first = false) {
    const Scalar dphi = eval(a);
    if (armijo_fails(a, st.phi) || (!first && st.phi >= phi_prev)) {
      zoom(a_prev, a, phi_prev);
      return st;
    }
    if (std::abs(dphi) <= -o.c2 * dphi0) {
      accept(a, dphi);
      return st;
    }
    if (dphi >= 0) {
      zoom(a, a_prev, st.phi);
      return st;
    }
    a_prev = a;
    phi_prev = st.phi;
    if (a >= a_max) return st;
    a = std::min(2.0 * a, a_max);
  }
  return st;
}

}  // namespace

LbfgsReport lbfgs_minimize(
    const Objective& f, VecX& x, const LbfgsOptions& opts,
    const std::function<void(int iter, Scalar loss, Scalar grad_norm,
                             const VecX& x)>& per_iter) {
  LbfgsReport rep;
  VecX g(x.size());
  Scalar fx = f(x, &g);
  rep.evals = 1;
  if (!std::isfinite(fx)) {
    rep.final_loss = fx;
    rep.grad_norm = std::numeric_limits<Scalar>::quiet_NaN();
    return rep;
  }

  std::deque<VecX> S, Y;
  std::deque<Scalar> rho;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    rep.grad_norm = g.norm();
    if (rep.grad_norm <= opts.grad_tol) {
      rep.converged = true;
      break;
    }

    // two-loop recursion for d = -H*g
    VecX q = g;
    std::vector<Scalar> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho[static_cast<std::size_t>(i)] *
          S[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * Y[static_cast<std::size_t>(i)];
    }
    if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t i = 0; i < S.size(); ++i) {
      const Scalar beta = rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    VecX d = -q;
    Scalar dphi0 = g.dot(d);
    if (dphi0 >= 0) {  // not a descent direction; drop the memory
      S.clear();
      Y.clear();
      rho.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
    }

    SearchState st;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 1) {
        ++rep.line_search_failures;
        S.clear();
        Y.clear();
        rho.clear();
        d = -g;
        dphi0 = -g.squaredNorm();
      }
      const Scalar a0 =
          S.empty() ? std::min(Scalar(1.0),
                               1.0 / std::max(g.norm(), Scalar(1e-12)))
                    : Scalar(1.0);
      st = wolfe_search(f, x, d, fx, dphi0, a0, opts);
      rep.evals += st.evals;
      if (st.ok) break;
    }
    if (!st.ok) {
      ++rep.line_search_failures;
      break;
    }

    VecX s = st.xt - x;
    VecX y = st.gt - g;
    const Scalar sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x = st.xt;
    g = st.gt;
    fx = st.phi;
    rep.iters = iter;
    if (per_iter) per_iter(iter, fx, g.norm(), x);
  }

  rep.final_loss = fx;
  rep.grad_norm = g.norm();
  if (rep.grad_norm <= opts.grad_tol) rep.converged = true;
  return rep;
}

TrainResult train(FieldModel& model, const CollocationSet& set,
                  const Domain& dom, const ModelParams& p,
                  const LossOptions& lopts, const TrainOptions& topts) {
  const Eigen::Index n = model.net().parameter_count();
  const Eigen::Index ntot = topts.inverse ? n + 1 : n;
  const Scalar kappa_fixed = std::log(p.conductivity);

  VecX x(ntot);
  x.head(n) = model.net().params();
  if (topts.inverse) x[n] = topts.kappa0;

  LossResult stash;
  const auto objective = [&](const VecX& xx, VecX* gout) -> Scalar {
    model.net().params() = xx.head(n);
    Scalar kap = 0;
    const Scalar* kp = nullptr;
    if (topts.inverse) {
      kap = xx[n];
      kp = &kap;
    }
    if (!gout) {
      stash = evaluate_loss(model, set, dom, p, lopts, kp);
      return stash.total;
    }
    VecX gnet;
    stash = evaluate_loss(model, set, dom, p, lopts, kp, &gnet);
    gout->resize(ntot);
    gout->head(n) = gnet;
    if (topts.inverse) (*gout)[n] = stash.dkappa;
    return stash.total;
  };

  TrainResult res;
  VecX best = x;
  Scalar best_loss = std::numeric_limits<Scalar>::infinity();
  const auto remember = [&](Scalar loss, const VecX& xx) {
    if (loss < best_loss) {
      best_loss = loss;
      best = xx;
    }
  };
  const auto record = [&](int epoch, char phase, Scalar grad_norm,
                          Scalar kappa) {
    res.history.push_back({epoch, phase, stash.total, stash.pde,
                           stash.bc_neumann, stash.bc_dirichlet, stash.jump,
                           stash.data, grad_norm, kappa});
  };

  Adam adam(ntot, AdamOptions{topts.adam_lr, 0.9, 0.999, 1e-8});
  VecX g(ntot);
  for (int step = 1; step <= topts.adam_steps; ++step) {
    const Scalar loss = objective(x, &g);
    if (!std::isfinite(loss)) {
      res.diverged = true;
      break;
    }
    remember(loss, x);
    if (step == 1 || step % topts.log_every == 0 ||
        step == topts.adam_steps)
      record(step, 'a', g.norm(), topts.inverse ? x[n] : kappa_fixed);
    adam.step(x, g);
  }

  if (!res.diverged && topts.lbfgs_iters > 0) {
    LbfgsOptions lo;
    lo.max_iters = topts.lbfgs_iters;
    const auto cb = [&](int iter, Scalar loss, Scalar grad_norm,
                        const VecX& xx) {
      remember(loss, xx);
      if (iter == 1 || iter % topts.log_every == 0 ||
          iter == topts.lbfgs_iters)
        record(topts.adam_steps + iter, 'l', grad_norm,
               topts.inverse ? xx[n] : kappa_fixed);
    };
    const LbfgsReport rep = lbfgs_minimize(objective, x, lo, cb);
    res.line_search_failures = rep.line_search_failures;
    if (std::isfinite(rep.final_loss)) remember(rep.final_loss, x);
  }

  model.net().params() = best.head(n);
  res.kappa = topts.inverse ? best[n] : kappa_fixed;
  {
    const Scalar* kp = topts.inverse ? &res.kappa : nullptr;
    res.final_loss = evaluate_loss(model, set, dom, p, lopts, kp);
  }
  res.best_loss = res.final_loss.total;
  return res;
}

}  // namespace coolpinns
