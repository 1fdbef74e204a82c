#include <coolpinns/loss.hpp>

#include <cmath>

namespace coolpinns {

namespace {

// largest probe offset (<= want) keeping x +/- t*n strictly inside
Scalar admissible_offset(const Vec2& x, const Vec2& n, const Domain& dom,
                         Scalar want) {
  Scalar t = want;
  for (int sign : {+1, -1}) {
    for (int a = 0; a < 2; ++a) {
      const Scalar na = sign * n[a];
      if (na == 0.0) continue;
      const Scalar hi = a == 0 ? dom.Lx : dom.Ly;
      // margin keeps the probe off the wall itself
      const Scalar room = na > 0 ? (hi - x[a]) : x[a];
      t = std::min(t, 0.9 * room / std::abs(na));
    }
  }
  return std::max(t, Scalar(0.0));
}

}  // namespace

ClampedTemp soft_radiation_temp(Scalar v, const LossOptions& opts) {
  if (v > opts.clamp_hi) {
    const Scalar t = std::tanh((v - opts.clamp_hi) / opts.clamp_width);
    return {opts.clamp_hi + opts.clamp_width * t, 1.0 - t * t};
  }
  if (v < opts.clamp_lo) {
    const Scalar t = std::tanh((v - opts.clamp_lo) / opts.clamp_width);
    return {opts.clamp_lo + opts.clamp_width * t, 1.0 - t * t};
  }
  return {v, 1.0};
}

LossBatch assemble_loss_batch(const FieldModel& model,
                              const CollocationSet& set, const Domain& dom,
                              const LossOptions& opts) {
  LossBatch b;
  b.n_interior = set.interior.cols();
  b.n_boundary = set.boundary.cols();
  b.n_dirichlet = 1;
  b.n_curve = static_cast<Eigen::Index>(set.curve.size());
  b.n_data = set.data_pts.cols();
  b.boundary_normals = set.boundary_normals;
  b.curve = set.curve;
  b.curve_length = set.curve_length;
  b.data_theta = set.data_theta;

  b.pts.resize(2, b.total());
  Eigen::Index c = 0;
  b.pts.middleCols(c, b.n_interior) = set.interior;
  c += b.n_interior;
  b.pts.middleCols(c, b.n_boundary) = set.boundary;
  c += b.n_boundary;
  b.pts.col(c++) = model.transform().inlet;

  b.deltas.resize(b.n_curve);
  for (Eigen::Index i = 0; i < b.n_curve; ++i) {
    const CurveSample& s = b.curve[static_cast<std::size_t>(i)];
    const Scalar d =
        admissible_offset(s.x, s.normal_plus, dom, opts.delta_offset);
    if (d < opts.delta_offset) b.offset_clipped = true;
    if (d <= 0.0)
      throw NumericalError("flux probe has no room next to the channel");
    b.deltas[i] = d;
    b.pts.col(c + i) = s.x;
    b.pts.col(c + b.n_curve + i) = s.x + d * s.normal_plus;
    b.pts.col(c + 2 * b.n_curve + i) = s.x - d * s.normal_plus;
  }
  c += 3 * b.n_curve;
  if (b.n_data > 0) b.pts.middleCols(c, b.n_data) = set.data_pts;
  return b;
}

LossResult loss_from_jets(const LossBatch& b, const JetBatch& jets,
                          const ModelParams& p, Scalar K,
                          const LossOptions& opts, JetBatch* adj) {
  LossResult r;
  r.offset_clipped = b.offset_clipped;
  if (adj) adj->set_zero(jets.size());

  const Scalar f0 = p.heat_flux;
  const Scalar t = p.thickness;
  const Scalar esig = p.radiation ? p.emissivity * p.sigma_sb : 0.0;
  const Scalar ta2 = p.theta_amb * p.theta_amb;
  const Scalar amb4 = ta2 * ta2;
  const LossWeights& w = opts.weights;
  Scalar dK = 0.0;

  Eigen::Index c0 = 0;
  if (b.n_interior > 0) {
    const Scalar norm = 1.0 / (static_cast<Scalar>(b.n_interior) * f0 * f0);
    for (Eigen::Index i = 0; i < b.n_interior; ++i) {
      const Eigen::Index c = c0 + i;
      const Scalar v = jets.v[c];
      const Scalar lap = jets.hxx[c] + jets.hyy[c];
      const ClampedTemp tr = soft_radiation_temp(v, opts);
      const Scalar tv2 = tr.value * tr.value;
      const Scalar rad = esig * (tv2 * tv2 - amb4);
      const Scalar res =
          t * K * lap + f0 - p.h_conv * (v - p.theta_amb) - rad;
      r.pde += norm * res * res;
      if (adj) {
        const Scalar s = 2.0 * norm * res * w.pde;
        adj->v[c] +=
            s * (-p.h_conv - esig * 4.0 * tv2 * tr.value * tr.deriv);
        adj->hxx[c] += s * t * K;
        adj->hyy[c] += s * t * K;
        dK += s * t * lap;
      }
    }
  }
  c0 += b.n_interior;

  if (b.n_boundary > 0) {
    const Scalar norm = 1.0 / (static_cast<Scalar>(b.n_boundary) * f0 * f0);
    for (Eigen::Index i = 0; i < b.n_boundary; ++i) {
      const Eigen::Index c = c0 + i;
      const Scalar gn = jets.gx[c] * b.boundary_normals(0, i) +
                        jets.gy[c] * b.boundary_normals(1, i);
      const Scalar qn = -K * gn;
      r.bc_neumann += norm * qn * qn;
      if (adj) {
        const Scalar s = 2.0 * norm * qn * w.bc;
        adj->gx[c] += s * (-K) * b.boundary_normals(0, i);
        adj->gy[c] += s * (-K) * b.boundary_normals(1, i);
        dK += s * (-gn);
      }
    }
  }
  c0 += b.n_boundary;

  if (b.n_dirichlet > 0) {
    // pinned by the output transform, so this term is exactly zero; it is
    // evaluated anyway to keep the invariant under test at every step
    const Scalar norm =
        1.0 / (static_cast<Scalar>(b.n_dirichlet) * opts.delta_theta *
               opts.delta_theta);
    for (Eigen::Index i = 0; i < b.n_dirichlet; ++i) {
      const Eigen::Index c = c0 + i;
      const Scalar diff = jets.v[c] - p.theta_in;
      r.bc_dirichlet += norm * diff * diff;
      if (adj) adj->v[c] += 2.0 * norm * diff * w.bc;
    }
  }
  c0 += b.n_dirichlet;

  if (b.n_curve > 0) {
    const Scalar mcf = p.mcf();
    if (mcf > 0.0 && b.curve_length <= 0.0)
      throw ConfigError("jump loss needs the channel length for its scale");
    const Scalar sigma = mcf > 0.0
                             ? mcf * opts.delta_theta / b.curve_length
                             : t * f0;
    const Scalar norm =
        1.0 / (static_cast<Scalar>(b.n_curve) * sigma * sigma);
    for (Eigen::Index i = 0; i < b.n_curve; ++i) {
      const Eigen::Index con = c0 + i;
      const Eigen::Index cp = c0 + b.n_curve + i;
      const Eigen::Index cm = c0 + 2 * b.n_curve + i;
      const CurveSample& cs = b.curve[static_cast<std::size_t>(i)];
      const Vec2 g0(jets.gx[con], jets.gy[con]);
      const Vec2 gp(jets.gx[cp], jets.gy[cp]);
      const Vec2 gm(jets.gx[cm], jets.gy[cm]);
      const Scalar mis =
          jump_mismatch(cs, -K * gp, -K * gm, g0, p);
      r.jump += norm * mis * mis;
      if (adj) {
        const Scalar s = 2.0 * norm * mis * w.jump;
        adj->gx[cp] += s * (-t * K) * cs.normal_plus.x();
        adj->gy[cp] += s * (-t * K) * cs.normal_plus.y();
        adj->gx[cm] += s * (t * K) * cs.normal_plus.x();
        adj->gy[cm] += s * (t * K) * cs.normal_plus.y();
        adj->gx[con] += s * (-mcf) * cs.tangent.x();
        adj->gy[con] += s * (-mcf) * cs.tangent.y();
        dK += s * (-t) * (gp - gm).dot(cs.normal_plus);
      }
    }
  }
  c0 += 3 * b.n_curve;

  if (b.n_data > 0) {
    const Scalar norm =
        1.0 / (static_cast<Scalar>(b.n_data) * opts.delta_theta *
               opts.delta_theta);
    for (Eigen::Index i = 0; i < b.n_data; ++i) {
      const Eigen::Index c = c0 + i;
      const Scalar diff = jets.v[c] - b.data_theta[i];
      r.data += norm * diff * diff;
      if (adj) adj->v[c] += 2.0 * norm * diff * w.data;
    }
  }

  r.total = w.pde * r.pde + w.bc * (r.bc_neumann + r.bc_dirichlet) +
            w.jump * r.jump + w.data * r.data;
  r.dkappa = K * dK;
  return r;
}

LossResult evaluate_loss(FieldModel& model, const CollocationSet& set,
                         const Domain& dom, const ModelParams& p,
                         const LossOptions& opts, const Scalar* kappa,
                         VecX* grad) {
  const Scalar K = kappa ? std::exp(*kappa) : p.conductivity;
  const LossBatch b = assemble_loss_batch(model, set, dom, opts);
  if (!grad) {
    const JetBatch jets = model.jet(b.pts);
    return loss_from_jets(b, jets, p, K, opts, nullptr);
  }
  const JetBatch jets = model.jet_tape(b.pts);
  JetBatch adj;
  const LossResult r = loss_from_jets(b, jets, p, K, opts, &adj);
  grad->setZero(model.net().parameter_count());
  model.backward(adj, *grad);
  return r;
}

}  // namespace coolpinns
