#include "coolpinns/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace coolpinns {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw IoError(path + ": " + what);
}

std::string g17(Scalar x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail(path, "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out.good()) fail(path, "write failed");
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out << content;
  finish(out, path);
}

void write_field_csv(const std::string& path, const FieldGrid& g) {
  std::ofstream out = open_out(path);
  out << "x_m,y_m,theta_K\n";
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      out << g17(i * g.hx) << ',' << g17(j * g.hy) << ','
          << g17(g.theta[g.idx(i, j)]) << '\n';
  finish(out, path);
}

void write_ratio_csv(const std::string& path, const FieldGrid& like,
                     const VecX& ratio) {
  if (ratio.size() != like.theta.size())
    throw ConfigError("ratio column does not match the lattice");
  std::ofstream out = open_out(path);
  out << "x_m,y_m,ratio\n";
  for (int j = 0; j <= like.ny; ++j)
    for (int i = 0; i <= like.nx; ++i)
      out << g17(i * like.hx) << ',' << g17(j * like.hy) << ','
          << g17(ratio[like.idx(i, j)]) << '\n';
  finish(out, path);
}

FieldGrid read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x_m,y_m,theta_K") fail(path, "unexpected header: " + line);

  std::vector<Scalar> xs, ys, th;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Scalar x, y, t;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &t) != 3)
      fail(path, "bad row " + std::to_string(row));
    xs.push_back(x);
    ys.push_back(y);
    th.push_back(t);
  }
  if (xs.size() < 4) fail(path, "too few rows for a lattice");

  // x fastest: the first block shares y and spans the x nodes
  std::size_t nxn = 1;
  while (nxn < xs.size() && ys[nxn] == ys[0]) ++nxn;
  if (nxn < 2 || xs.size() % nxn != 0)
    fail(path, "rows do not form a uniform lattice");
  const std::size_t nyn = xs.size() / nxn;
  if (nyn < 2) fail(path, "rows do not form a uniform lattice");

  FieldGrid g;
  g.nx = static_cast<int>(nxn) - 1;
  g.ny = static_cast<int>(nyn) - 1;
  g.Lx = xs[nxn - 1];
  g.Ly = ys[xs.size() - 1];
  if (g.Lx <= 0 || g.Ly <= 0) fail(path, "degenerate lattice extents");
  g.hx = g.Lx / g.nx;
  g.hy = g.Ly / g.ny;
  g.theta.resize(static_cast<Eigen::Index>(xs.size()));
  const Scalar tol = 1e-9 * std::max(g.Lx, g.Ly);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    const std::size_t i = r % nxn, j = r / nxn;
    if (std::abs(xs[r] - Scalar(i) * g.hx) > tol ||
        std::abs(ys[r] - Scalar(j) * g.hy) > tol)
      fail(path, "rows do not form a uniform lattice");
    g.theta[static_cast<Eigen::Index>(r)] = th[r];
  }
  return g;
}

void write_training_log(const std::string& path,
                        const std::vector<TrainRecord>& history) {
  std::ofstream out = open_out(path);
  out << "epoch,phase,loss_pde,loss_bc_neumann,loss_bc_dirichlet,loss_jump,"
         "loss_data,total,grad_norm,K_W_m_K\n";
  for (const TrainRecord& r : history)
    out << r.epoch << ',' << r.phase << ',' << g17(r.pde) << ','
        << g17(r.bc_neumann) << ',' << g17(r.bc_dirichlet) << ','
        << g17(r.jump) << ',' << g17(r.data) << ',' << g17(r.total) << ','
        << g17(r.grad_norm) << ',' << g17(std::exp(r.kappa)) << '\n';
  finish(out, path);
}

void write_k_history(const std::string& path,
                     const std::vector<TrainRecord>& history, Scalar truth_K) {
  std::ofstream out = open_out(path);
  out << "epoch,K_W_m_K,percent_error\n";
  for (const TrainRecord& r : history) {
    const Scalar K = std::exp(r.kappa);
    out << r.epoch << ',' << g17(K) << ',';
    if (truth_K > 0) out << g17(std::abs(K - truth_K) / truth_K * 100.0);
    out << '\n';
  }
  finish(out, path);
}

void write_checkpoint(const std::string& path, const FieldModel& m,
                      std::uint64_t seed) {
  const Mlp& net = m.net();
  const OutputTransform& tf = m.transform();
  std::ofstream out = open_out(path, true);
  out << "coolpinns checkpoint 1\n";
  out << "widths 2";
  for (int l = 0; l < net.hidden_layers(); ++l) out << ' ' << net.width();
  out << " 1\n";
  out << "activation tanh\n";
  out << "inlet " << g17(tf.inlet.x()) << ' ' << g17(tf.inlet.y()) << '\n';
  out << "theta_in " << g17(tf.theta_in) << '\n';
  out << "lref " << g17(tf.lref) << '\n';
  out << "scale " << g17(tf.scale) << '\n';
  out << "seed " << seed << '\n';
  out << "params " << net.parameter_count() << '\n';
  out.write(reinterpret_cast<const char*>(net.params().data()),
            static_cast<std::streamsize>(net.parameter_count() *
                                         sizeof(Scalar)));
  finish(out, path);
}

namespace {

std::string expect_line(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) fail(path, "truncated checkpoint header");
  return line;
}

}  // namespace

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  if (expect_line(in, path) != "coolpinns checkpoint 1")
    fail(path, "not a checkpoint file");

  Checkpoint ck;
  {
    std::istringstream ws(expect_line(in, path));
    std::string tag;
    ws >> tag;
    if (tag != "widths") fail(path, "missing widths");
    std::vector<int> widths;
    int w;
    while (ws >> w) widths.push_back(w);
    if (widths.size() < 3 || widths.front() != 2 || widths.back() != 1)
      fail(path, "unsupported layer widths");
    ck.hidden_layers = static_cast<int>(widths.size()) - 2;
    ck.width = widths[1];
    for (std::size_t i = 1; i + 1 < widths.size(); ++i)
      if (widths[i] != ck.width) fail(path, "nonuniform hidden widths");
  }
  if (expect_line(in, path) != "activation tanh")
    fail(path, "unsupported activation");

  const auto scan = [&](const char* fmt, auto*... out) {
    const std::string line = expect_line(in, path);
    if (std::sscanf(line.c_str(), fmt, out...) !=
        static_cast<int>(sizeof...(out)))
      fail(path, "malformed header line: " + line);
  };
  double ix, iy;
  scan("inlet %lf %lf", &ix, &iy);
  ck.tf.inlet = Vec2(ix, iy);
  scan("theta_in %lf", &ck.tf.theta_in);
  scan("lref %lf", &ck.tf.lref);
  scan("scale %lf", &ck.tf.scale);
  unsigned long long seed;
  scan("seed %llu", &seed);
  ck.seed = seed;
  long long count;
  scan("params %lld", &count);
  if (count <= 0) fail(path, "bad parameter count");

  ck.params.resize(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(ck.params.data()),
          static_cast<std::streamsize>(count * sizeof(Scalar)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(Scalar)))
    fail(path, "truncated parameter block");
  return ck;
}

FieldModel model_from_checkpoint(const Checkpoint& ck, const Domain& dom) {
  FieldModel m(ck.hidden_layers, ck.width, ck.seed, dom, ck.tf);
  if (m.net().parameter_count() != ck.params.size())
    throw IoError("checkpoint parameter count does not match its widths");
  m.net().params() = ck.params;
  return m;
}

namespace {

// low-to-high perceptual ramp, dark violet to yellow
constexpr double kMap[11][3] = {
    {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
    {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
    {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.478, 0.821, 0.318},
    {0.741, 0.873, 0.150}, {0.993, 0.906, 0.144}};

void color_of(Scalar t, unsigned char* rgb) {
  if (!std::isfinite(t)) {
    rgb[0] = 255;
    rgb[1] = 0;
    rgb[2] = 255;
    return;
  }
  t = std::clamp(t, Scalar(0), Scalar(1));
  const Scalar pos = t * 10.0;
  const int k = std::min(9, static_cast<int>(pos));
  const Scalar f = pos - k;
  for (int c = 0; c < 3; ++c) {
    const Scalar v = kMap[k][c] + f * (kMap[k + 1][c] - kMap[k][c]);
    rgb[c] = static_cast<unsigned char>(std::lround(255.0 * v));
  }
}

}  // namespace

void write_heatmap_ppm(const std::string& path, const FieldGrid& g, Scalar lo,
                       Scalar hi, const std::string& label) {
  const int nxn = g.nx + 1, nyn = g.ny + 1;
  const int s = std::max(1, 600 / std::max(nxn, nyn));
  const int W = nxn * s, H = nyn * s;
  const Scalar span = hi - lo;

  std::ofstream out = open_out(path, true);
  out << "P6\n# " << label << " min=" << g17(lo) << " max=" << g17(hi)
      << "\n" << W << ' ' << H << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(W) * 3);
  for (int py = 0; py < H; ++py) {
    const int j = g.ny - py / s;  // top row at max y
    for (int i = 0; i < nxn; ++i) {
      const Scalar v = g.theta[g.idx(i, j)];
      const Scalar t = span > 0 ? (v - lo) / span : Scalar(0.5);
      unsigned char rgb[3];
      color_of(t, rgb);
      for (int r = 0; r < s; ++r) {
        unsigned char* px = &row[static_cast<std::size_t>(i * s + r) * 3];
        px[0] = rgb[0];
        px[1] = rgb[1];
        px[2] = rgb[2];
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  finish(out, path);
}

}  // namespace coolpinns
