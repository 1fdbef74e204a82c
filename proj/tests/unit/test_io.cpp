#include <coolpinns/io.hpp>

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace coolpinns;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const char* name) {
  return std::string("/tmp/coolpinns_io_") + name;
}

FieldGrid demo_grid(int n) {
  FieldGrid g;
  g.nx = g.ny = n;
  g.Lx = g.Ly = 0.1;
  g.hx = g.Lx / n;
  g.hy = g.Ly / n;
  g.theta.resize((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      g.theta[g.idx(i, j)] =
          300.0 + std::sin(1e4 * i + 7.0 * j) * 40.0 + i * 1e-13;
  return g;
}

std::vector<TrainRecord> demo_history() {
  std::vector<TrainRecord> h(3);
  h[0] = {1, 'a', 2.5, 1.0, 0.5, 0.25, 0.125, 0.25, 3.75, std::log(2.5247)};
  h[1] = {100, 'a', 1.25, 0.5, 0.25, 0.125, 0.0625, 0.125, 1.875,
          std::log(2.0)};
  h[2] = {150, 'l', 0.625, 0.25, 0.125, 0.0625, 0.03125, 0.0625, 0.9375,
          std::log(2.6)};
  return h;
}

}  // namespace

TEST_CASE("field csv round-trips node values bit for bit") {
  const FieldGrid g = demo_grid(7);
  const std::string path = temp_path("field.csv");
  write_field_csv(path, g);
  const FieldGrid back = read_field_csv(path);
  std::remove(path.c_str());

  CHECK(back.nx == g.nx);
  CHECK(back.ny == g.ny);
  CHECK(back.Lx == doctest::Approx(g.Lx).epsilon(1e-15));
  CHECK(back.hy == doctest::Approx(g.hy).epsilon(1e-15));
  REQUIRE(back.theta.size() == g.theta.size());
  for (Eigen::Index k = 0; k < g.theta.size(); ++k)
    CHECK(back.theta[k] == g.theta[k]);  // %.17g is lossless for f64
}

TEST_CASE("field csv reader rejects malformed inputs") {
  const std::string path = temp_path("bad.csv");
  const auto write = [&](const std::string& s) {
    std::ofstream out(path);
    out << s;
  };

  write("wrong,header,line\n0,0,300\n");
  CHECK_THROWS_AS(read_field_csv(path), IoError);

  write("x_m,y_m,theta_K\n");
  CHECK_THROWS_AS(read_field_csv(path), IoError);

  // 3 rows cannot tile any (nx+1) x (ny+1) lattice with ny >= 1
  write("x_m,y_m,theta_K\n0,0,300\n0.1,0,300\n0,0.1,300\n");
  CHECK_THROWS_AS(read_field_csv(path), IoError);

  // right count, crooked coordinates
  write(
      "x_m,y_m,theta_K\n0,0,300\n0.1,0,300\n0,0.1,300\n0.0999,0.1,300\n");
  CHECK_THROWS_AS(read_field_csv(path), IoError);

  write("x_m,y_m,theta_K\n0,0,nonsense\n");
  CHECK_THROWS_AS(read_field_csv(path), IoError);

  std::remove(path.c_str());
  CHECK_THROWS_AS(read_field_csv("/nonexistent/nowhere.csv"), IoError);
}

TEST_CASE("training log: stable header, kelvin conductivity, no wall clock") {
  const std::string path = temp_path("log.csv");
  write_training_log(path, demo_history());
  const std::string text = slurp(path);
  std::remove(path.c_str());

  std::istringstream in(text);
  std::string header, row1;
  std::getline(in, header);
  std::getline(in, row1);
  CHECK(header ==
        "epoch,phase,loss_pde,loss_bc_neumann,loss_bc_dirichlet,loss_jump,"
        "loss_data,total,grad_norm,K_W_m_K");
  CHECK(row1.substr(0, 4) == "1,a,");
  const double k_col = std::stod(row1.substr(row1.rfind(',') + 1));
  CHECK(k_col == doctest::Approx(2.5247).epsilon(1e-12));  // exp(kappa)
  CHECK(text.find("wall") == std::string::npos);
  CHECK(text.find(",l,") != std::string::npos);

  // byte-identical on rewrite: nothing time-dependent leaks in
  const std::string path2 = temp_path("log2.csv");
  write_training_log(path2, demo_history());
  const std::string again = slurp(path2);
  std::remove(path2.c_str());
  CHECK(again == text);
}

TEST_CASE("conductivity history: percent column tracks ground truth") {
  const std::string path = temp_path("khist.csv");
  write_k_history(path, demo_history(), 2.5247);
  std::string text = slurp(path);
  std::remove(path.c_str());
  std::istringstream in(text);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "epoch,K_W_m_K,percent_error");
  std::getline(in, row);
  CHECK(row.substr(0, 2) == "1,");
  const std::size_t c1 = row.find(','), c2 = row.rfind(',');
  CHECK(std::stod(row.substr(c1 + 1)) ==
        doctest::Approx(2.5247).epsilon(1e-12));
  CHECK(std::stod(row.substr(c2 + 1)) < 1e-10);  // percent error at truth

  write_k_history(path, demo_history(), 0.0);
  text = slurp(path);
  std::remove(path.c_str());
  std::istringstream in2(text);
  std::getline(in2, header);
  std::getline(in2, row);
  CHECK(row.back() == ',');  // unknown truth leaves the column blank
}

TEST_CASE("checkpoint round-trips the model bit for bit") {
  const Domain dom;
  OutputTransform tf;
  tf.inlet = Vec2(0.0, 0.05);
  tf.theta_in = 296.15;
  FieldModel m(3, 10, 42, dom, tf);

  const std::string path = temp_path("ck.bin");
  write_checkpoint(path, m, 42);
  const Checkpoint ck = read_checkpoint(path);

  CHECK(ck.hidden_layers == 3);
  CHECK(ck.width == 10);
  CHECK(ck.seed == 42);
  CHECK(ck.tf.inlet.x() == tf.inlet.x());
  CHECK(ck.tf.inlet.y() == tf.inlet.y());
  CHECK(ck.tf.theta_in == tf.theta_in);
  REQUIRE(ck.params.size() == m.net().params().size());
  CHECK((ck.params - m.net().params()).cwiseAbs().maxCoeff() == 0.0);

  const FieldModel back = model_from_checkpoint(ck, dom);
  const MatX pts = (MatX(2, 3) << 0.03, 0.06, 0.09, 0.02, 0.05, 0.08)
                       .finished();
  const JetBatch a = m.jet(pts), b = back.jet(pts);
  CHECK((a.v - b.v).abs().maxCoeff() == 0.0);
  CHECK((a.hxx - b.hxx).abs().maxCoeff() == 0.0);

  // corruption is detected, not silently accepted
  std::string blob = slurp(path);
  {
    std::ofstream out(path, std::ios::binary);
    out << blob.substr(0, blob.size() - 8);
  }
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint\n";
  }
  CHECK_THROWS_AS(read_checkpoint(path), IoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_checkpoint("/nonexistent/ck.bin"), IoError);
}

TEST_CASE("heatmap ppm: header carries the legend, pixels are deterministic") {
  const FieldGrid g = demo_grid(5);
  const std::string path = temp_path("map.ppm");
  write_heatmap_ppm(path, g, 260.0, 340.0);
  const std::string img = slurp(path);

  CHECK(img.substr(0, 3) == "P6\n");
  CHECK(img.find("theta_K min=260") != std::string::npos);
  CHECK(img.find("max=340") != std::string::npos);

  // 6 nodes per side upscaled by the small-grid block factor
  const std::size_t body = img.find("255\n") + 4;
  const int s = 600 / 6;
  CHECK(img.size() - body == std::size_t(6 * s) * (6 * s) * 3);

  write_heatmap_ppm(path, g, 260.0, 340.0);
  CHECK(slurp(path) == img);
  std::remove(path.c_str());
}

TEST_CASE("ratio csv uses the lattice of its template grid") {
  const FieldGrid g = demo_grid(3);
  VecX ratio = VecX::Ones(g.theta.size());
  ratio[5] = 0.875;
  const std::string path = temp_path("ratio.csv");
  write_ratio_csv(path, g, ratio);
  const std::string text = slurp(path);
  std::remove(path.c_str());
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x_m,y_m,ratio");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 16);
  CHECK(text.find("0.875") != std::string::npos);
}
