#pragma once

#include <coolpinns/fv.hpp>
#include <coolpinns/net.hpp>
#include <coolpinns/train.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace coolpinns {

void write_text_file(const std::string& path, const std::string& content);

// Node-lattice field dump, header x_m,y_m,theta_K, x fastest, full f64
// precision (17 significant digits round-trip exactly).
void write_field_csv(const std::string& path, const FieldGrid& g);
FieldGrid read_field_csv(const std::string& path);

// Same lattice conventions with a dimensionless value column.
void write_ratio_csv(const std::string& path, const FieldGrid& like,
                     const VecX& ratio);

// One row per recorded epoch. Deliberately free of wall-clock columns so
// identical config + seed reproduces the file byte for byte; timing lives in
// run_meta.toml.
void write_training_log(const std::string& path,
                        const std::vector<TrainRecord>& history);

// Conductivity trace for calibration runs; percent_error stays blank when
// truth_K is zero (unknown).
void write_k_history(const std::string& path,
                     const std::vector<TrainRecord>& history, Scalar truth_K);

// Text header (layer widths, activation, output-transform constants, seed)
// followed by the flat little-endian f64 parameter array.
void write_checkpoint(const std::string& path, const FieldModel& m,
                      std::uint64_t seed);

struct Checkpoint {
  int hidden_layers = 0;
  int width = 0;
  std::uint64_t seed = 0;
  OutputTransform tf;
  VecX params;
};

Checkpoint read_checkpoint(const std::string& path);
FieldModel model_from_checkpoint(const Checkpoint& ck, const Domain& dom);

// Binary P6 with a perceptual low-to-high colormap, one scaled block per
// node, top row at max y. The value range is recorded as a header comment
// ("# <label> min=<lo> max=<hi>") so the legend travels with the image.
void write_heatmap_ppm(const std::string& path, const FieldGrid& g, Scalar lo,
                       Scalar hi, const std::string& label = "theta_K");

}  // namespace coolpinns
