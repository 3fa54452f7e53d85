#include "gait/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace gait {

namespace {

constexpr char kMagic[4] = {'G', 'M', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double read_f64(std::istream& is) {
  double v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

ModelContainer ModelContainer::from_gait_model(const GaitModel& model,
                                               std::vector<Matrix6d> covariance) {
  ModelContainer c;
  c.order = model.order;
  c.stride_normalized = true;
  c.output_scale = 1.0;
  c.coeffs = model.coeffs;
  c.covariance = std::move(covariance);
  return c;
}

ModelContainer ModelContainer::from_torque_surface(const TorqueSurface& surface) {
  ModelContainer c;
  c.order = surface.order;
  c.stride_normalized = true;
  c.output_scale = surface.scale;
  c.coeffs = surface.coeffs;
  return c;
}

GaitModel ModelContainer::to_gait_model() const {
  if (coeffs.cols() != 4 || coeffs.rows() != regressor_dim(order))
    throw ConfigError("model container does not hold a 4-output kinematic model");
  GaitModel m;
  m.order = order;
  m.coeffs = coeffs;
  return m;
}

TorqueSurface ModelContainer::to_torque_surface() const {
  if (coeffs.cols() != 1 || coeffs.rows() != regressor_dim(order))
    throw ConfigError("model container does not hold a single-output torque surface");
  TorqueSurface s;
  s.order = order;
  s.scale = output_scale;
  s.coeffs = coeffs.col(0);
  return s;
}

void save_model(const std::string& path, const ModelContainer& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write model file: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(c.order));
  write_u32(os, static_cast<std::uint32_t>(c.coeffs.rows()));
  write_u32(os, static_cast<std::uint32_t>(c.coeffs.cols()));
  write_u32(os, c.stride_normalized ? 1 : 0);
  write_f64(os, c.output_scale);
  for (Eigen::Index i = 0; i < c.coeffs.rows(); ++i)
    for (Eigen::Index j = 0; j < c.coeffs.cols(); ++j) write_f64(os, c.coeffs(i, j));
  write_u32(os, static_cast<std::uint32_t>(c.covariance.size()));
  for (const auto& m : c.covariance)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) write_f64(os, m(i, j));
  if (!os) throw ConfigError("short write to model file: " + path);
}

ModelContainer load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open model file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError(path + ": not a model file (bad magic)");
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw ConfigError(path + ": unsupported model file version " + std::to_string(version));

  ModelContainer c;
  c.order = static_cast<int>(read_u32(is));
  const auto rows = read_u32(is);
  const auto cols = read_u32(is);
  c.stride_normalized = read_u32(is) != 0;
  c.output_scale = read_f64(is);
  if (c.order < 1 || rows != static_cast<std::uint32_t>(regressor_dim(c.order)) ||
      cols == 0 || cols > 16)
    throw ConfigError(path + ": inconsistent model dimensions");
  c.coeffs.resize(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) c.coeffs(i, j) = read_f64(is);
  const std::uint32_t n_cov = read_u32(is);
  if (n_cov != 0 && n_cov != kSamplesPerStride)
    throw ConfigError(path + ": covariance table must have 0 or " +
                      std::to_string(kSamplesPerStride) + " knots");
  c.covariance.resize(n_cov);
  for (auto& m : c.covariance)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) m(i, j) = read_f64(is);
  if (!is) throw ConfigError(path + ": truncated model file");
  return c;
}

}  // namespace gait
