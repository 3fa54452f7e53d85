#include "gait/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace gait {

std::size_t StrideDataset::stride_count() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.strides.size();
  return n;
}

bool StrideDataset::has_torque() const {
  for (const auto& s : subjects)
    for (const auto& st : s.strides)
      if (!st.has_torque()) return false;
  return !empty();
}

namespace {

const char* kHeader =
    "subject_id,leg_length_m,speed_mps,incline_deg,stride_idx,sample_idx,phase,phase_rate,"
    "stride_length_m,theta_s_deg,theta_f_deg,p_f_m,p_u_m,torque_Nm";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_num(const std::string& s, std::size_t row, const char* what) {
  double v{};
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("row " + std::to_string(row) + ": bad " + what + " value '" + s + "'");
  return v;
}

struct PendingStride {
  std::string subject;
  double leg_length = 0.0;
  Stride stride;
  int next_sample = 0;
  std::size_t first_row = 0;
};

void finish_stride(PendingStride& p, StrideDataset& out, bool torque_seen) {
  if (p.next_sample != kSamplesPerStride)
    throw ConfigError("row " + std::to_string(p.first_row) + ": stride has " +
                      std::to_string(p.next_sample) + " samples, expected " +
                      std::to_string(kSamplesPerStride));
  if (!torque_seen) p.stride.torque.resize(0);
  Subject* subj = nullptr;
  for (auto& s : out.subjects)
    if (s.id == p.subject) subj = &s;
  if (!subj) {
    out.subjects.push_back(Subject{p.subject, p.leg_length, {}});
    subj = &out.subjects.back();
  }
  subj->strides.push_back(std::move(p.stride));
}

}  // namespace

StrideDataset load_stride_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);

  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  ++row;
  // Tolerate a UTF-8 BOM.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    throw ConfigError(path + ": row 1: header does not match the stride CSV schema");

  StrideDataset out;
  std::optional<PendingStride> pending;
  std::string pending_key;
  bool pending_torque = true;

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 14)
      throw ConfigError("row " + std::to_string(row) + ": expected 14 fields, got " +
                        std::to_string(f.size()));

    const std::string key = f[0] + "#" + f[4];
    if (!pending || key != pending_key) {
      if (pending) finish_stride(*pending, out, pending_torque);
      pending.emplace();
      pending_key = key;
      pending_torque = true;
      pending->subject = f[0];
      pending->leg_length = parse_num(f[1], row, "leg_length_m");
      pending->first_row = row;
      auto& st = pending->stride;
      st.speed_mps = parse_num(f[2], row, "speed_mps");
      st.incline_deg = parse_num(f[3], row, "incline_deg");
      for (auto* v : {&st.phase, &st.phase_rate, &st.stride_length, &st.theta_s, &st.theta_f,
                      &st.p_f, &st.p_u, &st.torque})
        v->resize(kSamplesPerStride);
    }

    auto& p = *pending;
    const int idx = static_cast<int>(parse_num(f[5], row, "sample_idx"));
    if (idx != p.next_sample)
      throw ConfigError("row " + std::to_string(row) + ": sample_idx " + std::to_string(idx) +
                        " out of order, expected " + std::to_string(p.next_sample));
    if (idx >= kSamplesPerStride)
      throw ConfigError("row " + std::to_string(row) + ": sample_idx exceeds 149");

    auto& st = p.stride;
    st.phase(idx) = parse_num(f[6], row, "phase");
    st.phase_rate(idx) = parse_num(f[7], row, "phase_rate");
    st.stride_length(idx) = parse_num(f[8], row, "stride_length_m");
    st.theta_s(idx) = parse_num(f[9], row, "theta_s_deg");
    st.theta_f(idx) = parse_num(f[10], row, "theta_f_deg");
    st.p_f(idx) = parse_num(f[11], row, "p_f_m");
    st.p_u(idx) = parse_num(f[12], row, "p_u_m");
    if (f[13].empty()) {
      pending_torque = false;
    } else {
      st.torque(idx) = parse_num(f[13], row, "torque_Nm");
    }

    if (idx > 0 && st.phase(idx) <= st.phase(idx - 1))
      throw ConfigError("row " + std::to_string(row) + ": phase is not strictly increasing");
    if (st.phase(idx) < 0.0 || st.phase(idx) >= 1.0)
      throw ConfigError("row " + std::to_string(row) + ": phase outside [0,1)");

    ++p.next_sample;
  }
  if (pending) finish_stride(*pending, out, pending_torque);
  if (out.empty()) throw ConfigError(path + ": no stride rows");
  return out;
}

void save_stride_dataset(const std::string& path, const StrideDataset& data) {
  std::ofstream outf(path);
  if (!outf) throw ConfigError("cannot write dataset file: " + path);
  outf << kHeader << "\n";
  char buf[32];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& subj : data.subjects) {
    int stride_idx = 0;
    for (const auto& st : subj.strides) {
      for (int k = 0; k < kSamplesPerStride; ++k) {
        outf << subj.id << ',' << fmt(subj.leg_length) << ',' << fmt(st.speed_mps) << ','
             << fmt(st.incline_deg) << ',' << stride_idx << ',' << k << ',' << fmt(st.phase(k))
             << ',' << fmt(st.phase_rate(k)) << ',' << fmt(st.stride_length(k)) << ','
             << fmt(st.theta_s(k)) << ',' << fmt(st.theta_f(k)) << ',' << fmt(st.p_f(k)) << ','
             << fmt(st.p_u(k)) << ',' << (st.has_torque() ? fmt(st.torque(k)) : std::string())
             << "\n";
      }
      ++stride_idx;
    }
  }
}

}  // namespace gait
