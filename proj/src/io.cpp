#include "ym/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ym {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_doubles(std::ostream& os, const double* p, std::size_t n) {
  // little-endian IEEE-754; byte-swap would go here on a big-endian host
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(8 * n));
}

}  // namespace

void write_field(const std::string& path, const LinkField& U) {
  if (U.complex->topology() == Topology::boundary)
    throw std::invalid_argument("write_field: boundary-complex fields are not serializable");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  os.write("YMRF", 4);
  put_u32(os, 1);
  const unsigned char tag = U.group == GroupTag::U1 ? 0 : 1;
  os.write(reinterpret_cast<const char*>(&tag), 1);
  const std::string desc = U.complex->descriptor();
  put_u32(os, static_cast<std::uint32_t>(desc.size()));
  os.write(desc.data(), static_cast<std::streamsize>(desc.size()));
  const int gd = group_dim(U.group);
  for (const auto& g : U.links) put_doubles(os, g.q.data(), gd);
  if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

std::shared_ptr<const LatticeComplex> complex_from_descriptor(const std::string& descriptor) {
  std::array<int, 4> dims{};
  double h = 0;
  std::string topo;
  std::stringstream ss(descriptor);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad complex descriptor: " + descriptor);
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "dims") {
      if (std::sscanf(val.c_str(), "%d,%d,%d,%d", &dims[0], &dims[1], &dims[2], &dims[3]) != 4)
        throw std::runtime_error("bad dims in descriptor: " + val);
    } else if (key == "spacing") {
      h = std::strtod(val.c_str(), nullptr);
    } else if (key == "topology") {
      topo = val;
    } else {
      throw std::runtime_error("unknown descriptor key: " + key);
    }
  }
  if (topo == "periodic") return build_torus(dims, h);
  if (topo == "box") return build_box(dims, h);
  throw std::runtime_error("unsupported topology in field file: " + topo);
}

LinkField read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "YMRF", 4) != 0)
    throw std::runtime_error("read_field: bad magic in " + path);
  const std::uint32_t version = get_u32(is);
  if (version != 1) throw std::runtime_error("read_field: unsupported version");
  unsigned char tag;
  is.read(reinterpret_cast<char*>(&tag), 1);
  if (tag > 1) throw std::runtime_error("read_field: unknown group tag in " + path);
  const std::uint32_t dlen = get_u32(is);
  std::string desc(dlen, '\0');
  is.read(desc.data(), dlen);
  LinkField U;
  U.complex = complex_from_descriptor(desc);
  U.group = tag == 0 ? GroupTag::U1 : GroupTag::SU2;
  U.links.assign(U.complex->edge_count(), identity(U.group));
  const int gd = group_dim(U.group);
  for (auto& g : U.links) {
    g.tag = U.group;
    g.q.setZero();
    is.read(reinterpret_cast<char*>(g.q.data()), 8 * gd);
  }
  if (!is) throw std::runtime_error("read_field: truncated file " + path);
  return U;
}

json to_json(const GaugeFixReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["functional"] = r.functional;
  j["coulomb_residual_max"] = r.coulomb_residual_max;
  j["coulomb_residual_l2"] = r.coulomb_residual_l2;
  j["boundary_residual_max"] = r.boundary_residual_max;
  j["boundary_residual_l2"] = r.boundary_residual_l2;
  j["norm_ratio"] = r.norm_ratio;
  j["converged"] = r.converged;
  return j;
}

json to_json(const SolveReport& r) {
  json j;
  j["iterations"] = r.iterations;
  j["newton_steps"] = r.newton_steps;
  j["final_residual"] = r.final_residual;
  j["boundary_fidelity"] = r.boundary_fidelity;
  j["converged"] = r.converged;
  if (!r.failure.empty()) j["failure"] = r.failure;
  j["norm_a_l4"] = r.norm_a_l4;
  j["norm_a_sobolev1"] = r.norm_a_sobolev1;
  j["norm_f_l2"] = r.norm_f_l2;
  j["norm_trace_half"] = r.norm_trace_half;
  if (!r.energy_trace.empty()) {
    j["initial_energy"] = r.energy_trace.front();
    j["final_energy"] = r.energy_trace.back();
  }
  return j;
}

json to_json(const ConvexityRecord& r) {
  json j;
  j["lhs"] = r.lhs;
  j["gap"] = r.gap;
  j["ratio"] = std::isfinite(r.ratio) ? json(r.ratio) : json("inf");
  j["coulomb_mismatch"] = r.coulomb_mismatch;
  j["fa_l2"] = r.fa_l2;
  j["hypotheses_ok"] = r.hypotheses_ok;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json to_json(const ReplacementStepReport& r) {
  json j;
  j["ball_id"] = r.ball_id;
  j["applied"] = r.applied;
  if (!r.failure.empty()) j["failure"] = r.failure;
  j["epsilon_threshold"] = r.epsilon_threshold;
  j["concentration"] = r.concentration;
  j["pre_ball_energy"] = r.pre_ball_energy;
  j["post_ball_energy"] = r.post_ball_energy;
  j["pre_global_energy"] = r.pre_global_energy;
  j["post_global_energy"] = r.post_global_energy;
  j["gauge_fix"] = to_json(r.gauge_fix);
  j["solve"] = to_json(r.solve);
  j["convexity"] = to_json(r.convexity);
  j["patch_regauge"] = to_json(r.patch_regauge);
  return j;
}

json to_json(const SweepTrace& t) {
  json j;
  j["stop"] = sweep_stop_name(t.stop);
  j["cycles"] = t.cycles;
  j["steps"] = json::array();
  for (const auto& s : t.steps) j["steps"].push_back(to_json(s));
  j["global_energy"] = t.global_energy;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_json: cannot open " + path);
  os << j.dump(2) << "\n";
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  os << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt17(row[i]);
    os << "\n";
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ym
