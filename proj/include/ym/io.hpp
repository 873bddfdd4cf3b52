#pragma once

#include <json.hpp>

#include <string>

#include "ym/replace.hpp"

namespace ym {

using json = nlohmann::ordered_json;

/// Field file: "YMRF" magic, u32 version, u8 group tag, length-prefixed
/// complex descriptor text, then per-edge group tuples in enumeration order as
/// little-endian IEEE-754 doubles (2 per U1 link, 4 per SU2 link).
void write_field(const std::string& path, const LinkField& U);
LinkField read_field(const std::string& path);

/// Reconstruct a torus or box complex from its descriptor line.
std::shared_ptr<const LatticeComplex> complex_from_descriptor(const std::string& descriptor);

json to_json(const GaugeFixReport& r);
json to_json(const SolveReport& r);
json to_json(const ConvexityRecord& r);
json to_json(const ReplacementStepReport& r);
json to_json(const SweepTrace& t);

void write_json(const std::string& path, const json& j);

/// CSV with a header row; cells are printed with %.17g (round-trip exact).
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

/// FNV-1a 64 over a byte string; used to stamp reports with the config hash.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ym
