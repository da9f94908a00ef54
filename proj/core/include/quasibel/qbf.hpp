#pragma once

#include <iosfwd>
#include <string>

#include "quasibel/grid.hpp"

namespace qbel {

/// QBF-1 field format: one JSON header line {kind, n, extent, label, ...}
/// followed by CSV rows `re(z), im(z), re(v), im(v)` in node order. Values
/// round-trip bit-exactly. Readers ignore unknown header keys (writers add
/// provenance), and validate node coordinates against the declared grid.
void write_qbf(std::ostream& os, const SampledField& field, const std::string& provenance = {});
SampledField read_qbf(std::istream& is);

void write_qbf_file(const std::string& path, const SampledField& field,
                    const std::string& provenance = {});
SampledField read_qbf_file(const std::string& path);

}  // namespace qbel
