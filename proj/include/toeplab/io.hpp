#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "toeplab/density.hpp"
#include "toeplab/symbol.hpp"

namespace toeplab {

inline constexpr const char* kToolVersion = "0.1.0";

// Shortest-exact decimal form of v ('.' separator, locale-free); parses back
// to the identical bits.
std::string format_double(double v);

// Everything needed to reproduce a run bitwise (modulo duration).
struct RunManifest {
    std::string command;
    nlohmann::json params;  // full flag set
    std::uint64_t seed = 0;
    std::string version = kToolVersion;
    double duration_seconds = 0;

    nlohmann::json to_json() const;
};

// Writes j sorted-key pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& j);

// spectrum.csv: re,im,source with source in {analytic, numeric}.
void write_spectrum_csv(const std::string& path,
                        const std::vector<Complex>& analytic,
                        const std::vector<Complex>& numeric);

// density.csv: re,im,xi,masked; unmasked cells carry xi = nan.
void write_density_csv(const std::string& path, const DensityField& field);

// Plain PGM (P2), 16-bit, masked cells scaled linearly to 0..65535,
// unmasked cells black. Rows run from im_max down, image convention.
void write_density_pgm(const std::string& path, const DensityField& field);

}  // namespace toeplab
