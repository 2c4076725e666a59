#include "toeplab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace toeplab {

std::string format_double(double v) {
    char buf[64];
    auto res =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed;
    j["version"] = version;
    j["duration_seconds"] = duration_seconds;
    return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

void write_spectrum_csv(const std::string& path,
                        const std::vector<Complex>& analytic,
                        const std::vector<Complex>& numeric) {
    std::ostringstream s;
    s << "re,im,source\n";
    for (Complex z : analytic) {
        s << format_double(z.real()) << ',' << format_double(z.imag())
          << ",analytic\n";
    }
    for (Complex z : numeric) {
        s << format_double(z.real()) << ',' << format_double(z.imag())
          << ",numeric\n";
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << s.str();
}

void write_density_csv(const std::string& path, const DensityField& field) {
    std::ostringstream s;
    s << "re,im,xi,masked\n";
    const GridSpec& g = field.grid;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            int i = g.index(ix, iy);
            Complex c = g.center(ix, iy);
            s << format_double(c.real()) << ',' << format_double(c.imag())
              << ',' << format_double(field.values[i]) << ','
              << int(field.mask[i]) << '\n';
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << s.str();
}

void write_density_pgm(const std::string& path, const DensityField& field) {
    const GridSpec& g = field.grid;
    double lo = 0, hi = 0;
    bool any = false;
    for (int i = 0; i < g.cells(); ++i) {
        if (!field.mask[i]) continue;
        double v = field.values[i];
        if (!any) {
            lo = hi = v;
            any = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double range = hi - lo;
    std::ostringstream s;
    s << "P2\n" << g.nx << ' ' << g.ny << "\n65535\n";
    for (int iy = g.ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            int i = g.index(ix, iy);
            long pixel = 0;
            if (field.mask[i]) {
                pixel = range > 0
                            ? std::lround(65535.0 * (field.values[i] - lo) / range)
                            : 65535;
            }
            s << pixel << (ix + 1 == g.nx ? '\n' : ' ');
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << s.str();
}

}  // namespace toeplab
