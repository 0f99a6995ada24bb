#include "oedpath/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace oed {

namespace {

constexpr char kMagic[4] = {'O', 'E', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        T out;
        auto* src = reinterpret_cast<const unsigned char*>(&v);
        auto* dst = reinterpret_cast<unsigned char*>(&out);
        for (std::size_t b = 0; b < sizeof(T); ++b) dst[b] = src[sizeof(T) - 1 - b];
        return out;
    }
}

void put_u32(std::ostream& os, std::uint32_t v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    bits = to_little(bits);
    os.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) {
        throw ConfigError("OEDF file truncated: " + path);
    }
    return to_little(v);
}

double get_f64(std::istream& is, const std::string& path) {
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
        throw ConfigError("OEDF file truncated: " + path);
    }
    bits = to_little(bits);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace

void FieldFile::validate() const {
    grid.validate();
    if (n_frames < 1 || n_components < 1) {
        throw ConfigError("FieldFile: n_frames and n_components must be >= 1");
    }
    if (n_frames > 1 && !(dt_frames > 0.0)) {
        throw ConfigError("FieldFile: dt_frames must be > 0 for multi-frame files");
    }
    const std::size_t expect = static_cast<std::size_t>(n_frames) * n_components *
                               static_cast<std::size_t>(grid.num_nodes());
    if (values.size() != expect) throw ConfigError("FieldFile: value count mismatch");
}

void write_field_file(const std::string& path, const FieldFile& file) {
    file.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(file.grid.nx));
    put_u32(os, static_cast<std::uint32_t>(file.grid.ny));
    put_u32(os, static_cast<std::uint32_t>(file.n_frames));
    put_u32(os, static_cast<std::uint32_t>(file.n_components));
    put_f64(os, file.grid.x0);
    put_f64(os, file.grid.y0);
    put_f64(os, file.grid.dx);
    put_f64(os, file.grid.dy);
    put_f64(os, file.t0);
    put_f64(os, file.dt_frames);
    for (double v : file.values) put_f64(os, v);
    if (!os) throw ConfigError("write failed: " + path);
}

FieldFile read_field_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open OEDF file: " + path);
    char magic[4] = {};
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw ConfigError("not an OEDF file: " + path);
    }
    const std::uint32_t version = get_u32(is, path);
    if (version != kVersion) {
        throw ConfigError("unsupported OEDF version " + std::to_string(version) + ": " + path);
    }
    FieldFile file;
    file.grid.nx = static_cast<int>(get_u32(is, path));
    file.grid.ny = static_cast<int>(get_u32(is, path));
    file.n_frames = static_cast<int>(get_u32(is, path));
    file.n_components = static_cast<int>(get_u32(is, path));
    file.grid.x0 = get_f64(is, path);
    file.grid.y0 = get_f64(is, path);
    file.grid.dx = get_f64(is, path);
    file.grid.dy = get_f64(is, path);
    file.t0 = get_f64(is, path);
    file.dt_frames = get_f64(is, path);
    file.grid.validate();
    const std::size_t count = static_cast<std::size_t>(file.n_frames) * file.n_components *
                              static_cast<std::size_t>(file.grid.num_nodes());
    file.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) file.values[k] = get_f64(is, path);
    file.validate();
    return file;
}

FieldFile to_field_file(const VelocityField& vel) {
    vel.validate();
    FieldFile file;
    file.grid = vel.grid;
    file.n_frames = 1;
    file.n_components = 2;
    file.values.resize(2 * static_cast<std::size_t>(vel.grid.num_nodes()));
    std::copy(vel.vx.begin(), vel.vx.end(), file.component(0, 0));
    std::copy(vel.vy.begin(), vel.vy.end(), file.component(0, 1));
    return file;
}

FieldFile to_field_file(const StateEnsemble& ens) {
    ens.validate();
    FieldFile file;
    file.grid = ens.grid;
    file.n_frames = ens.num_frames();
    file.n_components = ens.M;
    file.t0 = ens.times.front();
    file.dt_frames = ens.num_frames() > 1 ? ens.times[1] - ens.times[0] : 0.0;
    const std::size_t nodes = static_cast<std::size_t>(ens.grid.num_nodes());
    file.values.resize(static_cast<std::size_t>(file.n_frames) * file.n_components * nodes);
    for (int f = 0; f < file.n_frames; ++f) {
        for (int m = 0; m < ens.M; ++m) {
            std::memcpy(file.component(f, m), ens.frame(m, f), nodes * sizeof(double));
        }
    }
    return file;
}

VelocityField velocity_from_field_file(const FieldFile& file) {
    file.validate();
    if (file.n_components != 2 || file.n_frames != 1) {
        throw ConfigError("velocity OEDF file must have n_frames=1, n_components=2");
    }
    VelocityField vel;
    vel.grid = file.grid;
    const std::size_t nodes = static_cast<std::size_t>(file.grid.num_nodes());
    vel.vx.assign(file.component(0, 0), file.component(0, 0) + nodes);
    vel.vy.assign(file.component(0, 1), file.component(0, 1) + nodes);
    vel.validate();
    return vel;
}

StateEnsemble ensemble_from_field_file(const FieldFile& file) {
    file.validate();
    if (file.n_frames < 2) throw ConfigError("ensemble OEDF file must have at least two frames");
    if (file.t0 != 0.0) throw ConfigError("ensemble OEDF file must start at t0 = 0");
    StateEnsemble ens;
    ens.grid = file.grid;
    ens.M = file.n_components;
    ens.times.resize(file.n_frames);
    for (int f = 0; f < file.n_frames; ++f) ens.times[f] = file.t0 + f * file.dt_frames;
    const std::size_t nodes = static_cast<std::size_t>(file.grid.num_nodes());
    ens.data.resize(static_cast<std::size_t>(ens.M) * file.n_frames * nodes);
    for (int f = 0; f < file.n_frames; ++f) {
        for (int m = 0; m < ens.M; ++m) {
            std::memcpy(ens.frame(m, f), file.component(f, m), nodes * sizeof(double));
        }
    }
    ens.validate();
    return ens;
}

}  // namespace oed
