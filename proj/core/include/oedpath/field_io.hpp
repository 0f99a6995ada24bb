// OEDF binary container for gridded multi-component field sequences.
//
// Layout (little-endian): magic "OEDF", u32 version = 1,
// u32 nx, ny, n_frames, n_components; f64 x0, y0, dx, dy, t0, dt_frames;
// then n_frames * n_components * (nx*ny) f64 values, node-row-major,
// frame-major. Velocity files use n_frames = 1, n_components = 2; ensembles
// use n_components = M; reduced bases use n_frames = 1, n_components = M_r.
#pragma once

#include <string>
#include <vector>

#include "oedpath/forward.hpp"
#include "oedpath/grid.hpp"
#include "oedpath/velocity.hpp"

namespace oed {

struct FieldFile {
    Grid2D grid;
    double t0 = 0.0;
    double dt_frames = 0.0;
    int n_frames = 1;
    int n_components = 1;
    std::vector<double> values;  // [(frame * n_components + comp) * nodes + node]

    const double* component(int frame, int comp) const {
        return values.data() + (static_cast<std::size_t>(frame) * n_components + comp) *
                                   static_cast<std::size_t>(grid.num_nodes());
    }
    double* component(int frame, int comp) {
        return values.data() + (static_cast<std::size_t>(frame) * n_components + comp) *
                                   static_cast<std::size_t>(grid.num_nodes());
    }

    void validate() const;
};

void write_field_file(const std::string& path, const FieldFile& file);
FieldFile read_field_file(const std::string& path);

FieldFile to_field_file(const VelocityField& vel);
FieldFile to_field_file(const StateEnsemble& ens);

VelocityField velocity_from_field_file(const FieldFile& file);
StateEnsemble ensemble_from_field_file(const FieldFile& file);

}  // namespace oed
