#pragma once

#include "pico/fit/camera.hpp"
#include "pico/mesh/surface_mesh.hpp"

#include <string>
#include <string_view>

namespace pico {

/// Text OBJ: "v x y z" and "f a b c ..." (1-based, negative = relative,
/// "a/t/n" accepted); polygons are fan-triangulated, other records ignored.
/// Throws ParseError with the line number, then build_mesh errors.
SurfaceMesh parse_obj(std::string_view text, const std::string& what = "obj");
std::string serialize_obj(const SurfaceMesh& mesh);

/// Binary little-endian PLY with float or double x/y/z (other vertex
/// properties skipped) and a face list of vertex indices. Throws ParseError
/// with the byte offset.
SurfaceMesh parse_ply(std::string_view bytes, const std::string& what = "ply");
/// Doubles, so a round trip is bit-exact.
std::string serialize_ply(const SurfaceMesh& mesh);

/// PLY if the file starts with "ply", OBJ otherwise.
SurfaceMesh load_mesh_file(const std::string& path);
/// Format by extension (.ply, anything else OBJ).
void save_mesh_file(const SurfaceMesh& mesh, const std::string& path);

/// Binary PGM (P5, maxval <= 255, value >= 128 is foreground) or PBM (P4,
/// set bit is foreground). Throws ParseError with the byte offset.
SilhouetteMask parse_mask(std::string_view bytes, const std::string& what = "mask");
/// P5, foreground 255.
std::string serialize_pgm(const SilhouetteMask& mask);
std::string serialize_pbm(const SilhouetteMask& mask);
SilhouetteMask load_mask_file(const std::string& path);
void save_mask_file(const SilhouetteMask& mask, const std::string& path);

}  // namespace pico
