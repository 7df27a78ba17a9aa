#pragma once

#include <string>

#include "chb/adjoint.hpp"
#include "chb/control.hpp"

namespace chb {

// Field snapshots are CSV with header `x,y,value` (scalars) or `x,y,vx,vy`
// (vectors), rows in row-major node order.  Numbers print as %.17g so
// rereads round-trip bit for bit.

void write_scalar_csv(const std::string& path, const ScalarField& f);
ScalarField read_scalar_csv(const std::string& path, GridPtr grid);
void write_vector_csv(const std::string& path, const VectorField2& f);
VectorField2 read_vector_csv(const std::string& path, GridPtr grid);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
bool path_exists(const std::string& path);

/// Trajectory directory: manifest.json, per-step field CSVs and the scalar
/// time series (t, mass, energy, velocity norm, nutrient range).
void write_trajectory(const std::string& dir, const Trajectory& traj,
                      const std::string& kind = "state");
void write_linearized(const std::string& dir, const LinearizedSolution& sol);
void write_costate(const std::string& dir, const CostateTrajectory& costate);

void write_control(const std::string& dir, const ControlField& u);
ControlField read_control(const std::string& dir, GridPtr grid);

void write_history_csv(const std::string& path,
                       const std::vector<PGHistoryRow>& rows);
std::vector<PGHistoryRow> read_history_csv(const std::string& path);

std::string format_double(double v);

}  // namespace chb
