#pragma once

#include <string>
#include <vector>

#include "riemap/rmap.hpp"
#include "riemap/soliton.hpp"

namespace riemap {

struct MeanCurvatures {
  Vec h;   // vertical mean curvature, a horizontal vector on M (zero when r = 0)
  Vec h2;  // mean curvature of the range, a normal vector on N
  int r = 0;
  int horizontal_dim = 0;
};

MeanCurvatures mean_curvatures(const MapPoint& point);
/// Same quantities from explicit orthonormal frames (columns), with the frame
/// vectors extended as constant fields.
MeanCurvatures mean_curvatures(const MapPoint& point, const Mat& vertical, const Mat& horizontal);

struct TensionReport {
  Vec tau;
  double identity_residual = 0.0;  // || tau + r F_* H - (m - r) H_2 ||
  double norm = 0.0;
};

TensionReport tension(const MapPoint& point);

/// Tension field as a field along the map (jets one order below the second fundamental form).
JetVec tension_field(const MapPoint& point);

/// Throws NotSpaceForm when the target curvature at F(p) differs from the
/// constant-curvature form with constant c by more than `tol`.
void check_space_form(const MapPoint& point, double c, double tol = 1e-7);

struct NamedVector {
  std::string name;
  Vec value;
};

struct BitensionConditions {
  std::vector<NamedVector> tangential_terms;
  std::vector<NamedVector> normal_terms;
  Vec tangential;     // range part of tau_2
  Vec normal;         // minus the normal part of tau_2
  double leak = 0.0;  // range component carried by the normal terms
  double c = 0.0;
};

/// Both biharmonicity conditions for a space-form target, term by term, with
/// traces over a full orthonormal frame.  tau_2 = tangential - normal.
BitensionConditions bitension_conditions(const MapPoint& point, double c);

/// tau_2 = -Delta tau - trace R(dF, tau) dF with Delta = -trace nabla^2 and
/// the space-form curvature.  Needs jets of order >= 4.
Vec bitension_direct(const MapPoint& point, double c);

/// Rough Laplacian of a field along the map over a full orthonormal frame.
Vec rough_laplacian(const MapPoint& point, const JetVec& w);

}  // namespace riemap
