#include "cnmixt/structures.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cnmixt/errors.hpp"

namespace cnmixt {

namespace {

constexpr double kInnerTol = 1e-8;
constexpr int kInnerMax = 20;

[[noreturn]] void degenerate(const std::string& what) {
  throw DegenerateFitError("degenerate scatter: " + what);
}

// det^{1/p} of a positive diagonal, via logs.
double geo_mean(const Eigen::VectorXd& d) {
  if ((d.array() <= 0.0).any()) degenerate("non-positive diagonal scatter");
  return std::exp(d.array().log().mean());
}

Eigen::VectorXd normalize_det1(const Eigen::VectorXd& d, double* scale_out) {
  const double m = geo_mean(d);
  if (scale_out) *scale_out = m;
  return d / m;
}

// Eigen pairs of a symmetric matrix, eigenvalues sorted decreasing, column
// signs fixed by the largest-magnitude entry.
void sym_eigs_desc(const Eigen::MatrixXd& m, Eigen::VectorXd& values,
                   Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) degenerate("eigen decomposition failed");
  const int p = static_cast<int>(m.rows());
  values.resize(p);
  vectors.resize(p, p);
  for (int j = 0; j < p; ++j) {
    values[j] = es.eigenvalues()[p - 1 - j];
    Eigen::VectorXd col = es.eigenvectors().col(p - 1 - j);
    int imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0.0) col = -col;
    vectors.col(j) = col;
  }
}

VolumeShapeOrientation spherical(double volume, int p) {
  VolumeShapeOrientation s;
  s.volume = volume;
  s.shape = Eigen::VectorXd::Ones(p);
  s.orientation = Eigen::MatrixXd::Identity(p, p);
  return s;
}

VolumeShapeOrientation diagonal(double volume, const Eigen::VectorXd& shape) {
  VolumeShapeOrientation s;
  s.volume = volume;
  s.shape = shape;
  s.orientation = Eigen::MatrixXd::Identity(shape.size(), shape.size());
  return s;
}

VolumeShapeOrientation general(double volume, const Eigen::VectorXd& shape,
                               const Eigen::MatrixXd& orientation) {
  VolumeShapeOrientation s;
  s.volume = volume;
  s.shape = shape;
  s.orientation = orientation;
  return s;
}

// One majorization step for the shared orientation of EVE/VVE: minimizes
// the linear tangent majorizer of sum_g tr(Q' S_g Q D_g) over orthogonal Q
// (Kiers-style MM; each step cannot increase the objective).
Eigen::MatrixXd orientation_mm_step(
    const std::vector<Eigen::MatrixXd>& s,
    const std::vector<Eigen::VectorXd>& d_inv, const Eigen::MatrixXd& q) {
  const int p = static_cast<int>(q.rows());
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(p, p);
  for (size_t g = 0; g < s.size(); ++g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s[g]);
    const double alpha = es.eigenvalues().maxCoeff();
    grad += 2.0 * (s[g] - alpha * Eigen::MatrixXd::Identity(p, p)) * q *
            d_inv[g].asDiagonal();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      grad, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return -svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

std::string to_string(StructureCode code) {
  static const char* names[] = {"EII", "VII", "EEI", "VEI", "EVI", "VVI",
                                "EEE", "VEE", "EVE", "EEV", "VVE", "VEV",
                                "EVV", "VVV"};
  return names[static_cast<int>(code)];
}

StructureCode parse_structure(const std::string& name) {
  for (StructureCode c : kAllStructures) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown covariance structure '" + name + "'");
}

StructureCode g1_representative(StructureCode code) {
  switch (code) {
    case StructureCode::EII:
    case StructureCode::VII:
      return StructureCode::EII;
    case StructureCode::EEI:
    case StructureCode::VEI:
    case StructureCode::EVI:
    case StructureCode::VVI:
      return StructureCode::EEI;
    default:
      return StructureCode::EEE;
  }
}

int sigma_param_count(StructureCode code, int groups, int p) {
  const int G = groups;
  switch (code) {
    case StructureCode::EII: return 1;
    case StructureCode::VII: return G;
    case StructureCode::EEI: return p;
    case StructureCode::VEI: return G + p - 1;
    case StructureCode::EVI: return 1 + G * (p - 1);
    case StructureCode::VVI: return G * p;
    case StructureCode::EEE: return p * (p + 1) / 2;
    case StructureCode::VEE: return G + p - 1 + p * (p - 1) / 2;
    case StructureCode::EVE: return 1 + G * (p - 1) + p * (p - 1) / 2;
    case StructureCode::EEV: return p + G * p * (p - 1) / 2;
    case StructureCode::VVE: return G * p + p * (p - 1) / 2;
    case StructureCode::VEV: return G + p - 1 + G * p * (p - 1) / 2;
    case StructureCode::EVV: return 1 + G * (p - 1) + G * p * (p - 1) / 2;
    case StructureCode::VVV: return G * p * (p + 1) / 2;
  }
  return 0;
}

Eigen::MatrixXd VolumeShapeOrientation::matrix() const {
  return volume * orientation * shape.asDiagonal() * orientation.transpose();
}

VolumeShapeOrientation decompose(const Eigen::MatrixXd& sigma) {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  sym_eigs_desc(sigma, values, vectors);
  if ((values.array() <= 0.0).any()) degenerate("non-PD matrix in decompose");
  VolumeShapeOrientation s;
  s.volume = geo_mean(values);
  s.shape = values / s.volume;
  s.orientation = vectors;
  return s;
}

Eigen::MatrixXd reconstruct(const VolumeShapeOrientation& scale) {
  Eigen::MatrixXd m = scale.matrix();
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd reconstruct_floored(const VolumeShapeOrientation& scale,
                                    double eps) {
  Eigen::VectorXd eigs =
      (scale.volume * scale.shape.array()).cwiseMax(eps).matrix();
  Eigen::MatrixXd m =
      scale.orientation * eigs.asDiagonal() * scale.orientation.transpose();
  return 0.5 * (m + m.transpose());
}

double scatter_objective(const ScatterSet& scatter,
                         const std::vector<VolumeShapeOrientation>& scales) {
  double obj = 0.0;
  for (size_t g = 0; g < scatter.w.size(); ++g) {
    const auto& s = scales[g];
    const int p = static_cast<int>(s.shape.size());
    const double log_det =
        p * std::log(s.volume) + s.shape.array().log().sum();
    const Eigen::MatrixXd rot =
        s.orientation.transpose() * scatter.w[g] * s.orientation;
    const double trace =
        (rot.diagonal().array() / s.shape.array()).sum() / s.volume;
    obj += scatter.counts[g] * log_det + trace;
  }
  return obj;
}

namespace {

using ScaleSet = std::vector<VolumeShapeOrientation>;

ScaleSet update_eii(const ScatterSet& sc, int p) {
  double tr = 0.0;
  for (const auto& w : sc.w) tr += w.trace();
  if (tr <= 0.0) degenerate("zero total scatter");
  return ScaleSet(sc.w.size(), spherical(tr / (sc.total * p), p));
}

ScaleSet update_vii(const ScatterSet& sc, int p) {
  ScaleSet out;
  for (size_t g = 0; g < sc.w.size(); ++g) {
    const double tr = sc.w[g].trace();
    if (tr <= 0.0) degenerate("zero group scatter");
    out.push_back(spherical(tr / (sc.counts[g] * p), p));
  }
  return out;
}

ScaleSet update_eei(const ScatterSet& sc, int p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (const auto& w : sc.w) b += w.diagonal();
  double vol = 0.0;
  const Eigen::VectorXd shape = normalize_det1(b / sc.total, &vol);
  return ScaleSet(sc.w.size(), diagonal(vol, shape));
}

ScaleSet update_vvi(const ScatterSet& sc) {
  ScaleSet out;
  for (size_t g = 0; g < sc.w.size(); ++g) {
    double vol = 0.0;
    const Eigen::VectorXd shape =
        normalize_det1(sc.w[g].diagonal() / sc.counts[g], &vol);
    out.push_back(diagonal(vol, shape));
  }
  return out;
}

ScaleSet update_evi(const ScatterSet& sc) {
  ScaleSet out;
  double vol = 0.0;
  for (size_t g = 0; g < sc.w.size(); ++g) {
    double det_root = 0.0;
    const Eigen::VectorXd shape =
        normalize_det1(sc.w[g].diagonal(), &det_root);
    out.push_back(diagonal(1.0, shape));
    vol += det_root;
  }
  vol /= sc.total;
  for (auto& s : out) s.volume = vol;
  return out;
}

ScaleSet update_vei(const ScatterSet& sc, int p, const ScaleSet* prev) {
  const size_t G = sc.w.size();
  Eigen::VectorXd shape;
  if (prev && (*prev)[0].shape.size() == p &&
      (*prev)[0].orientation.isIdentity(1e-12)) {
    shape = (*prev)[0].shape;
  } else {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (const auto& w : sc.w) b += w.diagonal();
    shape = normalize_det1(b, nullptr);
  }
  Eigen::VectorXd vols(G);
  ScaleSet out(G);
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kInnerMax; ++it) {
    for (size_t g = 0; g < G; ++g) {
      vols[g] = (sc.w[g].diagonal().array() / shape.array()).sum() /
                (sc.counts[g] * p);
      if (vols[g] <= 0.0) degenerate("zero group volume");
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    for (size_t g = 0; g < G; ++g) b += sc.w[g].diagonal() / vols[g];
    shape = normalize_det1(b, nullptr);
    for (size_t g = 0; g < G; ++g) out[g] = diagonal(vols[g], shape);
    const double obj = scatter_objective(sc, out);
    if (std::abs(last - obj) <= kInnerTol * (std::abs(obj) + 1.0)) break;
    last = obj;
  }
  return out;
}

ScaleSet update_eee(const ScatterSet& sc) {
  Eigen::MatrixXd pooled = sc.w[0];
  for (size_t g = 1; g < sc.w.size(); ++g) pooled += sc.w[g];
  pooled /= sc.total;
  return ScaleSet(sc.w.size(), decompose(pooled));
}

ScaleSet update_vvv(const ScatterSet& sc) {
  ScaleSet out;
  for (size_t g = 0; g < sc.w.size(); ++g)
    out.push_back(decompose(sc.w[g] / sc.counts[g]));
  return out;
}

ScaleSet update_vee(const ScatterSet& sc, int p, const ScaleSet* prev) {
  const size_t G = sc.w.size();
  // Shared det-1 shape-and-orientation matrix C.
  Eigen::MatrixXd c;
  if (prev) {
    const auto& s = (*prev)[0];
    c = s.orientation * s.shape.asDiagonal() * s.orientation.transpose();
  } else {
    Eigen::MatrixXd pooled = sc.w[0];
    for (size_t g = 1; g < G; ++g) pooled += sc.w[g];
    c = pooled;
  }
  Eigen::VectorXd vols(G);
  ScaleSet out(G);
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kInnerMax; ++it) {
    VolumeShapeOrientation shared = decompose(c);
    shared.volume = 1.0;  // c matters only up to scale; force det = 1
    const Eigen::MatrixXd c1 = shared.matrix();
    const Eigen::LLT<Eigen::MatrixXd> llt(c1);
    if (llt.info() != Eigen::Success) degenerate("shared shape not PD");
    for (size_t g = 0; g < G; ++g) {
      vols[g] = llt.solve(sc.w[g]).trace() / (sc.counts[g] * p);
      if (vols[g] <= 0.0) degenerate("zero group volume");
    }
    for (size_t g = 0; g < G; ++g) {
      out[g] = shared;
      out[g].volume = vols[g];
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    for (size_t g = 0; g < G; ++g) m += sc.w[g] / vols[g];
    c = m;
    const double obj = scatter_objective(sc, out);
    if (std::abs(last - obj) <= kInnerTol * (std::abs(obj) + 1.0)) break;
    last = obj;
  }
  return out;
}

// EEV / VEV: per-group orientations come from the eigenvectors of W_g
// (exact conditional optimum when shape entries are sorted decreasing).
ScaleSet update_eev_vev(const ScatterSet& sc, int p, bool equal_volume,
                        const ScaleSet* prev) {
  const size_t G = sc.w.size();
  std::vector<Eigen::VectorXd> omega(G);
  std::vector<Eigen::MatrixXd> gamma(G);
  for (size_t g = 0; g < G; ++g) {
    sym_eigs_desc(sc.w[g], omega[g], gamma[g]);
    if ((omega[g].array() <= 0.0).any()) degenerate("rank-deficient W_g");
  }
  ScaleSet out(G);
  if (equal_volume) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    for (size_t g = 0; g < G; ++g) a += omega[g];
    a /= sc.total;
    double vol = 0.0;
    const Eigen::VectorXd shape = normalize_det1(a, &vol);
    for (size_t g = 0; g < G; ++g) out[g] = general(vol, shape, gamma[g]);
    return out;
  }
  Eigen::VectorXd shape;
  if (prev) {
    shape = (*prev)[0].shape;
  } else {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    for (size_t g = 0; g < G; ++g) a += omega[g];
    shape = normalize_det1(a, nullptr);
  }
  Eigen::VectorXd vols(G);
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kInnerMax; ++it) {
    for (size_t g = 0; g < G; ++g) {
      vols[g] = (omega[g].array() / shape.array()).sum() / (sc.counts[g] * p);
      if (vols[g] <= 0.0) degenerate("zero group volume");
    }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(p);
    for (size_t g = 0; g < G; ++g) a += omega[g] / vols[g];
    shape = normalize_det1(a, nullptr);
    for (size_t g = 0; g < G; ++g) out[g] = general(vols[g], shape, gamma[g]);
    const double obj = scatter_objective(sc, out);
    if (std::abs(last - obj) <= kInnerTol * (std::abs(obj) + 1.0)) break;
    last = obj;
  }
  return out;
}

ScaleSet update_evv(const ScatterSet& sc) {
  const size_t G = sc.w.size();
  ScaleSet out(G);
  double vol = 0.0;
  for (size_t g = 0; g < G; ++g) {
    VolumeShapeOrientation s = decompose(sc.w[g]);
    vol += s.volume;  // det(W_g)^{1/p}
    s.volume = 1.0;
    out[g] = s;
  }
  vol /= sc.total;
  for (auto& s : out) s.volume = vol;
  return out;
}

// EVE / VVE: shared orientation via MM steps alternated with closed-form
// shapes and volumes.
ScaleSet update_eve_vve(const ScatterSet& sc, int p, bool equal_volume,
                        const ScaleSet* prev) {
  const size_t G = sc.w.size();
  Eigen::MatrixXd q;
  if (prev) {
    q = (*prev)[0].orientation;
  } else {
    Eigen::MatrixXd pooled = sc.w[0];
    for (size_t g = 1; g < G; ++g) pooled += sc.w[g];
    q = decompose(pooled).orientation;
  }
  ScaleSet out(G);
  std::vector<Eigen::VectorXd> shapes(G);
  Eigen::VectorXd vols = Eigen::VectorXd::Ones(G);
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kInnerMax; ++it) {
    // Shapes and volumes given the orientation.
    double common_vol = 0.0;
    for (size_t g = 0; g < G; ++g) {
      const Eigen::VectorXd b = (q.transpose() * sc.w[g] * q).diagonal();
      double det_root = 0.0;
      shapes[g] = normalize_det1(b, &det_root);
      if (equal_volume) {
        common_vol += det_root;
      } else {
        vols[g] = det_root / sc.counts[g];
      }
    }
    if (equal_volume) vols.setConstant(common_vol / sc.total);
    // Orientation given shapes and volumes.
    std::vector<Eigen::MatrixXd> s(G);
    std::vector<Eigen::VectorXd> d_inv(G);
    for (size_t g = 0; g < G; ++g) {
      s[g] = sc.w[g] / vols[g];
      d_inv[g] = shapes[g].cwiseInverse();
    }
    q = orientation_mm_step(s, d_inv, q);
    for (size_t g = 0; g < G; ++g) {
      const Eigen::VectorXd b = (q.transpose() * sc.w[g] * q).diagonal();
      shapes[g] = normalize_det1(b, nullptr);
      out[g] = general(vols[g], shapes[g], q);
    }
    const double obj = scatter_objective(sc, out);
    if (std::abs(last - obj) <= kInnerTol * (std::abs(obj) + 1.0)) break;
    last = obj;
  }
  return out;
}

}  // namespace

std::vector<VolumeShapeOrientation> update_scales(
    StructureCode code, const ScatterSet& scatter,
    const std::vector<VolumeShapeOrientation>* prev) {
  if (scatter.w.empty()) throw ConfigError("empty scatter set");
  const int p = static_cast<int>(scatter.w[0].rows());
  for (const auto& w : scatter.w) {
    if (!w.allFinite()) degenerate("non-finite scatter matrix");
  }
  switch (code) {
    case StructureCode::EII: return update_eii(scatter, p);
    case StructureCode::VII: return update_vii(scatter, p);
    case StructureCode::EEI: return update_eei(scatter, p);
    case StructureCode::VEI: return update_vei(scatter, p, prev);
    case StructureCode::EVI: return update_evi(scatter);
    case StructureCode::VVI: return update_vvi(scatter);
    case StructureCode::EEE: return update_eee(scatter);
    case StructureCode::VEE: return update_vee(scatter, p, prev);
    case StructureCode::EVE: return update_eve_vve(scatter, p, true, prev);
    case StructureCode::EEV: return update_eev_vev(scatter, p, true, prev);
    case StructureCode::VVE: return update_eve_vve(scatter, p, false, prev);
    case StructureCode::VEV: return update_eev_vev(scatter, p, false, prev);
    case StructureCode::EVV: return update_evv(scatter);
    case StructureCode::VVV: return update_vvv(scatter);
  }
  throw ConfigError("unreachable structure code");
}

}  // namespace cnmixt
