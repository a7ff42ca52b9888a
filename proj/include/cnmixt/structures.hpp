#ifndef CNMIXT_STRUCTURES_HPP
#define CNMIXT_STRUCTURES_HPP

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace cnmixt {

// The fourteen parsimonious covariance structures. Letters read
// volume / shape / orientation: E = equal across groups, V = variable,
// I = identity (spherical / axis-aligned).
enum class StructureCode {
  EII, VII, EEI, VEI, EVI, VVI, EEE, VEE, EVE, EEV, VVE, VEV, EVV, VVV
};

inline constexpr std::array<StructureCode, 14> kAllStructures = {
    StructureCode::EII, StructureCode::VII, StructureCode::EEI,
    StructureCode::VEI, StructureCode::EVI, StructureCode::VVI,
    StructureCode::EEE, StructureCode::VEE, StructureCode::EVE,
    StructureCode::EEV, StructureCode::VVE, StructureCode::VEV,
    StructureCode::EVV, StructureCode::VVV};

std::string to_string(StructureCode code);
StructureCode parse_structure(const std::string& name);  // throws ConfigError

// For G = 1 the family collapses to three distinct models; this maps each
// code to the representative that is actually fitted.
StructureCode g1_representative(StructureCode code);

// Number of free parameters in the {Sigma_g} under the given structure.
int sigma_param_count(StructureCode code, int groups, int p);

// Volume/shape/orientation factorization Sigma = volume * Q diag(shape) Q'.
// Internal convention: prod(shape) = 1, so volume^p = det(Sigma); shape
// entries are sorted decreasing and each column of Q has its largest-
// magnitude entry positive, making the factorization deterministic.
struct VolumeShapeOrientation {
  double volume = 1.0;
  Eigen::VectorXd shape;        // positive diagonal, det = 1
  Eigen::MatrixXd orientation;  // orthogonal

  Eigen::MatrixXd matrix() const;  // volume * Q diag(shape) Q'
};

VolumeShapeOrientation decompose(const Eigen::MatrixXd& sigma);
Eigen::MatrixXd reconstruct(const VolumeShapeOrientation& scale);

// Reconstruct with the spectrum clipped from below at eps, re-symmetrized.
Eigen::MatrixXd reconstruct_floored(const VolumeShapeOrientation& scale,
                                    double eps);

// Weighted within-group scatter matrices and effective group sizes.
struct ScatterSet {
  std::vector<Eigen::MatrixXd> w;  // p x p symmetric PSD, one per group
  Eigen::VectorXd counts;          // effective group sizes n_g
  double total = 0.0;              // n
};

// The complete-data objective the constrained M-step minimizes:
//   sum_g [ n_g log det Sigma_g + tr(Sigma_g^{-1} W_g) ].
double scatter_objective(const ScatterSet& scatter,
                         const std::vector<VolumeShapeOrientation>& scales);

// Constrained update of {Sigma_g} from the scatter set. Structures with a
// coupled update (VEI, VEE, EVE, VVE, VEV) iterate to relative objective
// change < 1e-8 or 20 inner passes, warm-started from `prev` when given
// (otherwise from the per-group VVV solution projected on the constraint
// set). Shared factors are bit-identical across groups in the result.
// Throws DegenerateFitError on rank-deficient total scatter.
std::vector<VolumeShapeOrientation> update_scales(
    StructureCode code, const ScatterSet& scatter,
    const std::vector<VolumeShapeOrientation>* prev = nullptr);

}  // namespace cnmixt

#endif
