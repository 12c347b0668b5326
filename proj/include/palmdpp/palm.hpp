#pragma once

#include <span>
#include <vector>

#include "palmdpp/kernel_model.hpp"

namespace palmdpp {

/// Conditioning points for a reduced Palm kernel.
struct PalmAnchor {
  std::vector<Complex> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Throws DegenerateInputError for anchors closer than 1e-9, PreconditionError
/// when the anchor has more points than the model's rank, and DomainError for
/// points outside the domain.
void validate_anchor(const KernelModel& model, const PalmAnchor& anchor);

/// Kernel of the subspace of functions vanishing at q, as a new orthonormal
/// basis (one Householder reflection in coefficient space). If the weighted
/// diagonal at q is below 1e-14 times the full monomial feature norm there, the
/// model is returned unchanged.
KernelModel palm_downdate_once(const KernelModel& model, Complex q);

/// Iterated downdate; the result does not depend on the order of the points.
KernelModel palm_downdate(const KernelModel& model, const PalmAnchor& anchor);

/// Drops the first l monomials: functions with a zero of order l at 0.
KernelModel vanishing_at_origin_subspace(const KernelModel& model, int l);

/// Membership residual for the Fock relation: every basis function of the Palm
/// kernel at p, divided by prod(z - p_j) and multiplied by prod(z - q_j), must be
/// an element of the Palm space at q. `model` is the unconditioned truncation.
/// Reports the largest of the relative division remainder, the relative value
/// at the q_j, and the relative distance from the Palm space at q.
double relation_check_fock(const KernelModel& model, const PalmAnchor& p, const PalmAnchor& q);

/// Same check with the Blaschke ratio b_q / b_p on the disc (q may be empty).
/// Reports the largest of the division remainder, the spread of the four
/// directional limits at each p_j, and the value at the q_j.
double relation_check_bergman(const KernelModel& model, const PalmAnchor& p, const PalmAnchor& q);

}  // namespace palmdpp
