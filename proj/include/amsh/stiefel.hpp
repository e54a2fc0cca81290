// Copyright 2026-present the amsh project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "amsh/matrix.hpp"

namespace amsh {

/// Explicit centering projector J = I - (1/n) 1 1^T. Only for small n;
/// large callers use subtract_row_means / subtract_col_means instead.
Matrix centering_matrix(Index n);

/// A * J: subtract each row's mean from that row.
Matrix subtract_row_means(const Matrix& a);
/// J * A: subtract each column's mean from that column.
Matrix subtract_col_means(const Matrix& a);

struct CenteredOrthogonalSolution {
    Matrix latent;     // r x n, rows pairwise orthogonal with norm sqrt(n), row sums 0
    double objective;  // tr(coeff * latent^T)
    Index rank_used;   // numerical rank of coeff * J * coeff^T
    bool unique;       // rank_used == r (no random completion involved)
};

/// Maximizes tr(C V^T) over V with V V^T = n I_r and V 1 = 0.
///
/// The construction follows the spectral recipe for this problem: take the
/// row-centered coefficient Cc = C J, pair its leading singular directions
/// (eigenpairs of C J C^T) with the corresponding right singular vectors,
/// and complete any rank deficiency with an orthonormal basis extension on
/// the left and random centered orthonormal vectors on the right. The
/// random completion is orthogonalized against both 1_n and the deterministic
/// part, otherwise the row-sum constraint would be violated. Eigenvalues are
/// kept while above rank_tol * largest; eigenvector signs are fixed so the
/// full-rank result is deterministic regardless of seed.
CenteredOrthogonalSolution solve_centered_orthogonal(const Matrix& coeff, double rank_tol = 1e-10,
                                                     std::uint64_t seed = 0);

}  // namespace amsh
