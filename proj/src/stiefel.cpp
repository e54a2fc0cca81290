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

#include "amsh/stiefel.hpp"

#include <cmath>
#include <random>

namespace amsh {

Matrix centering_matrix(Index n) {
    require(n >= 1, "centering_matrix: n must be >= 1");
    Matrix j = Matrix::Identity(n, n);
    j.array() -= 1.0 / static_cast<double>(n);
    return j;
}

Matrix subtract_row_means(const Matrix& a) {
    return a.colwise() - Vector(a.rowwise().mean());
}

Matrix subtract_col_means(const Matrix& a) {
    return a.rowwise() - a.colwise().mean();
}

namespace {

// Flip u (and its paired column, when present) so the largest-magnitude
// entry of u is positive; resolves the sign ambiguity of singular vectors.
void canonicalize_sign(Eigen::Ref<Vector> u, Eigen::Ref<Vector> paired) {
    Index at = 0;
    u.cwiseAbs().maxCoeff(&at);
    if (u(at) < 0.0) {
        u = -u;
        if (paired.size() > 0) paired = -paired;
    }
}

// Orthonormal completion of the kept left singular vectors. The discarded
// full-SVD columns already form one; canonicalize their signs for
// reproducibility.
Matrix left_completion(const Matrix& full_u, Index kept) {
    Matrix bar = full_u.rightCols(full_u.cols() - kept);
    Vector none;
    for (Index c = 0; c < bar.cols(); ++c) canonicalize_sign(bar.col(c), none);
    return bar;
}

// Random n-vectors orthonormalized against 1_n, the columns of k, and each
// other (modified Gram-Schmidt, one re-orthogonalization pass).
Matrix random_centered_completion(Index n, Index count, const Matrix& k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix out(n, count);
    const double inv_n = 1.0 / static_cast<double>(n);
    Index done = 0;
    int attempts = 0;
    while (done < count) {
        require(++attempts <= 64 * static_cast<int>(count) + 64,
                "solve_centered_orthogonal: random completion failed");
        Vector v(n);
        for (Index i = 0; i < n; ++i) v(i) = gauss(rng);
        for (int pass = 0; pass < 2; ++pass) {
            v.array() -= v.sum() * inv_n;  // project out 1_n
            for (Index c = 0; c < k.cols(); ++c) v -= k.col(c).dot(v) * k.col(c);
            for (Index c = 0; c < done; ++c) v -= out.col(c).dot(v) * out.col(c);
        }
        const double norm = v.norm();
        if (norm < 1e-6) continue;  // degenerate draw
        out.col(done++) = v / norm;
    }
    return out;
}

}  // namespace

CenteredOrthogonalSolution solve_centered_orthogonal(const Matrix& coeff, double rank_tol,
                                                     std::uint64_t seed) {
    const Index r = coeff.rows();
    const Index n = coeff.cols();
    require(r >= 1 && n >= 1, "solve_centered_orthogonal: empty coefficient");
    require(r <= n - 1, "solve_centered_orthogonal: infeasible, need r <= n - 1");
    require(coeff.allFinite(), "solve_centered_orthogonal: non-finite coefficient");
    require(rank_tol >= 0.0, "solve_centered_orthogonal: negative rank_tol");

    // Row-centered coefficient: Cc = C J. Its singular value decomposition
    // Cc = U S W^T gives the eigenpairs of C J C^T = U S^2 U^T directly, and
    // W columns are exactly J C^T U S^{-1/2-ish} of the spectral recipe but
    // orthonormal to machine precision.
    const Matrix centered = subtract_row_means(coeff);
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullU | Eigen::ComputeThinV);
    Matrix u = svd.matrixU();   // r x r
    Matrix w = svd.matrixV();   // n x r
    const Vector& sing = svd.singularValues();

    const double lead = sing.size() > 0 ? sing(0) * sing(0) : 0.0;
    Index kept = 0;
    while (kept < sing.size() && sing(kept) * sing(kept) > rank_tol * lead && sing(kept) > 0.0) ++kept;

    for (Index c = 0; c < kept; ++c) canonicalize_sign(u.col(c), w.col(c));

    // Re-center the right factors exactly; SVD leaves them within roundoff of
    // the centered subspace, this pins the row-sum constraint down to eps.
    Matrix right(n, r);
    for (Index c = 0; c < kept; ++c) {
        Vector col = w.col(c);
        col.array() -= col.mean();
        right.col(c) = col / col.norm();
    }

    Matrix left(r, r);
    left.leftCols(kept) = u.leftCols(kept);
    if (kept < r) {
        left.rightCols(r - kept) = left_completion(u, kept);
        right.rightCols(r - kept) =
            random_centered_completion(n, r - kept, right.leftCols(kept), seed);
    }

    CenteredOrthogonalSolution sol;
    sol.latent = std::sqrt(static_cast<double>(n)) * left * right.transpose();
    sol.objective = (coeff.array() * sol.latent.array()).sum();
    sol.rank_used = kept;
    sol.unique = kept == r;
    return sol;
}

}  // namespace amsh
