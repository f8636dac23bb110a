#include "sigsas/jl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sigsas/simd.hpp"

namespace sigsas {

std::vector<double> JlMap::apply(std::span<const double> v) const {
    if (v.size() != cols) throw std::invalid_argument("JlMap::apply: dimension mismatch");
    std::vector<double> y(rows);
    simd::matvec(s.data.data(), rows, cols, v.data(), y.data());
    return y;
}

std::vector<double> JlMap::apply_adjoint(std::span<const double> y) const {
    if (y.size() != rows) throw std::invalid_argument("JlMap::apply_adjoint: dimension mismatch");
    std::vector<double> v(cols);
    simd::matvec_t(s.data.data(), rows, cols, y.data(), v.data());
    return v;
}

JlMap sample_jl(std::size_t n, std::size_t k, std::uint64_t seed, double epsilon) {
    if (k < 1) throw std::invalid_argument("sample_jl: k must be >= 1");
    if (k > n)
        throw std::invalid_argument("sample_jl: k > N is not a reduction (k=" + std::to_string(k) +
                                    ", N=" + std::to_string(n) + ")");
    JlMap map;
    map.rows = k;
    map.cols = n;
    map.seed = seed;
    map.epsilon = epsilon;
    map.s = Matrix(k, n);
    Rng rng(seed);
    rng.fill_gaussian(map.s.data.data(), map.s.data.size(), 1.0 / std::sqrt(static_cast<double>(k)));
    return map;
}

std::size_t min_dimension(std::size_t n, double epsilon) {
    if (n < 2) throw std::invalid_argument("min_dimension: n must be >= 2");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("min_dimension: epsilon must lie in (0,1)");
    const double denom = 3.0 * epsilon * epsilon - 2.0 * epsilon * epsilon * epsilon;
    const double k = 24.0 * std::log(static_cast<double>(n)) / denom;
    return static_cast<std::size_t>(std::ceil(k));
}

SingularExtremes jl_singular_extremes(const JlMap& map) { return singular_extremes(map.s); }

double jl_operator_norm(const JlMap& map) {
    if (map.cols > 10000 && map.rows > 512) return operator_norm_power(map.s);
    return jl_singular_extremes(map).smax;
}

bool jl_surjective(const JlMap& map) {
    // rank check through the k x k Gram G = S S^T: smax by power iteration,
    // smin by inverse iteration on the Cholesky factor. The dense eigenvalue
    // route would dominate the resampling loops at audit scale.
    const std::size_t k = map.rows;
    Matrix g(k, k);
    simd::gemm_nt(map.s.data.data(), k, map.s.data.data(), k, map.cols, g.data.data());

    Rng rng(derive_seed(map.seed, 0x5417u));
    std::vector<double> v(k), w(k);
    for (auto& x : v) x = rng.gaussian();
    double lmax = 0.0;
    for (int it = 0; it < 80; ++it) {
        simd::matvec(g.data.data(), k, k, v.data(), w.data());
        const double nrm = std::sqrt(simd::sum_sq(w.data(), k));
        if (nrm == 0.0) return false;
        simd::scal(1.0 / nrm, w.data(), k);
        v.swap(w);
        if (it > 4 && std::fabs(nrm - lmax) <= 1e-8 * nrm) {
            lmax = nrm;
            break;
        }
        lmax = nrm;
    }

    Matrix chol = g;
    if (!cholesky(chol)) return false;
    Matrix rhs(k, 1), sol(k, 1);
    for (auto& x : rhs.data) x = rng.gaussian();
    double inv_norm = 0.0;
    for (int it = 0; it < 80; ++it) {
        cholesky_solve(chol, rhs, sol);
        const double nrm = std::sqrt(simd::sum_sq(sol.data.data(), k));
        if (nrm == 0.0) return false;
        simd::scal(1.0 / nrm, sol.data.data(), k);
        rhs = sol;
        if (it > 4 && std::fabs(nrm - inv_norm) <= 1e-8 * nrm) {
            inv_norm = nrm;
            break;
        }
        inv_norm = nrm;
    }
    const double lmin = 1.0 / inv_norm;  // smallest eigenvalue of G
    return std::sqrt(lmin) > 1e-10 * std::sqrt(lmax);
}

namespace {

void account_ratio(double ratio, double epsilon, DistanceReport& rep) {
    ++rep.pairs_checked;
    if (std::fabs(ratio - 1.0) > std::fabs(rep.worst_ratio - 1.0)) rep.worst_ratio = ratio;
    if (ratio < 1.0 - epsilon || ratio > 1.0 + epsilon) {
        ++rep.violations;
        rep.pass = false;
    }
}

}  // namespace

DistanceReport check_distances(const JlMap& map, std::span<const std::vector<double>> points,
                               double epsilon) {
    if (points.empty()) throw std::invalid_argument("check_distances: empty point set");
    DistanceReport rep;
    std::vector<std::vector<double>> images;
    images.reserve(points.size());
    for (const auto& p : points) images.push_back(map.apply(p));
    std::vector<double> diff(map.cols);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < map.cols; ++c) {
                const double d = points[i][c] - points[j][c];
                d2 += d * d;
            }
            if (d2 == 0.0) continue;  // coincident points carry no constraint
            double im2 = 0.0;
            for (std::size_t c = 0; c < map.rows; ++c) {
                const double d = images[i][c] - images[j][c];
                im2 += d * d;
            }
            account_ratio(im2 / d2, epsilon, rep);
        }
    }
    return rep;
}

DistanceReport check_pm_basis_distances(const JlMap& map, double epsilon) {
    // For Q = {+-e_i} every pair difference is e_i - e_j, e_i + e_j or 2 e_i,
    // so the audit reduces to the column Gram G = S^T S:
    //   ||S(e_i -+ e_j)||^2 / 2 = (G_ii + G_jj -+ 2 G_ij) / 2,  ||2 S e_i||^2 / 4 = G_ii.
    // Each off-diagonal ratio covers two point pairs ((v1,v2) and (-v1,-v2)),
    // so it is accounted twice to match the plain all-pairs audit.
    const std::size_t n = map.cols;
    Matrix g(n, n);
    simd::gram(map.s.data.data(), map.rows, map.cols, g.data.data());
    DistanceReport rep;
    for (std::size_t i = 0; i < n; ++i) account_ratio(g.at(i, i), epsilon, rep);
    for (std::size_t i = 0; i < n; ++i) {
        const double gii = g.at(i, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double gjj = g.at(j, j);
            const double gij = g.at(i, j);
            account_ratio(0.5 * (gii + gjj - 2.0 * gij), epsilon, rep);
            account_ratio(0.5 * (gii + gjj - 2.0 * gij), epsilon, rep);
            account_ratio(0.5 * (gii + gjj + 2.0 * gij), epsilon, rep);
            account_ratio(0.5 * (gii + gjj + 2.0 * gij), epsilon, rep);
        }
    }
    return rep;
}

ResampledJl sample_jl_to_pass(std::size_t n, std::size_t k, double epsilon, std::uint64_t seed,
                              int max_attempts) {
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        JlMap map = sample_jl(n, k, derive_seed(seed, static_cast<std::uint64_t>(attempt)), epsilon);
        if (!jl_surjective(map)) continue;
        if (check_pm_basis_distances(map, epsilon).pass) return {std::move(map), attempt};
    }
    throw std::runtime_error("sample_jl_to_pass: no passing draw within " +
                             std::to_string(max_attempts) + " attempts (N=" + std::to_string(n) +
                             ", k=" + std::to_string(k) + ", eps=" + std::to_string(epsilon) + ")");
}

double q_norm_pm_basis(std::span<const double> v) { return simd::sum_abs(v.data(), v.size()); }

// Dense primal simplex for min 1^T u s.t. [Q | -Q] u = v, u >= 0, via the
// Big-M-free two-phase method. Small and exact enough for desk-scale atom
// sets; not a general-purpose LP solver.
double q_norm(std::span<const double> v, std::span<const std::vector<double>> q_atoms) {
    if (q_atoms.empty()) throw std::invalid_argument("q_norm: empty atom set");
    const std::size_t dim = q_atoms[0].size();
    if (v.size() != dim) throw std::invalid_argument("q_norm: dimension mismatch");
    for (const auto& a : q_atoms)
        if (a.size() != dim) throw std::invalid_argument("q_norm: ragged atom set");

    const std::size_t nv = 2 * q_atoms.size();  // lambda+ and lambda-
    const std::size_t m = dim;

    // phase-1 tableau with artificial variables: columns [vars | artificials | rhs]
    const std::size_t cols = nv + m + 1;
    std::vector<double> tab((m + 1) * cols, 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return tab[r * cols + c]; };
    for (std::size_t r = 0; r < m; ++r) {
        double rhs = v[r];
        for (std::size_t j = 0; j < q_atoms.size(); ++j) {
            at(r, j) = q_atoms[j][r];
            at(r, q_atoms.size() + j) = -q_atoms[j][r];
        }
        if (rhs < 0) {
            for (std::size_t c = 0; c < nv; ++c) at(r, c) = -at(r, c);
            rhs = -rhs;
        }
        at(r, nv + r) = 1.0;
        at(r, cols - 1) = rhs;
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t r = 0; r < m; ++r) basis[r] = nv + r;

    std::vector<double> cost(nv + m, 0.0);
    auto run_simplex = [&](const std::vector<double>& c_vec, std::size_t active_cols) {
        // maximization: enter the first column with positive reduced profit
        // c_j - z_j (Bland's rule)
        for (int iter = 0; iter < 200000; ++iter) {
            std::size_t pivot_col = active_cols;
            for (std::size_t j = 0; j < active_cols; ++j) {
                double red = c_vec[j];
                for (std::size_t r = 0; r < m; ++r) red -= c_vec[basis[r]] * at(r, j);
                if (red > 1e-11) {
                    pivot_col = j;
                    break;
                }
            }
            if (pivot_col == active_cols) return;  // optimal
            std::size_t pivot_row = m;
            double best = 0.0;
            for (std::size_t r = 0; r < m; ++r) {
                const double a = at(r, pivot_col);
                if (a > 1e-12) {
                    const double ratio = at(r, cols - 1) / a;
                    if (pivot_row == m || ratio < best - 1e-15 ||
                        (std::fabs(ratio - best) <= 1e-15 && basis[r] < basis[pivot_row])) {
                        pivot_row = r;
                        best = ratio;
                    }
                }
            }
            if (pivot_row == m) throw std::runtime_error("q_norm: unbounded LP");
            const double piv = at(pivot_row, pivot_col);
            for (std::size_t c = 0; c < cols; ++c) at(pivot_row, c) /= piv;
            for (std::size_t r = 0; r < m; ++r) {
                if (r == pivot_row) continue;
                const double f = at(r, pivot_col);
                if (f == 0.0) continue;
                for (std::size_t c = 0; c < cols; ++c) at(r, c) -= f * at(pivot_row, c);
            }
            basis[pivot_row] = pivot_col;
        }
        throw std::runtime_error("q_norm: simplex iteration limit");
    };

    // phase 1: minimize the artificial sum, i.e. maximize -(artificials)
    for (std::size_t j = 0; j < m; ++j) cost[nv + j] = -1.0;
    run_simplex(cost, nv + m);
    double art = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= nv) art += at(r, cols - 1);
    if (art > 1e-8) throw std::invalid_argument("q_norm: v is not in span(Q)");

    // phase 2: minimize sum u (maximize its negative). Artificials may linger
    // in the basis at level zero; they cannot re-enter because the pivot scan
    // stops at the nv real columns, and zero cost keeps them out of the
    // reduced costs.
    std::fill(cost.begin(), cost.end(), -1.0);
    for (std::size_t j = 0; j < m; ++j) cost[nv + j] = 0.0;
    run_simplex(cost, nv);

    double obj = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] < nv) obj += at(r, cols - 1);
    return obj;
}

QuasiProjectionReport quasi_projection_gap(const JlMap& map, std::span<const double> v) {
    const auto fv = map.apply(v);
    const auto back = map.apply_adjoint(fv);
    double gap2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - back[i];
        gap2 += d * d;
    }
    QuasiProjectionReport rep;
    rep.gap = std::sqrt(gap2);
    rep.certified_bound = map.epsilon * std::sqrt(static_cast<double>(map.cols)) *
                          simd::sum_abs(v.data(), v.size());
    rep.within = rep.gap <= rep.certified_bound;
    return rep;
}

double projection_error_bound(BoundVariant variant, const BoundParams& p) {
    if (!(p.rho > 0.0 && p.rho < 1.0))
        throw std::invalid_argument("projection_error_bound: rho must lie in (0,1)");
    const double f2 = p.f_norm * p.f_norm;
    switch (variant) {
        case BoundVariant::general_sqrt:
            return std::sqrt(p.epsilon) * p.c * p.m_q * p.c_q * std::sqrt(1.0 + f2) /
                   (1.0 - p.rho);
        case BoundVariant::general_linear:
            return p.epsilon * p.c * p.m_q * p.m_q * p.c_q * p.c_q / (1.0 - p.rho);
        case BoundVariant::pm_basis_sqrt: {
            // rho = 1/(R |||f|||^2)  =>  R f^2/(R f^2 - 1) = 1/(1-rho)
            return std::sqrt(p.epsilon) * std::pow(static_cast<double>(p.n), 0.75) * p.c *
                   std::sqrt(1.0 + f2) / (1.0 - p.rho);
        }
        case BoundVariant::pm_basis_linear:
            return p.epsilon * static_cast<double>(p.n) * p.c / (1.0 - p.rho);
    }
    throw std::invalid_argument("projection_error_bound: invalid variant");
}

ProjectedSystem::ProjectedSystem(StepFn base_step, JlMap map, double rho,
                                 double base_affine_bound)
    : base_(std::move(base_step)),
      map_(std::move(map)),
      rho_(rho),
      base_affine_bound_(base_affine_bound) {
    f_norm_ = jl_operator_norm(map_);
    const double reduced = rho_ * f_norm_ * f_norm_;
    if (!(reduced < 1.0))
        throw std::invalid_argument(
            "ProjectedSystem: rho * |||f|||^2 = " + std::to_string(reduced) +
            " >= 1; the projected system has no contraction certificate (|||f||| = " +
            std::to_string(f_norm_) + ")");
}

std::vector<double> ProjectedSystem::reduced_step(std::span<const double> x, double z) const {
    const auto lifted = map_.apply_adjoint(x);
    const auto next = base_(lifted, z);
    return map_.apply(next);
}

std::vector<double> ProjectedSystem::vk_step(std::span<const double> v, double z) const {
    const auto next = base_(v, z);
    return map_.apply_adjoint(map_.apply(next));
}

double ProjectedSystem::reduced_radius() const {
    return base_affine_bound_ * f_norm_ / (1.0 - reduced_contraction());
}

}  // namespace sigsas
