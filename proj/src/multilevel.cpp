#include "lamg/multilevel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lamg {

namespace {

SmootherSpec make_level_smoother(const SparseMatrix& A, const SmootherConfig& scfg) {
    SmootherSpec spec;
    if (scfg.kind == SmootherKind::gauss_seidel) {
        spec.kind = SmootherKind::gauss_seidel;
    } else {
        spec.kind = SmootherKind::block_gauss_seidel;
        spec.blocks = build_blocks(A, std::min(scfg.nblocks, A.nrows));
    }
    spec.direction = SweepDirection::forward;
    return spec;
}

void smooth_homogeneous(const SparseMatrix& A, const SmootherSpec& spec, std::vector<double>& v,
                        int sweeps) {
    std::vector<double> zero(A.nrows, 0.0);
    for (int s = 0; s < sweeps; ++s) apply_smoother(A, spec, v, zero);
}

}  // namespace

int resolve_setup_cycles(const BootstrapConfig& cfg, int n) {
    if (cfg.setup_cycles >= 0) return cfg.setup_cycles;
    if (n < 1000) return 1;
    if (n < 100000) return 2;
    return 3;
}

int resolve_eigenvector_count(const BootstrapConfig& cfg) {
    int k = cfg.n_eigenvectors > 0 ? cfg.n_eigenvectors : cfg.K;
    if (k > cfg.K) throw std::invalid_argument("bootstrap: n_eigenvectors must be <= K");
    return k;
}

SetupResult build_hierarchy(const SparseMatrix& A, TestVectorSet finest_vectors,
                            const BootstrapConfig& cfg, const CoarseningParams& cparams,
                            const SmootherConfig& scfg) {
    if (A.nrows != A.ncols) throw std::invalid_argument("build_hierarchy: A must be square");
    SetupResult out;
    SparseMatrix cur = A;
    TestVectorSet vecs = std::move(finest_vectors);

    // Every setup leg relaxes the incoming vector set on the finest grid
    // before coarsening, like the restricted vectors on every coarse grid.
    {
        SmootherSpec finest = make_level_smoother(cur, scfg);
        for (auto& v : vecs.vectors) {
            smooth_homogeneous(cur, finest, v, cfg.nu);
            double nrm = norm2(v);
            if (nrm > 0.0)
                for (double& e : v) e /= nrm;
        }
    }

    while (true) {
        Level level;
        level.A = std::move(cur);
        level.smoother = make_level_smoother(level.A, scfg);
        const SparseMatrix& Aref = level.A;
        out.level_vectors.push_back(vecs);
        if (Aref.nrows <= cfg.coarsest_cap) {
            out.hierarchy.levels.push_back(std::move(level));
            break;
        }

        CoarseningResult cres = lar_coarsening(Aref, vecs, cparams);
        if (cres.interp.coarse_count() == Aref.nrows) {
            CoarseningParams retry = cparams;
            retry.strength_threshold = 0.0;
            cres = lar_coarsening(Aref, vecs, retry);
            if (cres.interp.coarse_count() == Aref.nrows)
                throw std::runtime_error("build_hierarchy: coarsening stagnated (n_c = n)");
        }
        SparseMatrix P = build_P(cres.interp, Aref.nrows);
        SparseMatrix Anext = galerkin(Aref, P);
        SparseMatrix Pt = transpose(P);

        // Restrict the test vectors and smooth them on the coarse level.
        TestVectorSet next;
        next.weights = vecs.weights;
        next.vectors.reserve(vecs.vectors.size());
        SmootherSpec coarse_smoother = make_level_smoother(Anext, scfg);
        for (const auto& v : vecs.vectors) {
            std::vector<double> vc = spmv(Pt, v);
            smooth_homogeneous(Anext, coarse_smoother, vc, cfg.nu);
            double nrm = norm2(vc);
            if (nrm > 0.0)
                for (double& e : vc) e /= nrm;
            next.vectors.push_back(std::move(vc));
        }

        level.P = std::move(P);
        level.Pt = std::move(Pt);
        level.interp_meta = std::move(cres.interp);
        level.coarsening_report = std::move(cres.report);
        out.hierarchy.levels.push_back(std::move(level));
        cur = std::move(Anext);
        vecs = std::move(next);
    }

    const SparseMatrix& Ac = out.hierarchy.levels.back().A;
    CholeskyFactor f = cholesky(dense_from_sparse(Ac));
    out.hierarchy.coarsest_solver = std::move(f);
    return out;
}

SetupResult setup_initial(const SparseMatrix& A, const BootstrapConfig& cfg,
                          const CoarseningParams& cparams, const SmootherConfig& scfg,
                          std::uint64_t seed) {
    if (A.nrows < 1) throw std::invalid_argument("setup_initial: empty system");
    // Raw seeded vectors; build_hierarchy applies the nu finest-level sweeps.
    SmootherSpec finest = make_level_smoother(A, scfg);
    TestVectorSet vecs = generate_test_vectors(A, cfg.K, 0, finest, seed);
    return build_hierarchy(A, std::move(vecs), cfg, cparams, scfg);
}

SetupResult bootstrap_cycle(const SetupResult& current, const BootstrapConfig& cfg,
                            const CoarseningParams& cparams, const SmootherConfig& scfg) {
    const Hierarchy& h = current.hierarchy;
    if (h.depth() < 2) throw std::invalid_argument("bootstrap_cycle: hierarchy must have >= 2 levels");

    // Composite interpolation from the coarsest to the finest level.
    SparseMatrix composite = *h.levels[0].P;
    for (int l = 1; l + 1 < h.depth(); ++l) composite = sparse_matmul(composite, *h.levels[l].P);

    const SparseMatrix& Ac = h.levels.back().A;
    DenseMatrix Ad = dense_from_sparse(Ac);
    DenseMatrix Bd = dense_from_sparse(sparse_matmul(transpose(composite), composite));

    int k = std::min(resolve_eigenvector_count(cfg), Ac.nrows);
    EigResult eig;
    try {
        eig = dense_sym_generalized_eig(Ad, Bd, k);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("bootstrap_cycle: P^T P is not SPD (rank-deficient interpolation)");
    }

    // Pool: the K random-lineage vectors (their smoothing accumulates across
    // setup cycles) plus the current cycle's eigenvectors.
    TestVectorSet pool;
    const TestVectorSet& finest = current.level_vectors.front();
    int keep = std::min(cfg.K, finest.count());
    pool.vectors.assign(finest.vectors.begin(), finest.vectors.begin() + keep);
    pool.weights.assign(finest.weights.begin(), finest.weights.begin() + keep);

    // Prolongate each eigenvector level by level, smoothing on every grid.
    for (int j = 0; j < k; ++j) {
        std::vector<double> v(Ac.nrows);
        for (int i = 0; i < Ac.nrows; ++i) v[i] = eig.eigenvectors(i, j);
        for (int l = h.depth() - 2; l >= 0; --l) {
            v = spmv(*h.levels[l].P, v);
            smooth_homogeneous(h.levels[l].A, h.levels[l].smoother, v, cfg.nu);
        }
        double nrm = norm2(v);
        if (nrm > 0.0)
            for (double& e : v) e /= nrm;
        pool.vectors.push_back(std::move(v));
        pool.weights.push_back(1.0);
    }

    return build_hierarchy(h.levels.front().A, std::move(pool), cfg, cparams, scfg);
}

namespace {

void vcycle_level(const Hierarchy& h, int l, std::span<const double> b, std::vector<double>& x) {
    const Level& level = h.levels[l];
    const bool coarsest = (l + 1 == h.depth());
    if (coarsest) {
        if (h.coarsest_solver) {
            x = h.coarsest_solver->solve(b);
        } else {
            // Smoother-only fallback: zero coarse correction.
            SmootherSpec pre = level.smoother;
            pre.direction = SweepDirection::forward;
            apply_smoother(level.A, pre, x, b);
            SmootherSpec post = level.smoother;
            post.direction = SweepDirection::backward;
            apply_smoother(level.A, post, x, b);
        }
        return;
    }

    SmootherSpec pre = level.smoother;
    pre.direction = SweepDirection::forward;
    apply_smoother(level.A, pre, x, b);

    std::vector<double> r = spmv(level.A, x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    std::vector<double> rc = level.Pt ? spmv(*level.Pt, r) : spmv(transpose(*level.P), r);
    std::vector<double> ec(rc.size(), 0.0);
    vcycle_level(h, l + 1, rc, ec);
    std::vector<double> corr = spmv(*level.P, ec);
    for (size_t i = 0; i < corr.size(); ++i) x[i] += corr[i];

    SmootherSpec post = level.smoother;
    post.direction = SweepDirection::backward;
    apply_smoother(level.A, post, x, b);
}

}  // namespace

std::vector<double> vcycle(const Hierarchy& h, std::span<const double> b, std::vector<double> x) {
    if (h.depth() < 1) throw std::invalid_argument("vcycle: empty hierarchy");
    if (static_cast<int>(b.size()) != h.finest_size() || x.size() != b.size())
        throw std::invalid_argument("vcycle: dimension mismatch");
    vcycle_level(h, 0, b, x);
    return x;
}

std::pair<std::vector<double>, SolveReport> pcg(const SparseMatrix& A, std::span<const double> b,
                                                const Hierarchy* h, double tol, int maxit) {
    if (A.nrows != A.ncols) throw std::invalid_argument("pcg: A must be square");
    const int n = A.nrows;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("pcg: dimension mismatch");

    SolveReport report;
    if (h) {
        for (const Level& level : h->levels) report.level_sizes.push_back(level.A.nrows);
        for (int l = 0; l + 1 < h->depth(); ++l)
            report.coarsening_ratios.push_back(static_cast<double>(h->levels[l + 1].A.nrows) /
                                               h->levels[l].A.nrows);
    } else {
        report.level_sizes.push_back(n);
    }

    std::vector<double> x(n, 0.0);
    std::vector<double> r(b.begin(), b.end());
    double r0 = norm2(r);
    report.residual_history.push_back(r0);
    if (r0 == 0.0) {
        report.converged = true;
        return {x, report};
    }

    auto precondition = [&](const std::vector<double>& rhs) {
        if (!h) return rhs;
        return vcycle(*h, rhs, std::vector<double>(n, 0.0));
    };

    std::vector<double> z = precondition(r);
    std::vector<double> p = z;
    double rz = dot(r, z);
    if (rz <= 0.0) throw std::runtime_error("pcg: preconditioner is not positive definite");

    for (int it = 1; it <= maxit; ++it) {
        std::vector<double> Ap = spmv(A, p);
        double pAp = dot(p, Ap);
        if (pAp <= 0.0) throw std::runtime_error("pcg: matrix is not positive definite");
        double alpha = rz / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        double rn = norm2(r);
        report.residual_history.push_back(rn);
        report.iterations = it;
        if (rn <= tol * r0) {
            report.converged = true;
            break;
        }
        if (it == maxit) break;
        z = precondition(r);
        double rz_next = dot(r, z);
        if (rz_next <= 0.0) throw std::runtime_error("pcg: preconditioner is not positive definite");
        double beta = rz_next / rz;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_next;
    }
    return {x, report};
}

double estimate_two_grid_factor(const Hierarchy& h, int iters, std::uint64_t seed) {
    const SparseMatrix& A = h.levels.front().A;
    const int n = A.nrows;
    NormalSampler rng(seed);
    std::vector<double> e(n);
    for (int i = 0; i < n; ++i) e[i] = rng.next();
    double nrm = norm2(e);
    for (double& v : e) v /= nrm;

    std::vector<double> zero(n, 0.0);
    auto a_norm = [&](const std::vector<double>& v) { return std::sqrt(std::max(0.0, dot(v, spmv(A, v)))); };

    std::vector<double> ratios;
    double before = a_norm(e);
    for (int it = 0; it < iters; ++it) {
        e = vcycle(h, zero, std::move(e));
        double after = a_norm(e);
        if (before <= 1e-150) {
            ratios.push_back(0.0);
            break;
        }
        ratios.push_back(after / before);
        double scale = norm2(e);
        if (scale <= 1e-150) {
            break;
        }
        for (double& v : e) v /= scale;
        before = a_norm(e);
    }
    if (ratios.empty()) return 0.0;
    int tail = std::min<int>(5, static_cast<int>(ratios.size()));
    double log_sum = 0.0;
    bool zero_ratio = false;
    for (int i = static_cast<int>(ratios.size()) - tail; i < static_cast<int>(ratios.size()); ++i) {
        if (ratios[i] <= 0.0) {
            zero_ratio = true;
            break;
        }
        log_sum += std::log(ratios[i]);
    }
    return zero_ratio ? 0.0 : std::exp(log_sum / tail);
}

}  // namespace lamg
