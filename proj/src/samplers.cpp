#include "chaos/samplers.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>

namespace chaos::samplers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Counts calls and maps failures (exceptions, NaN) to +inf.
class Counted {
public:
    explicit Counted(const Objective& F) : F_(F) {}

    double operator()(const Vector& x) const
    {
        calls_.fetch_add(1, std::memory_order_relaxed);
        try {
            const double v = F_(x);
            return std::isnan(v) ? kInf : v;
        } catch (const std::exception&) {
            return kInf;
        }
    }
    [[nodiscard]] std::uint64_t calls() const { return calls_.load(); }

private:
    const Objective& F_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace

Vector forward_gradient(const Objective& F, const Vector& theta, double f0, double step)
{
    Vector g(theta.size());
    Vector x = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        x[i] = theta[i] + step;
        g[i] = (F(x) - f0) / step;
        x[i] = theta[i];
    }
    return g;
}

Vector central_gradient(const Objective& F, const Vector& theta, double step)
{
    Vector g(theta.size());
    Vector x = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        x[i] = theta[i] + step;
        const double fp = F(x);
        x[i] = theta[i] - step;
        const double fm = F(x);
        x[i] = theta[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
}

namespace {

// Hessian and central gradient from one stencil: 2 evaluations per axis plus
// 4 per off-diagonal pair.
void hessian_stencil(const Objective& F, const Vector& theta, double f0, double h, Matrix& H, Vector& g)
{
    const Eigen::Index m = theta.size();
    H.resize(m, m);
    g.resize(m);
    Vector x = theta;
    for (Eigen::Index i = 0; i < m; ++i) {
        x[i] = theta[i] + h;
        const double fp = F(x);
        x[i] = theta[i] - h;
        const double fm = F(x);
        x[i] = theta[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        g[i] = (fp - fm) / (2.0 * h);
    }
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) {
            double f[4];
            int k = 0;
            for (int si : {1, -1})
                for (int sj : {1, -1}) {
                    x[i] = theta[i] + si * h;
                    x[j] = theta[j] + sj * h;
                    f[k++] = F(x);
                }
            x[i] = theta[i];
            x[j] = theta[j];
            H(i, j) = H(j, i) = (f[0] - f[1] - f[2] + f[3]) / (4.0 * h * h);
        }
}

}  // namespace

Matrix fd_hessian(const Objective& F, const Vector& theta, double f0, double step)
{
    Matrix H;
    Vector g;
    hessian_stencil(F, theta, f0, step, H, g);
    return H;
}

ModeResult find_mode(const Objective& F_raw, const Vector& start, const ModeOptions& opts)
{
    if (!start.allFinite()) throw std::invalid_argument("find_mode: non-finite start");
    Counted F(F_raw);
    const Objective Fc = [&F](const Vector& x) { return F(x); };
    const Eigen::Index m = start.size();

    Vector x = start;
    double f = F(x);
    if (!std::isfinite(f)) throw OptimizationError("find_mode: objective not finite at the start point", F.calls());

    bool central = false;
    auto gradient = [&](const Vector& at, double f_at) {
        return central ? central_gradient(Fc, at, opts.fd_step) : forward_gradient(Fc, at, f_at, opts.fd_step);
    };
    Vector g = gradient(x, f);
    Matrix Hinv = Matrix::Identity(m, m);
    bool scaled = false;

    ModeResult res;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (!g.allFinite()) {
            if (central) throw OptimizationError("find_mode: gradient is not finite", F.calls());
            central = true;
            g = gradient(x, f);
            continue;
        }
        if (g.norm() <= opts.grad_tol) {
            if (central) {
                converged = true;
                break;
            }
            central = true;
            g = gradient(x, f);
            continue;
        }

        Vector p = -Hinv * g;
        if (!(g.dot(p) < 0.0)) {
            Hinv.setIdentity();
            scaled = false;
            p = -g;
        }
        if (p.norm() > opts.max_step) p *= opts.max_step / p.norm();

        const double slope = g.dot(p);
        double alpha = 1.0, f_new = kInf;
        Vector x_new = x;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = x + alpha * p;
            f_new = F(x_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
            if (alpha * p.norm() <= 1e-14 * (1.0 + x.norm())) break;
        }

        const Vector s = x_new - x;
        const bool tiny_step = s.norm() <= 1e-12 * (1.0 + x.norm());
        if (!accepted || tiny_step) {
            // Progress is limited by gradient accuracy.
            if (!central) {
                central = true;
                g = gradient(x, f);
                Hinv.setIdentity();
                scaled = false;
                continue;
            }
            res.stalled = true;
            converged = true;
            break;
        }

        const Vector g_new = gradient(x_new, f_new);
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                Hinv = Matrix::Identity(m, m) * (sy / y.squaredNorm());
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Matrix I = Matrix::Identity(m, m);
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        const double df = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if (!central && df <= 1e-14 * (1.0 + std::abs(f))) {
            central = true;
            g = gradient(x, f);
        }
    }
    if (!converged) throw OptimizationError("find_mode: no convergence within the iteration cap", F.calls());

    Matrix H;
    Vector gc;
    hessian_stencil(Fc, x, f, opts.hessian_step, H, gc);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    Vector lam = eig.eigenvalues();
    for (Eigen::Index k = 0; k < m; ++k)
        if (!(lam[k] >= opts.eig_floor)) {
            lam[k] = opts.eig_floor;
            res.hessian_floored = true;
        }
    if (res.hessian_floored) H = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    if (H.llt().info() != Eigen::Success) throw OptimizationError("find_mode: Hessian is not positive definite", F.calls());

    if (gc.allFinite()) {
        const Vector x_newton = x - H.llt().solve(gc);
        const double f_newton = F(x_newton);
        if (std::isfinite(f_newton) && f_newton <= f) {
            x = x_newton;
            f = f_newton;
        }
    }

    res.mode = x;
    res.value = f;
    res.hessian = H;
    res.iterations = it;
    res.grad_norm = g.norm();
    res.eval_count = F.calls();
    return res;
}

WeightedEnsemble implicit_sample(const Objective& F_raw, const ModeResult& mode, int n, std::uint64_t seed,
                                 Execution execution)
{
    if (n < 1) throw std::invalid_argument("implicit_sample: need at least one sample");
    const Eigen::Index m = mode.mode.size();
    const Matrix cov = mode.hessian.llt().solve(Matrix::Identity(m, m));
    Eigen::LLT<Matrix> llt(0.5 * (cov + cov.transpose()));
    if (llt.info() != Eigen::Success) throw std::invalid_argument("implicit_sample: Hessian is not SPD");
    const Matrix L = llt.matrixL();

    std::vector<Vector> xi(static_cast<std::size_t>(n));
    WeightedEnsemble ens;
    ens.samples.resize(std::size_t(n));
    for (int k = 0; k < n; ++k) {
        std::mt19937_64 rng(derive_seed(seed, std::uint64_t(k)));
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector z(m);
        for (Eigen::Index d = 0; d < m; ++d) z[d] = normal(rng);
        xi[std::size_t(k)] = z;
        ens.samples[std::size_t(k)] = mode.mode + L * z;
    }

    Counted F(F_raw);
    std::vector<double> logw(static_cast<std::size_t>(n));
    auto weigh = [&](int k) {
        const auto u = std::size_t(k);
        logw[u] = -F(ens.samples[u]) + mode.value + 0.5 * xi[u].squaredNorm();
    };
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < n; ++k) weigh(k);
    } else {
        for (int k = 0; k < n; ++k) weigh(k);
    }

    double lmax = -kInf;
    for (double l : logw) lmax = std::max(lmax, l);
    if (!std::isfinite(lmax)) throw std::runtime_error("implicit_sample: every sample has zero weight");
    ens.weights.resize(std::size_t(n));
    double total = 0.0;
    for (int k = 0; k < n; ++k) total += (ens.weights[std::size_t(k)] = std::exp(logw[std::size_t(k)] - lmax));
    double sq = 0.0;
    for (double& w : ens.weights) {
        w /= total;
        sq += w * w;
    }
    ens.ess = 1.0 / sq;
    ens.degenerate = ens.ess < 0.1 * n;
    ens.eval_count = mode.eval_count + F.calls();
    return ens;
}

double metropolis_acceptance(double f_current, double f_proposed)
{
    if (!std::isfinite(f_proposed)) return 0.0;
    return std::min(1.0, std::exp(f_current - f_proposed));
}

Chain rw_metropolis(const Objective& F_raw, const Vector& start, int n_steps, double step_sd, std::uint64_t seed)
{
    if (!(step_sd > 0)) throw std::invalid_argument("rw_metropolis: step_sd must be positive");
    if (n_steps < 1) throw std::invalid_argument("rw_metropolis: need at least one step");
    Counted F(F_raw);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Chain chain;
    chain.states.reserve(std::size_t(n_steps));
    Vector x = start;
    double f = F(x);
    if (!std::isfinite(f)) throw std::invalid_argument("rw_metropolis: objective not finite at the start");
    long accepted = 0;
    Vector prop(x.size());
    for (int s = 0; s < n_steps; ++s) {
        for (Eigen::Index d = 0; d < x.size(); ++d) prop[d] = x[d] + step_sd * normal(rng);
        const double fp = F(prop);
        const double u = unif(rng);
        if (u < metropolis_acceptance(f, fp)) {
            x = prop;
            f = fp;
            ++accepted;
        }
        chain.states.push_back(x);
    }
    chain.acceptance_rate = double(accepted) / n_steps;
    chain.eval_count = F.calls();
    return chain;
}

Vector chain_mean(const Chain& chain, double burn_fraction)
{
    if (chain.states.empty()) throw std::invalid_argument("chain_mean: empty chain");
    if (!(burn_fraction >= 0.0 && burn_fraction < 1.0)) throw std::invalid_argument("chain_mean: bad burn-in");
    const auto first = std::size_t(burn_fraction * double(chain.states.size()));
    Vector mean = Vector::Zero(chain.states.front().size());
    for (std::size_t k = first; k < chain.states.size(); ++k) mean += chain.states[k];
    return mean / double(chain.states.size() - first);
}

Vector conditional_mean(const WeightedEnsemble& ensemble)
{
    if (ensemble.samples.empty()) throw std::invalid_argument("conditional_mean: empty ensemble");
    Vector mean = Vector::Zero(ensemble.samples.front().size());
    for (std::size_t k = 0; k < ensemble.samples.size(); ++k) mean += ensemble.weights[k] * ensemble.samples[k];
    return mean;
}

double estimation_error(const Vector& estimate, const Vector& truth)
{
    if (estimate.size() != truth.size()) throw std::invalid_argument("estimation_error: size mismatch");
    return (estimate - truth).norm();
}

}  // namespace chaos::samplers
