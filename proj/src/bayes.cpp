#include "chaos/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

namespace chaos::bayes {

double PosteriorSpec::neg_log_posterior(const Vector& theta) const
{
    if (theta.size() != dim) throw std::invalid_argument("neg_log_posterior: dimension mismatch");
    const Vector r = data - observed(theta);
    return 0.5 * theta.squaredNorm() + r.squaredNorm() / (2.0 * noise_sd * noise_sd);
}

double PosteriorSpec::log_density(const Vector& theta) const
{
    const double F = neg_log_posterior(theta);
    return small_noise_eps ? -F / *small_noise_eps : -F;
}

Objective PosteriorSpec::objective() const
{
    return [spec = *this](const Vector& theta) { return spec.neg_log_posterior(theta); };
}

PosteriorSpec exact_posterior(const EllipticForward& forward, const fem::ObservationOperator& obs, Vector data,
                              double noise_sd)
{
    if (Eigen::Index(obs.size()) != data.size()) throw std::invalid_argument("exact_posterior: data size mismatch");
    if (!(noise_sd > 0)) throw std::invalid_argument("exact_posterior: noise_sd must be positive");
    PosteriorSpec spec;
    spec.data = std::move(data);
    spec.noise_sd = noise_sd;
    spec.kind = ForwardKind::FemExact;
    spec.dim = forward.dim();
    spec.observed = [f = &forward, obs](const Vector& theta) { return obs.apply((*f)(theta)); };
    return spec;
}

PosteriorSpec surrogate_posterior(const pce::PceModel& model, const fem::ObservationOperator& obs, Vector data,
                                  double noise_sd)
{
    if (Eigen::Index(obs.size()) != data.size()) throw std::invalid_argument("surrogate_posterior: data size mismatch");
    if (!(noise_sd > 0)) throw std::invalid_argument("surrogate_posterior: noise_sd must be positive");
    auto reduced = std::make_shared<pce::PceModel>();
    reduced->dim = model.dim;
    reduced->order = model.order;
    reduced->indices = model.indices;
    reduced->provenance = model.provenance;
    reduced->coefficients.resize(model.coefficients.rows(), Eigen::Index(obs.size()));
    for (std::size_t k = 0; k < obs.size(); ++k)
        reduced->coefficients.col(Eigen::Index(k)) = model.coefficients.col(obs.interior_indices()[k]);

    PosteriorSpec spec;
    spec.data = std::move(data);
    spec.noise_sd = noise_sd;
    spec.kind = ForwardKind::Pce;
    spec.pce_order = model.order;
    spec.dim = model.dim;
    spec.observed = [reduced](const Vector& theta) { return pce::evaluate_pce(*reduced, theta); };
    return spec;
}

Vector synthesize_data(const Vector& clean_observations, double noise_sd, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector d = clean_observations;
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        const double z = normal(rng);
        d[k] += noise_sd * z;
    }
    return d;
}

Vector synthesize_data(const EllipticForward& forward, const fem::ObservationOperator& obs, const Vector& theta_true,
                       double noise_sd, std::uint64_t seed)
{
    return synthesize_data(obs.apply(forward(theta_true)), noise_sd, seed);
}

// ---------------------------------------------------------------------------

namespace {

struct Grid {
    std::size_t dim = 0;
    std::size_t res = 0;
    std::size_t count = 0;
    Vector step;
};

Grid make_grid(const Box& box, const QuadratureOptions& opts)
{
    if (box.lo.size() != box.hi.size() || box.lo.size() == 0) throw std::invalid_argument("quadrature: malformed box");
    if (opts.resolution < 3) throw std::invalid_argument("quadrature: resolution must be >= 3");
    Grid g;
    g.dim = std::size_t(box.lo.size());
    g.res = std::size_t(opts.resolution);
    g.count = 1;
    for (std::size_t d = 0; d < g.dim; ++d) {
        if (!(box.hi[Eigen::Index(d)] > box.lo[Eigen::Index(d)])) throw std::invalid_argument("quadrature: empty box");
        if (g.count > opts.budget / g.res) throw std::length_error("quadrature: grid exceeds point budget");
        g.count *= g.res;
    }
    g.step = (box.hi - box.lo) / double(g.res - 1);
    return g;
}

// Visit every grid point with its trapezoid log-weight and whether it lies on a face.
template <class Fn>
void for_each_point(const Grid& g, const Box& box, Fn&& fn)
{
    std::vector<std::size_t> odo(g.dim, 0);
    Vector x(Eigen::Index(g.dim));
    double log_vol = 0.0;
    for (std::size_t d = 0; d < g.dim; ++d) log_vol += std::log(g.step[Eigen::Index(d)]);
    for (std::size_t k = 0; k < g.count; ++k) {
        double lw = log_vol;
        bool face = false;
        for (std::size_t d = 0; d < g.dim; ++d) {
            const auto e = Eigen::Index(d);
            x[e] = box.lo[e] + double(odo[d]) * g.step[e];
            if (odo[d] == 0 || odo[d] + 1 == g.res) {
                lw -= std::numbers::ln2;
                face = true;
            }
        }
        fn(x, lw, face);
        for (std::size_t d = g.dim; d-- > 0;) {
            if (++odo[d] < g.res) break;
            odo[d] = 0;
        }
    }
}

double log_sum_exp(const std::vector<double>& v)
{
    double m = -std::numeric_limits<double>::infinity();
    for (double a : v) m = std::max(m, a);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double a : v) s += std::exp(a - m);
    return m + std::log(s);
}

struct Sampled {
    std::vector<double> logp;  // log density values
    std::vector<double> logw;  // log quadrature weights
    std::vector<char> face;
    double log_z = 0.0;
    double max_face = -std::numeric_limits<double>::infinity();  // max normalized log density on faces
};

Sampled sample_density(const LogDensity& log_p, const Box& box, const Grid& g)
{
    Sampled s;
    s.logp.reserve(g.count);
    s.logw.reserve(g.count);
    s.face.reserve(g.count);
    std::vector<double> terms;
    terms.reserve(g.count);
    for_each_point(g, box, [&](const Vector& x, double lw, bool face) {
        const double lp = log_p(x);
        if (std::isnan(lp)) throw std::domain_error("quadrature: log density is NaN");
        s.logp.push_back(lp);
        s.logw.push_back(lw);
        s.face.push_back(face);
        terms.push_back(lp + lw);
    });
    s.log_z = log_sum_exp(terms);
    if (!std::isfinite(s.log_z)) throw std::domain_error("quadrature: density vanishes on the whole box");
    for (std::size_t k = 0; k < s.logp.size(); ++k)
        if (s.face[k]) s.max_face = std::max(s.max_face, s.logp[k] - s.log_z);
    return s;
}

void check_coverage(const Sampled& s, const Box& box, const QuadratureOptions& opts, const char* which)
{
    const double log_vol = (box.hi - box.lo).array().log().sum();
    if (s.max_face + log_vol > std::log(opts.coverage_tol))
        throw CoverageError(std::string("quadrature: box does not cover the ") + which + " density");
}

}  // namespace

double log_normalizer(const LogDensity& log_p, const Box& box, const QuadratureOptions& opts)
{
    const Grid g = make_grid(box, opts);
    const Sampled s = sample_density(log_p, box, g);
    check_coverage(s, box, opts, "integrated");
    return s.log_z;
}

double kld_quadrature(const LogDensity& log_p_num, const LogDensity& log_p_den, const Box& box,
                      const QuadratureOptions& opts)
{
    const Grid g = make_grid(box, opts);
    const Sampled num = sample_density(log_p_num, box, g);
    const Sampled den = sample_density(log_p_den, box, g);
    check_coverage(num, box, opts, "first");
    check_coverage(den, box, opts, "second");

    double kl = 0.0;
    for (std::size_t k = 0; k < num.logp.size(); ++k) {
        const double ln_p = num.logp[k] - num.log_z;
        const double mass = std::exp(ln_p + num.logw[k]);
        if (mass == 0.0) continue;
        const double ln_q = den.logp[k] - den.log_z;
        kl += mass * (ln_p - ln_q);
    }
    return kl;
}

// ---------------------------------------------------------------------------

ToyModel ToyModel::linear(double data, double noise_sd)
{
    return ToyModel{Kind::Linear, 0.0, data, noise_sd};
}

ToyModel ToyModel::cubic(double c, double data, double noise_sd)
{
    return ToyModel{Kind::Cubic, c, data, noise_sd};
}

double ToyModel::h(double theta) const
{
    return kind == Kind::Linear ? theta : theta + c * theta * theta * theta;
}

double ToyModel::F(double theta) const
{
    const double r = data - h(theta);
    return r * r / (2.0 * noise_sd * noise_sd) + 0.5 * theta * theta;
}

double ToySurrogate::operator()(double theta) const
{
    std::vector<double> H;
    hermite_eval_all(int(coefficients.size()) - 1, theta, H);
    double s = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) s += coefficients[k] * H[k];
    return s;
}

ToySurrogate project_toy(const ToyModel& toy, int order)
{
    if (order < 0) throw std::invalid_argument("project_toy: negative order");
    const QuadratureRule rule = gauss_hermite_rule(std::max(60, order + 4));
    ToySurrogate s;
    s.coefficients.assign(std::size_t(order) + 1, 0.0);
    std::vector<double> H;
    for (std::size_t j = 0; j < rule.size(); ++j) {
        hermite_eval_all(order, rule.nodes[j], H);
        const double hv = toy.h(rule.nodes[j]);
        for (int k = 0; k <= order; ++k) s.coefficients[std::size_t(k)] += rule.weights[j] * hv * H[std::size_t(k)];
    }
    return s;
}

double surrogate_F(const ToyModel& toy, const ToySurrogate& hN, double theta)
{
    const double r = toy.data - hN(theta);
    return r * r / (2.0 * toy.noise_sd * toy.noise_sd) + 0.5 * theta * theta;
}

namespace {

std::pair<double, double> golden_section(const std::function<double(double)>& f, double a, double b)
{
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace

ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi, int scan_points,
                          double tie_tol)
{
    if (!(hi > lo) || scan_points < 3) throw std::invalid_argument("minimize_scalar: bad interval");
    const auto n = std::size_t(scan_points);
    const double dx = (hi - lo) / double(n - 1);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = f(lo + double(k) * dx);

    std::vector<std::size_t> minima;
    for (std::size_t k = 0; k < n; ++k) {
        const bool left = k == 0 || v[k] <= v[k - 1];
        const bool right = k + 1 == n || v[k] < v[k + 1];
        if (left && right) minima.push_back(k);
    }
    auto polish = [&](std::size_t k) {
        const double a = lo + double(k == 0 ? 0 : k - 1) * dx;
        const double b = lo + double(std::min(k + 1, n - 1)) * dx;
        return golden_section(f, a, b);
    };

    ScalarMin best;
    best.value = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, double>> polished;
    for (std::size_t k : minima) {
        const auto [x, fx] = polish(k);
        polished.emplace_back(k, fx);
        if (fx < best.value) {
            best.value = fx;
            best.argmin = x;
        }
    }
    best.local_minima = int(minima.size());
    std::size_t ties = 0;
    for (const auto& [k, fx] : polished)
        if (std::abs(fx - best.value) <= tie_tol * (1.0 + std::abs(best.value))) ++ties;
    if (ties > 1) throw MultipleMinimizers("minimize_scalar: global minimizer is not unique");
    return best;
}

namespace {

struct Peak {
    double mode;
    double sd;
};

// Location and width of exp(-G/eps) from the minimizer and curvature of G.
Peak peak_of(const std::function<double(double)>& G, double mode, double eps)
{
    const double s = 1e-3 * std::max(1.0, std::abs(mode));
    const double curv = (G(mode + s) - 2.0 * G(mode) + G(mode - s)) / (s * s);
    if (!(curv > 0)) throw std::domain_error("small-noise box: non-positive curvature at the minimizer");
    return {mode, std::sqrt(eps / curv)};
}

Box union_box(const std::vector<Peak>& peaks, double sds)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : peaks) {
        lo = std::min(lo, p.mode - sds * p.sd);
        hi = std::max(hi, p.mode + sds * p.sd);
    }
    Box box{Vector::Constant(1, lo), Vector::Constant(1, hi)};
    return box;
}

void check_eps_list(const std::vector<double>& eps_list)
{
    if (eps_list.empty()) throw std::invalid_argument("claim curve: empty eps list");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0)) throw std::invalid_argument("claim curve: eps must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("claim curve: eps list must decrease");
    }
}

}  // namespace

std::vector<ClaimRow> claim1_curve(const ToyModel& toy, const std::vector<double>& eps_list, const ClaimOptions& opts)
{
    check_eps_list(eps_list);
    const auto F = [&](double t) { return toy.F(t); };
    const ScalarMin fmin = minimize_scalar(F, opts.search_lo, opts.search_hi);
    const double limit = toy.F(0.0) - fmin.value;

    std::vector<ClaimRow> rows;
    for (double eps : eps_list) {
        const Box box = union_box({{0.0, std::sqrt(eps)}, peak_of(F, fmin.argmin, eps)}, opts.box_sds);
        const double kl = kld_quadrature([eps](const Vector& x) { return -0.5 * x[0] * x[0] / eps; },
                                         [&](const Vector& x) { return -toy.F(x[0]) / eps; }, box, opts.quad);
        rows.push_back({eps, eps * kl, limit});
    }
    return rows;
}

std::vector<ClaimRow> claim2_curve(const ToyModel& toy, int order, const std::vector<double>& eps_list,
                                   const ClaimOptions& opts)
{
    check_eps_list(eps_list);
    const ToySurrogate hN = project_toy(toy, order);
    const auto F = [&](double t) { return toy.F(t); };
    const auto FN = [&](double t) { return surrogate_F(toy, hN, t); };
    const ScalarMin fmin = minimize_scalar(F, opts.search_lo, opts.search_hi);
    const ScalarMin fnmin = minimize_scalar(FN, opts.search_lo, opts.search_hi);
    const double limit = toy.F(fnmin.argmin) - fmin.value;

    std::vector<ClaimRow> rows;
    for (double eps : eps_list) {
        const Box box = union_box({peak_of(FN, fnmin.argmin, eps), peak_of(F, fmin.argmin, eps)}, opts.box_sds);
        const double kl = kld_quadrature([&](const Vector& x) { return -FN(x[0]) / eps; },
                                         [&](const Vector& x) { return -toy.F(x[0]) / eps; }, box, opts.quad);
        rows.push_back({eps, eps * kl, limit});
    }
    return rows;
}

NormalizerCheck laplace_normalizer_check(const ToyModel& toy, double eps, const ClaimOptions& opts)
{
    if (!(eps > 0)) throw std::invalid_argument("laplace_normalizer_check: eps must be positive");
    const auto F = [&](double t) { return toy.F(t); };
    const ScalarMin fmin = minimize_scalar(F, opts.search_lo, opts.search_hi);
    const Box box = union_box({peak_of(F, fmin.argmin, eps)}, opts.box_sds);
    NormalizerCheck out;
    out.eps = eps;
    out.min_F = fmin.value;
    out.log_gamma = log_normalizer([&](const Vector& x) { return -toy.F(x[0]) / eps; }, box, opts.quad);
    out.residual = out.log_gamma + fmin.value / eps - 0.5 * std::log(2.0 * std::numbers::pi * eps);
    out.relative = fmin.value > 0 ? std::abs(out.residual) / (fmin.value / eps)
                                  : std::numeric_limits<double>::infinity();
    return out;
}

double toy_posterior_variance(const ToyModel& toy, double eps, const ClaimOptions& opts)
{
    const auto F = [&](double t) { return toy.F(t); };
    const ScalarMin fmin = minimize_scalar(F, opts.search_lo, opts.search_hi);
    const Box box = union_box({peak_of(F, fmin.argmin, eps)}, opts.box_sds);
    const double lz = log_normalizer([&](const Vector& x) { return -toy.F(x[0]) / eps; }, box, opts.quad);
    const int n = opts.quad.resolution;
    const double a = box.lo[0], b = box.hi[0], dx = (b - a) / (n - 1);
    double m1 = 0.0, m2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = a + k * dx;
        const double w = (k == 0 || k == n - 1) ? 0.5 * dx : dx;
        const double p = std::exp(-toy.F(x) / eps - lz);
        m1 += w * x * p;
        m2 += w * x * x * p;
    }
    return m2 - m1 * m1;
}

}  // namespace chaos::bayes
