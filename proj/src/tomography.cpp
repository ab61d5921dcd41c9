#include "rydberg/tomography.hpp"

#include <cmath>
#include <deque>
#include <random>

#include <Eigen/Eigenvalues>

namespace rydberg {

CholeskyParams CholeskyParams::identity() {
    CholeskyParams p;
    p.t.head(kTomoDim).setConstant(1.0 / std::sqrt(double(kTomoDim)));
    return p;
}

CholeskyParams CholeskyParams::from_matrix(const Mat& T) {
    CholeskyParams p;
    int k = kTomoDim;
    for (int i = 0; i < kTomoDim; ++i) p.t(i) = T(i, i).real();
    for (int i = 1; i < kTomoDim; ++i)
        for (int j = 0; j < i; ++j) {
            p.t(k++) = T(i, j).real();
            p.t(k++) = T(i, j).imag();
        }
    return p;
}

Mat CholeskyParams::matrix() const {
    Mat T = Mat::Zero(kTomoDim, kTomoDim);
    int k = kTomoDim;
    for (int i = 0; i < kTomoDim; ++i) T(i, i) = t(i);
    for (int i = 1; i < kTomoDim; ++i)
        for (int j = 0; j < i; ++j) {
            T(i, j) = cplx(t(k), t(k + 1));
            k += 2;
        }
    return T;
}

Mat CholeskyParams::density() const {
    Mat T = matrix();
    Mat A = T.adjoint() * T;
    double tr = A.trace().real();
    if (!(tr > 0)) throw NumericalError("Cholesky parameters vanish");
    return A / tr;
}

void TomographyDataset::validate(bool quasi) const {
    if (bases.size() != probabilities.size()) throw ConfigError("dataset bases and tables differ in length");
    if (bases.empty()) throw ConfigError("dataset is empty");
    for (const auto& p : probabilities) {
        if (p.size() != kTomoDim) throw ConfigError("each basis needs 8 outcome probabilities");
        if (std::abs(p.sum() - 1.0) > 1e-9) throw ConfigError("outcome probabilities do not sum to 1");
        if (!quasi && p.minCoeff() < -1e-12) throw ConfigError("negative probability in raw data");
    }
}

std::vector<std::string> TomographyDataset::missing_bases() const {
    std::vector<std::string> out;
    for (const auto& b : all_bases()) {
        bool found = false;
        for (const auto& have : bases) found = found || have == b;
        if (!found) out.push_back(b.label());
    }
    return out;
}

namespace {

Mat basis_unitary(const MeasurementBasis& basis) {
    return program_unitary(compile_measurement_basis(basis), triangle_pattern(), AtomModel::Qubit);
}

} // namespace

Distribution forward_model(const Mat& rho, const MeasurementBasis& basis) {
    if (rho.rows() != kTomoDim || rho.cols() != kTomoDim) throw ConfigError("forward model expects 3 atoms");
    Mat U = basis_unitary(basis);
    return (U * rho * U.adjoint()).diagonal().real();
}

TomographyDataset forward_dataset(const Mat& rho) {
    TomographyDataset d;
    for (const auto& b : all_bases()) {
        d.bases.push_back(b);
        d.probabilities.push_back(forward_model(rho, b));
        d.shots.push_back(0);
    }
    return d;
}

TomographyDataset dataset_from_shots(const std::vector<std::vector<ShotRecord>>& shots_per_basis) {
    TomographyDataset d;
    for (const auto& shots : shots_per_basis) {
        if (shots.empty()) throw ConfigError("basis without shots");
        if (shots.front().n_atoms != 3) throw ConfigError("tomography expects 3 atoms");
        d.bases.push_back(MeasurementBasis::parse(shots.front().basis));
        d.probabilities.push_back(histogram(shots, 3));
        d.shots.push_back(static_cast<long>(shots.size()));
    }
    return d;
}

TomographyDataset correct_dataset(const TomographyDataset& data, const ErrorModel& em) {
    TomographyDataset out = data;
    for (auto& p : out.probabilities) p = correct_detection_errors(p, 3, em);
    return out;
}

TomographyCost::TomographyCost(const TomographyDataset& data) {
    data.validate(true);
    // A subset of bases still defines a cost; callers check missing_bases().
    for (std::size_t a = 0; a < data.bases.size(); ++a) {
        unitaries_.push_back(basis_unitary(data.bases[a]));
        targets_.push_back(data.probabilities[a]);
    }
}

double TomographyCost::value(const CholeskyParams& p) const {
    Mat rho = p.density();
    double c = 0.0;
    for (std::size_t a = 0; a < unitaries_.size(); ++a) {
        Eigen::VectorXd q = (unitaries_[a] * rho * unitaries_[a].adjoint()).diagonal().real();
        c += (q - targets_[a]).squaredNorm();
    }
    return c;
}

double TomographyCost::value_and_gradient(const CholeskyParams& p, Eigen::VectorXd& grad) const {
    Mat T = p.matrix();
    Mat A = T.adjoint() * T;
    double tau = A.trace().real();
    if (!(tau > 0)) throw NumericalError("Cholesky parameters vanish");
    Mat rho = A / tau;
    double c = 0.0;
    Mat G = Mat::Zero(kTomoDim, kTomoDim);
    for (std::size_t a = 0; a < unitaries_.size(); ++a) {
        const Mat& U = unitaries_[a];
        Eigen::VectorXd q = (U * rho * U.adjoint()).diagonal().real();
        Eigen::VectorXd r = q - targets_[a];
        c += r.squaredNorm();
        G.noalias() += U.adjoint() * (2.0 * r).cast<cplx>().asDiagonal() * U;
    }
    // dC = Tr(K dA), K = (G - Tr(G rho)) / tau, dA = dT^dagger T + T^dagger dT.
    Mat K = (G - (G * rho).trace() * Mat::Identity(kTomoDim, kTomoDim)) / tau;
    Mat Z = (K * T.adjoint()).transpose();
    grad.resize(kTomoParams);
    int k = kTomoDim;
    for (int i = 0; i < kTomoDim; ++i) grad(i) = 2.0 * Z(i, i).real();
    for (int i = 1; i < kTomoDim; ++i)
        for (int j = 0; j < i; ++j) {
            grad(k++) = 2.0 * Z(i, j).real();
            grad(k++) = -2.0 * Z(i, j).imag();
        }
    return c;
}

ReconstructedState mle_minimize(const TomographyCost& cost, const CholeskyParams& init, const MleOptions& opt) {
    // L-BFGS with a backtracking Armijo search; accepted costs never increase.
    ReconstructedState out;
    Eigen::VectorXd x = init.t, g, xn, gn;
    CholeskyParams p;
    p.t = x;
    double f = cost.value_and_gradient(p, g);
    out.cost_history.push_back(f);
    std::deque<Eigen::VectorXd> S, Y;
    int it = 0;
    for (; it < opt.max_iterations && g.norm() >= opt.gradient_tol; ++it) {
        // Two-loop recursion.
        Eigen::VectorXd q = g;
        std::vector<double> alpha(S.size());
        for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
            alpha[k] = S[k].dot(q) / Y[k].dot(S[k]);
            q -= alpha[k] * Y[k];
        }
        if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t k = 0; k < S.size(); ++k) {
            double beta = Y[k].dot(q) / Y[k].dot(S[k]);
            q += (alpha[k] - beta) * S[k];
        }
        Eigen::VectorXd d = -q;
        double slope = g.dot(d);
        if (!(slope < 0)) {
            d = -g;
            slope = -g.squaredNorm();
            S.clear();
            Y.clear();
        }
        double step = S.empty() ? std::min(1.0, 1.0 / std::max(1e-300, g.norm())) : 1.0;
        double fn = f;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x + step * d;
            p.t = xn;
            fn = cost.value_and_gradient(p, gn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        Eigen::VectorXd s = xn - x, y = gn - g;
        if (s.dot(y) > 1e-16 * s.norm() * y.norm()) {
            S.push_back(s);
            Y.push_back(y);
            if (static_cast<int>(S.size()) > opt.history) {
                S.pop_front();
                Y.pop_front();
            }
        }
        x = xn;
        g = gn;
        f = fn;
        out.cost_history.push_back(f);
    }
    out.params.t = x;
    out.rho = out.params.density();
    out.cost = f;
    out.iterations = it;
    out.gradient_norm = g.norm();
    out.converged = out.gradient_norm < opt.gradient_tol;
    return out;
}

ReconstructedState mle_reconstruct(const TomographyDataset& data, const MleOptions& opt) {
    TomographyCost cost(data);
    const int n = 1 + std::max(0, opt.restarts);
    std::vector<CholeskyParams> starts(n);
    starts[0] = CholeskyParams::identity();
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    for (int s = 1; s < n; ++s)
        for (int k = 0; k < kTomoParams; ++k) starts[s].t(k) = normal(rng);
    std::vector<ReconstructedState> results(n);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < n; ++s) results[s] = mle_minimize(cost, starts[s], opt);
    int best = 0;
    for (int s = 1; s < n; ++s)
        if (results[s].cost < results[best].cost) best = s;
    results[best].best_start = best;
    return results[best];
}

double fidelity(const Mat& rho, const Vec& psi) {
    return std::clamp((psi.adjoint() * rho * psi)(0, 0).real(), 0.0, 1.0);
}

bool entanglement_witness(const Mat& rho, const Vec& psi) { return fidelity(rho, psi) > 2.0 / 3.0; }

double trace_distance(const Mat& a, const Mat& b) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Vec w_state() {
    Vec w = Vec::Zero(kTomoDim);
    // One atom down: indices 0b001, 0b010, 0b100.
    w(1) = w(2) = w(4) = 1.0 / std::sqrt(3.0);
    return w;
}

Vec chi_state(int sign) {
    double phi = sign > 0 ? 2.0 * kPi / 3.0 : 4.0 * kPi / 3.0;
    return phase_imprint_unitary(phi, triangle_pattern(), AtomModel::Qubit) * w_state();
}

} // namespace rydberg
