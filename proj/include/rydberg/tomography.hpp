#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rydberg/measure.hpp"
#include "rydberg/pulses.hpp"

namespace rydberg {

inline constexpr int kTomoDim = 8;
inline constexpr int kTomoParams = 64;

// Lower-triangular T with real diagonal: 8 diagonal reals followed by the
// real and imaginary parts of the 28 strictly lower entries, row-major.
struct CholeskyParams {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(kTomoParams);

    static CholeskyParams identity();  // T = I / sqrt(8)
    static CholeskyParams from_matrix(const Mat& T);
    Mat matrix() const;
    Mat density() const;  // T^dagger T / Tr(T^dagger T)
};

// Outcome probabilities per basis, bases in all_bases() order.
struct TomographyDataset {
    std::vector<MeasurementBasis> bases;
    std::vector<Distribution> probabilities;
    std::vector<long> shots;  // 0 for exact data

    void validate(bool quasi = false) const;
    std::vector<std::string> missing_bases() const;
};

// <beta| U rho U^dagger |beta> with U the compiled program of the basis.
Distribution forward_model(const Mat& rho, const MeasurementBasis& basis);
TomographyDataset forward_dataset(const Mat& rho);
// Dataset from shots (histograms per basis).
TomographyDataset dataset_from_shots(const std::vector<std::vector<ShotRecord>>& shots_per_basis);
TomographyDataset correct_dataset(const TomographyDataset& data, const ErrorModel& em);

class TomographyCost {
public:
    explicit TomographyCost(const TomographyDataset& data);
    double value(const CholeskyParams& p) const;
    // Cost and gradient with respect to the 64 parameters.
    double value_and_gradient(const CholeskyParams& p, Eigen::VectorXd& grad) const;

private:
    std::vector<Mat> unitaries_;
    std::vector<Distribution> targets_;
};

struct MleOptions {
    int restarts = 8;  // random starts in addition to the identity start
    double gradient_tol = 1e-8;
    int max_iterations = 10'000;
    std::uint64_t seed = 1;
    int history = 10;  // L-BFGS memory
};

struct ReconstructedState {
    Mat rho;
    CholeskyParams params;
    double cost = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    int best_start = 0;  // 0 is the identity start
    std::vector<double> cost_history;  // accepted iterates of the best start
};

// Single minimization from `init`.
ReconstructedState mle_minimize(const TomographyCost& cost, const CholeskyParams& init, const MleOptions& opt);
// Identity start plus opt.restarts random starts; best cost wins.
ReconstructedState mle_reconstruct(const TomographyDataset& data, const MleOptions& opt = {});

double fidelity(const Mat& rho, const Vec& psi);
// True iff the fidelity exceeds 2/3.
bool entanglement_witness(const Mat& rho, const Vec& psi);
double trace_distance(const Mat& a, const Mat& b);

// Three-atom targets in the qubit basis.
Vec w_state();
// W with the phase imprint 2 pi/3 (sign +1) or 4 pi/3 (sign -1).
Vec chi_state(int sign);

} // namespace rydberg
