#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace fgpc {

/// Equidistant sampling of one normalized period [0, 2*pi) together with the
/// frequency <-> time operators of the alternating frequency/time scheme.
///
/// Phases are dimensionless: a physical time t maps to the phase omega * t.
/// The complex operators follow the textbook layout with harmonic index
/// k = -H..H stored at column/row k + H.
class FourierGrid {
public:
    FourierGrid(int harmonics, int samples, int states = 1);

    /// Grid with the default oversampling rule: next power of two
    /// >= max(4H + 2, 2H * nonlinearity_degree + 2).
    static FourierGrid oversampled(int harmonics, int nonlinearity_degree, int states = 1);
    static int default_samples(int harmonics, int nonlinearity_degree);

    int harmonics() const { return harmonics_; }
    int samples() const { return samples_; }
    int states() const { return states_; }
    /// Number of real coefficients per state: a_0, (a_k, b_k) for k = 1..H.
    int real_slots() const { return 2 * harmonics_ + 1; }
    const std::vector<double>& phases() const { return phases_; }

    /// E*_{H N_t}: (2H+1) x N_t forward operator, entries exp(-i k t_j) / N_t.
    const Eigen::MatrixXcd& forward_operator() const { return forward_; }
    /// E_{N_t H}: N_t x (2H+1) inverse operator, entries exp(i k t_j).
    const Eigen::MatrixXcd& inverse_operator() const { return inverse_; }

    /// Real synthesis tables in cosine/sine slot layout, (2H+1) x N_t.
    /// Row 0 is the constant, row 2k-1 is cos(k t_j), row 2k is sin(k t_j).
    const Eigen::MatrixXd& synthesis() const { return synthesis_; }
    /// d/dphase of synthesis().
    const Eigen::MatrixXd& synthesis_rate() const { return synthesis_rate_; }
    /// d^2/dphase^2 of synthesis().
    const Eigen::MatrixXd& synthesis_curvature() const { return synthesis_curvature_; }
    /// N_t x (2H+1) analysis table returning (a_0, a_1, b_1, ...) of samples.
    const Eigen::MatrixXd& analysis() const { return analysis_; }

private:
    int harmonics_;
    int samples_;
    int states_;
    std::vector<double> phases_;
    Eigen::MatrixXcd forward_;
    Eigen::MatrixXcd inverse_;
    Eigen::MatrixXd synthesis_;
    Eigen::MatrixXd synthesis_rate_;
    Eigen::MatrixXd synthesis_curvature_;
    Eigen::MatrixXd analysis_;
};

/// Real cosine/sine coefficients, one row per state.
/// cosine(c, k) = a_k for k = 0..H; sine(c, k) = b_k for k = 1..H, sine(c, 0) = 0.
struct CosineSine {
    Eigen::MatrixXd cosine;
    Eigen::MatrixXd sine;

    int states() const { return static_cast<int>(cosine.rows()); }
    int harmonics() const { return static_cast<int>(cosine.cols()) - 1; }
};

/// Complex Fourier coefficients x_k, k = -H..H, one row per state.
class HarmonicCoefficients {
public:
    HarmonicCoefficients() = default;
    HarmonicCoefficients(int states, int harmonics);
    explicit HarmonicCoefficients(Eigen::MatrixXcd values);

    int states() const { return static_cast<int>(values_.rows()); }
    int harmonics() const { return static_cast<int>(values_.cols() - 1) / 2; }

    std::complex<double>& at(int state, int k) { return values_(state, k + harmonics()); }
    std::complex<double> at(int state, int k) const { return values_(state, k + harmonics()); }
    const Eigen::MatrixXcd& values() const { return values_; }

    /// Largest |x_{-k} - conj(x_k)| over states and k.
    double hermitian_defect() const;

    static HarmonicCoefficients from_cosine_sine(const CosineSine& cs);
    /// Requires (approximate) Hermitian symmetry; uses the k >= 0 half.
    CosineSine to_cosine_sine() const;

    /// Cosine/sine slot layout (a_0, a_1, b_1, ..., a_H, b_H) per state row.
    static HarmonicCoefficients from_slots(const Eigen::MatrixXd& slots);
    Eigen::MatrixXd to_slots() const;

private:
    Eigen::MatrixXcd values_;
};

/// Trapezoidal-rule Fourier coefficients of N_t x n_d samples (the forward
/// operator E*); throws DimensionError on shape mismatch.
HarmonicCoefficients forward_transform(const Eigen::MatrixXd& samples, const FourierGrid& grid);

/// Evaluates the truncated series at the grid phases. Throws InvalidArgument
/// if the coefficients are not Hermitian symmetric (no real signal).
Eigen::MatrixXd inverse_transform(const HarmonicCoefficients& coeffs, const FourierGrid& grid);

/// Coefficients of the time derivative: x_k -> i k omega x_k.
HarmonicCoefficients differentiate(const HarmonicCoefficients& coeffs, double omega);

/// Dense evaluation of sum_k x_k exp(i k omega t) at arbitrary times;
/// returns times.size() x n_d.
Eigen::MatrixXd evaluate_series(const HarmonicCoefficients& coeffs, double omega,
                                std::span<const double> times);

/// Slot index of a_k / b_k in the real cosine/sine layout.
constexpr int cosine_slot(int k) { return k == 0 ? 0 : 2 * k - 1; }
constexpr int sine_slot(int k) { return 2 * k; }

} // namespace fgpc
