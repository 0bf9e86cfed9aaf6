#include "fgpc/fourier.hpp"

#include "fgpc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fgpc {

namespace {

using cd = std::complex<double>;

std::string shape_message(const char* what, long er, long ec, long ar, long ac)
{
    std::ostringstream os;
    os << what << ": expected shape " << er << " x " << ec << ", got " << ar << " x " << ac;
    return os.str();
}

} // namespace

FourierGrid::FourierGrid(int harmonics, int samples, int states)
    : harmonics_(harmonics), samples_(samples), states_(states)
{
    if (harmonics < 0)
        throw InvalidArgument("FourierGrid: harmonic truncation H must be >= 0");
    if (states < 1)
        throw InvalidArgument("FourierGrid: state dimension must be >= 1");
    if (samples <= 2 * harmonics) {
        std::ostringstream os;
        os << "FourierGrid: N_t = " << samples << " violates the anti-aliasing rule N_t > 2H = "
           << 2 * harmonics;
        throw InvalidArgument(os.str());
    }

    const int H = harmonics;
    const int Nt = samples;
    const double dphi = 2.0 * std::numbers::pi / Nt;

    phases_.resize(Nt);
    for (int j = 0; j < Nt; ++j)
        phases_[j] = dphi * j;

    forward_.resize(2 * H + 1, Nt);
    inverse_.resize(Nt, 2 * H + 1);
    for (int k = -H; k <= H; ++k) {
        for (int j = 0; j < Nt; ++j) {
            // Reduce k*j modulo N_t so the phase argument stays in [0, 2pi).
            const long kj = ((static_cast<long>(k) * j) % Nt + Nt) % Nt;
            const double arg = dphi * static_cast<double>(kj);
            const cd e(std::cos(arg), std::sin(arg));
            inverse_(j, k + H) = e;
            forward_(k + H, j) = std::conj(e) / static_cast<double>(Nt);
        }
    }

    const int S = 2 * H + 1;
    synthesis_.setZero(S, Nt);
    synthesis_rate_.setZero(S, Nt);
    synthesis_curvature_.setZero(S, Nt);
    analysis_.setZero(Nt, S);
    for (int j = 0; j < Nt; ++j) {
        synthesis_(0, j) = 1.0;
        analysis_(j, 0) = 1.0 / Nt;
        for (int k = 1; k <= H; ++k) {
            const double c = inverse_(j, k + H).real();
            const double s = inverse_(j, k + H).imag();
            const double kk = static_cast<double>(k);
            synthesis_(cosine_slot(k), j) = c;
            synthesis_(sine_slot(k), j) = s;
            synthesis_rate_(cosine_slot(k), j) = -kk * s;
            synthesis_rate_(sine_slot(k), j) = kk * c;
            synthesis_curvature_(cosine_slot(k), j) = -kk * kk * c;
            synthesis_curvature_(sine_slot(k), j) = -kk * kk * s;
            analysis_(j, cosine_slot(k)) = 2.0 * c / Nt;
            analysis_(j, sine_slot(k)) = 2.0 * s / Nt;
        }
    }
}

int FourierGrid::default_samples(int harmonics, int nonlinearity_degree)
{
    const int need = std::max(4 * harmonics + 2, 2 * harmonics * std::max(nonlinearity_degree, 1) + 2);
    int n = 1;
    while (n < need)
        n *= 2;
    return n;
}

FourierGrid FourierGrid::oversampled(int harmonics, int nonlinearity_degree, int states)
{
    return FourierGrid(harmonics, default_samples(harmonics, nonlinearity_degree), states);
}

HarmonicCoefficients::HarmonicCoefficients(int states, int harmonics)
    : values_(Eigen::MatrixXcd::Zero(states, 2 * harmonics + 1))
{
}

HarmonicCoefficients::HarmonicCoefficients(Eigen::MatrixXcd values) : values_(std::move(values))
{
    if (values_.cols() % 2 != 1)
        throw DimensionError("HarmonicCoefficients: column count must be 2H+1");
}

double HarmonicCoefficients::hermitian_defect() const
{
    double defect = 0.0;
    const int H = harmonics();
    for (int c = 0; c < states(); ++c)
        for (int k = 0; k <= H; ++k)
            defect = std::max(defect, std::abs(at(c, -k) - std::conj(at(c, k))));
    return defect;
}

HarmonicCoefficients HarmonicCoefficients::from_cosine_sine(const CosineSine& cs)
{
    if (cs.cosine.rows() != cs.sine.rows() || cs.cosine.cols() != cs.sine.cols())
        throw DimensionError("CosineSine: cosine and sine blocks differ in shape");
    const int H = cs.harmonics();
    HarmonicCoefficients out(cs.states(), H);
    for (int c = 0; c < cs.states(); ++c) {
        out.at(c, 0) = cs.cosine(c, 0);
        for (int k = 1; k <= H; ++k) {
            // x_{-k} = (a_k + i b_k) / 2, x_k its conjugate.
            const cd neg(0.5 * cs.cosine(c, k), 0.5 * cs.sine(c, k));
            out.at(c, -k) = neg;
            out.at(c, k) = std::conj(neg);
        }
    }
    return out;
}

CosineSine HarmonicCoefficients::to_cosine_sine() const
{
    const int H = harmonics();
    CosineSine cs{Eigen::MatrixXd::Zero(states(), H + 1), Eigen::MatrixXd::Zero(states(), H + 1)};
    for (int c = 0; c < states(); ++c) {
        cs.cosine(c, 0) = at(c, 0).real();
        for (int k = 1; k <= H; ++k) {
            // Average both halves so small asymmetries are projected out.
            const cd neg = 0.5 * (at(c, -k) + std::conj(at(c, k)));
            cs.cosine(c, k) = 2.0 * neg.real();
            cs.sine(c, k) = 2.0 * neg.imag();
        }
    }
    return cs;
}

HarmonicCoefficients HarmonicCoefficients::from_slots(const Eigen::MatrixXd& slots)
{
    if (slots.cols() % 2 != 1)
        throw DimensionError("slot layout must have 2H+1 columns");
    const int H = static_cast<int>(slots.cols() - 1) / 2;
    CosineSine cs{Eigen::MatrixXd::Zero(slots.rows(), H + 1), Eigen::MatrixXd::Zero(slots.rows(), H + 1)};
    for (int c = 0; c < slots.rows(); ++c) {
        cs.cosine(c, 0) = slots(c, 0);
        for (int k = 1; k <= H; ++k) {
            cs.cosine(c, k) = slots(c, cosine_slot(k));
            cs.sine(c, k) = slots(c, sine_slot(k));
        }
    }
    return from_cosine_sine(cs);
}

Eigen::MatrixXd HarmonicCoefficients::to_slots() const
{
    const CosineSine cs = to_cosine_sine();
    const int H = harmonics();
    Eigen::MatrixXd slots(states(), 2 * H + 1);
    for (int c = 0; c < states(); ++c) {
        slots(c, 0) = cs.cosine(c, 0);
        for (int k = 1; k <= H; ++k) {
            slots(c, cosine_slot(k)) = cs.cosine(c, k);
            slots(c, sine_slot(k)) = cs.sine(c, k);
        }
    }
    return slots;
}

HarmonicCoefficients forward_transform(const Eigen::MatrixXd& samples, const FourierGrid& grid)
{
    if (samples.rows() != grid.samples())
        throw DimensionError(shape_message("forward_transform samples", grid.samples(), samples.cols(),
                                           samples.rows(), samples.cols()));
    Eigen::MatrixXcd coeffs = (grid.forward_operator() * samples.cast<cd>()).transpose();
    return HarmonicCoefficients(std::move(coeffs));
}

Eigen::MatrixXd inverse_transform(const HarmonicCoefficients& coeffs, const FourierGrid& grid)
{
    if (coeffs.harmonics() != grid.harmonics())
        throw DimensionError(shape_message("inverse_transform coefficients", coeffs.states(),
                                           grid.real_slots(), coeffs.states(), coeffs.values().cols()));
    const double scale = 1.0 + coeffs.values().cwiseAbs().maxCoeff();
    const double defect = coeffs.hermitian_defect();
    if (defect > 1e-12 * scale) {
        std::ostringstream os;
        os << "inverse_transform: coefficients are not Hermitian symmetric (defect " << defect
           << "); no real signal exists";
        throw InvalidArgument(os.str());
    }
    const Eigen::MatrixXcd samples = grid.inverse_operator() * coeffs.values().transpose();
    return samples.real();
}

HarmonicCoefficients differentiate(const HarmonicCoefficients& coeffs, double omega)
{
    if (!(omega > 0.0))
        throw InvalidArgument("differentiate: omega must be > 0");
    const int H = coeffs.harmonics();
    Eigen::MatrixXcd out = coeffs.values();
    for (int k = -H; k <= H; ++k)
        out.col(k + H) *= cd(0.0, k * omega);
    return HarmonicCoefficients(std::move(out));
}

Eigen::MatrixXd evaluate_series(const HarmonicCoefficients& coeffs, double omega,
                                std::span<const double> times)
{
    const int H = coeffs.harmonics();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), coeffs.states());
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int c = 0; c < coeffs.states(); ++c) {
            cd sum = coeffs.at(c, 0);
            for (int k = 1; k <= H; ++k) {
                const double arg = k * omega * times[i];
                const cd e(std::cos(arg), std::sin(arg));
                sum += coeffs.at(c, k) * e + coeffs.at(c, -k) * std::conj(e);
            }
            out(static_cast<Eigen::Index>(i), c) = sum.real();
        }
    }
    return out;
}

} // namespace fgpc
