#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sojourn/evolution_sojourn.hpp"
#include "sojourn/scattering_ssf.hpp"

namespace sojourn {

// I(R) ~ C1 R + C0 for large R. The sector parts add up to C1 and C0
// (the negative-sector constant part already carries its minus sign).
struct AsymptoticExpansion {
  cplx C1{0.0, 0.0};
  cplx C0{0.0, 0.0};
  cplx c1_pos{0.0, 0.0}, c1_neg{0.0, 0.0};
  cplx c0_pos{0.0, 0.0}, c0_neg{0.0, 0.0};
};

// sum over sectors of < f_s, (E/|p|) g_s >
cplx leading_coefficient(const SpinorField& f, const SpinorField& g);
// -i <f+, K g+> + i <f-, K g->, K = E/(2p^2) + (E/(2p^2)) p.grad + (1/(2p^2)) p.grad(E .)
cplx constant_term(const SpinorField& f, const SpinorField& g);
// Same through the dilation-type operator: -<f+, (E A0 + i/(2E)) g+> + <f-, (E A0 + i/(2E)) g->.
cplx constant_term_A0(const SpinorField& f, const SpinorField& g);
AsymptoticExpansion asymptotic_expansion(const SpinorField& f, const SpinorField& g);
cplx asymptotic_I(const SpinorField& f, const SpinorField& g, double R);

struct CommutatorDelay {
  double value = 0.0;
  double imag_residue = 0.0;
};

// (f, T f) with T f = -+ E conj(s) i (s'/|p|) P+- f in each sector, s' = ds/d|p|.
CommutatorDelay commutator_delay_detail(const SpinorField& f, const MultiplierSMatrix& s);
double commutator_delay(const SpinorField& f, const MultiplierSMatrix& s);

// Least squares y = sum_k c_k phi_k(x). Returns the coefficients and the
// rms residual.
struct LinearFit {
  std::vector<double> coef;
  double rms_residual = 0.0;
  double max_residual = 0.0;
};
LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::function<double(double)>>& basis);

// I(R) = slope R + intercept + sum_k a_k R^{-k} over the samples with R >= R_min.
struct CurveFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<int> powers;
  std::vector<double> tail;
  double rms_residual = 0.0;
  std::size_t points = 0;
};
CurveFit fit_sojourn_curve(const SojournCurve& curve, double R_min, const std::vector<int>& inverse_powers);

struct SojournDelay {
  double value = 0.0;
  double err = 0.0;
  double fit_residual = 0.0;
  double tail_coefficient = 0.0;  // a in D(R) = dT + a/R
  double slope = 0.0;             // dD/dR from a straight-line fit on the same window
  double c1 = 0.0;                // C1(f, f)
  std::vector<double> R;
  std::vector<double> D;
  std::vector<double> D_err;
  std::size_t fit_from = 0;  // first index of the fitted window
};

// D(R) = I(Sf, Sf; R) - I(f, f; R), extrapolated with D = dT + a/R over the
// top half of R_list.
SojournDelay sojourn_delay(const SpinorField& f, const MultiplierSMatrix& s, const std::vector<double>& R_list,
                           const TimeQuadrature& tq, const SojournOptions& opt = {});

struct RouteValue {
  double value = 0.0;
  double err = 0.0;
};

struct DelayReport {
  RouteValue commutator;
  RouteValue eisenbud_wigner;
  RouteValue sojourn;
  double ew_imag_residue = 0.0;
  double commutator_imag_residue = 0.0;
  std::string model;
};

}  // namespace sojourn
