#pragma once

// Thin wrappers over Boost.Math for the reference distributions used by the
// tests and samplers.

namespace survsynth::dist {

double normal_cdf(double z);
double normal_quantile(double p);
// Upper tail P(T > t) of Student's t with (possibly fractional) df.
double t_upper(double t, double df);
// Upper tail P(X > x) of a chi-square with df degrees of freedom.
double chisq_upper(double x, double df);
// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_upper(double lambda);

} // namespace survsynth::dist
